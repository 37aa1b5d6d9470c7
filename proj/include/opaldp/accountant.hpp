// Copyright 2026 The opaldp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPALDP_ACCOUNTANT_HPP_
#define OPALDP_ACCOUNTANT_HPP_

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opaldp/error.hpp"
#include "opaldp/exact_sum.hpp"
#include "opaldp/params.hpp"

namespace opaldp {

// Composed totals. Unlike PrivacyParams this may be (0, 0) and delta may
// reach or exceed 1, since it is a sum.
struct BudgetTotals {
  double epsilon = 0.0;
  double delta = 0.0;

  friend bool operator==(const BudgetTotals&, const BudgetTotals&) = default;
};

struct LedgerEntry {
  std::string label;
  PrivacyParams params;
};

// Append-only record of (label, epsilon_j, delta_j) charges under basic
// composition. Value type: Charge returns an updated copy and leaves the
// original untouched.
class BudgetLedger {
 public:
  BudgetLedger() = default;
  explicit BudgetLedger(std::optional<PrivacyParams> cap) : cap_(cap) {}

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  const std::optional<PrivacyParams>& cap() const { return cap_; }
  bool empty() const { return entries_.empty(); }

  // Basic composition: (sum epsilon_j, sum delta_j), each summed exactly
  // and rounded once.
  BudgetTotals Compose() const { return {epsilon_sum_.Result(), delta_sum_.Result()}; }

  // Throws BudgetExceededError, and leaves nothing changed, if the exact
  // new totals would exceed the cap in either coordinate.
  BudgetLedger Charge(std::string label, const PrivacyParams& params) const& {
    BudgetLedger next = *this;
    next.Append(std::move(label), params);
    return next;
  }

  BudgetLedger Charge(std::string label, const PrivacyParams& params) && {
    Append(std::move(label), params);
    return std::move(*this);
  }

  static std::string FormatDouble(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }

 private:
  void Append(std::string label, const PrivacyParams& params) {
    ExactSum eps = epsilon_sum_;
    ExactSum del = delta_sum_;
    eps.Add(params.epsilon());
    del.Add(params.delta());
    if (cap_) {
      ExactSum eps_over = eps;
      ExactSum del_over = del;
      eps_over.Add(-cap_->epsilon());
      del_over.Add(-cap_->delta());
      if (eps_over.Sign() > 0 || del_over.Sign() > 0) {
        throw BudgetExceededError(
            "charge '" + label + "' would raise totals to (" +
                FormatDouble(eps.Result()) + ", " + FormatDouble(del.Result()) +
                "), above cap (" + FormatDouble(cap_->epsilon()) + ", " +
                FormatDouble(cap_->delta()) + ")",
            eps.Result(), del.Result());
      }
    }
    entries_.push_back({std::move(label), params});
    epsilon_sum_ = std::move(eps);
    delta_sum_ = std::move(del);
  }

  std::vector<LedgerEntry> entries_;
  std::optional<PrivacyParams> cap_;
  ExactSum epsilon_sum_;
  ExactSum delta_sum_;
};

inline BudgetTotals Compose(const BudgetLedger& ledger) { return ledger.Compose(); }

inline BudgetLedger Charge(const BudgetLedger& ledger, std::string label,
                           const PrivacyParams& params) {
  return ledger.Charge(std::move(label), params);
}

namespace internal {

// Picks a double q near total / k such that k copies of q sum exactly (after
// one rounding) to total.
inline std::optional<double> EvenShare(double total, std::int64_t k) {
  double q = total / static_cast<double>(k);
  double down = q;
  double up = q;
  auto matches = [&](double candidate) {
    ExactSum sum;
    // k * candidate is exact as the sum of k copies; doubling keeps the
    // number of Add calls logarithmic in k.
    double chunk = candidate;
    for (std::int64_t m = k; m > 0; m >>= 1) {
      if (m & 1) sum.Add(chunk);
      chunk *= 2.0;
    }
    return candidate > 0.0 && sum.Result() == total;
  };
  for (int step = 0; step < 16; ++step) {
    if (matches(up)) return up;
    if (matches(down)) return down;
    up = std::nextafter(up, INFINITY);
    down = std::nextafter(down, 0.0);
  }
  return std::nullopt;
}

}  // namespace internal

// Divides a global budget into k equal per-partition budgets. The shares
// compose back to exactly `total`. When no single double achieves that, the
// last share absorbs the rounding remainder.
inline std::vector<PrivacyParams> SplitEvenly(const PrivacyParams& total, std::int64_t k) {
  if (k < 1) throw InvalidArgumentError("cannot split a budget into fewer than 1 part");
  auto split = [k](double value) {
    std::vector<double> shares;
    if (const auto q = internal::EvenShare(value, k)) {
      shares.assign(static_cast<std::size_t>(k), *q);
      return shares;
    }
    const double q = value / static_cast<double>(k);
    shares.assign(static_cast<std::size_t>(k - 1), q);
    ExactSum rest;
    rest.Add(value);
    for (double s : shares) rest.Add(-s);
    shares.push_back(rest.Result());
    return shares;
  };
  const std::vector<double> eps = split(total.epsilon());
  const std::vector<double> del = split(total.delta());
  std::vector<PrivacyParams> out;
  out.reserve(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < eps.size(); ++i) out.emplace_back(eps[i], del[i]);
  return out;
}

}  // namespace opaldp

#endif  // OPALDP_ACCOUNTANT_HPP_
