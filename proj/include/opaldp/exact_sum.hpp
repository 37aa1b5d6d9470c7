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

#ifndef OPALDP_EXACT_SUM_HPP_
#define OPALDP_EXACT_SUM_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "opaldp/error.hpp"

namespace opaldp {

// Accumulates doubles without rounding error. The running sum is held as a
// list of non-overlapping partials (Shewchuk's expansion arithmetic); Result()
// returns the exact sum correctly rounded to the nearest double. Budget
// totals go through this so that many tiny delta terms never lose bits.
class ExactSum {
 public:
  ExactSum() = default;

  void Add(double x) {
    if (!std::isfinite(x)) {
      throw InvalidArgumentError("ExactSum accepts finite values only");
    }
    std::size_t kept = 0;
    for (std::size_t j = 0; j < partials_.size(); ++j) {
      double y = partials_[j];
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[kept++] = lo;
      x = hi;
    }
    partials_.resize(kept);
    partials_.push_back(x);
  }

  ExactSum& operator+=(double x) {
    Add(x);
    return *this;
  }

  ExactSum& operator+=(const ExactSum& other) {
    for (double p : other.partials_) Add(p);
    return *this;
  }

  double Result() const {
    std::size_t n = partials_.size();
    if (n == 0) return 0.0;
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
      const double x = hi;
      const double y = partials_[--n];
      hi = x + y;
      const double yr = hi - x;
      lo = y - yr;
      if (lo != 0.0) break;
    }
    // Round-half-even correction when the remaining partials push the
    // exact value off an apparent tie.
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) ||
                  (lo > 0.0 && partials_[n - 1] > 0.0))) {
      const double y = lo * 2.0;
      const double x = hi + y;
      const double yr = x - hi;
      if (y == yr) hi = x;
    }
    return hi;
  }

  // -1, 0 or +1 according to the exact (unrounded) sum.
  int Sign() const {
    const double r = Result();
    return (r > 0.0) - (r < 0.0);
  }

  static double Of(std::span<const double> values) {
    ExactSum sum;
    for (double v : values) sum.Add(v);
    return sum.Result();
  }

 private:
  std::vector<double> partials_;
};

}  // namespace opaldp

#endif  // OPALDP_EXACT_SUM_HPP_
