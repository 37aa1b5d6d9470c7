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

#ifndef OPALDP_HISTOGRAM_HPP_
#define OPALDP_HISTOGRAM_HPP_

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opaldp/error.hpp"
#include "opaldp/schema.hpp"

namespace opaldp {

// Point-function counts over a domain. Only the support is stored: a point
// with count zero is simply absent.
class Histogram {
 public:
  using Map = std::map<Point, std::int64_t>;

  Histogram() = default;
  Histogram(std::initializer_list<std::pair<const Point, std::int64_t>> init) {
    for (const auto& [p, c] : init) Add(p, c);
  }

  void Add(const Point& point, std::int64_t count = 1) {
    if (count < 0) throw InvalidArgumentError("histogram counts are nonnegative");
    if (count == 0) return;
    counts_[point] += count;
  }

  std::int64_t Count(const Point& point) const {
    const auto it = counts_.find(point);
    return it == counts_.end() ? 0 : it->second;
  }

  std::int64_t Total() const {
    std::int64_t total = 0;
    for (const auto& [p, c] : counts_) total += c;
    return total;
  }

  bool empty() const { return counts_.empty(); }
  std::size_t support_size() const { return counts_.size(); }
  const Map& counts() const { return counts_; }
  Map::const_iterator begin() const { return counts_.begin(); }
  Map::const_iterator end() const { return counts_.end(); }

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  Map counts_;
};

enum class Mechanism { kStabilityHistogram, kLaplace };

// Presentation of released SBH values. kNearest rounds to the nearest
// integer and clamps at 1; kRaw publishes the noisy real.
enum class RoundingPolicy { kNearest, kRaw };

struct NoisyEntry {
  Point point;
  double raw = 0.0;    // count + noise, before rounding
  double value = 0.0;  // what is published under the rounding policy

  friend bool operator==(const NoisyEntry&, const NoisyEntry&) = default;
};

// Output of a release mechanism. Entries of an SBH release are in point
// order; entries of a full-domain release are in domain (mixed-radix) order.
struct NoisyHistogram {
  Mechanism mechanism = Mechanism::kStabilityHistogram;
  std::vector<NoisyEntry> entries;
  // Suppression cutoff; -infinity for mechanisms without one.
  double threshold_used = -std::numeric_limits<double>::infinity();
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  RoundingPolicy rounding = RoundingPolicy::kRaw;

  const NoisyEntry* Find(const Point& point) const {
    for (const auto& e : entries) {
      if (e.point == point) return &e;
    }
    return nullptr;
  }

  bool Contains(const Point& point) const { return Find(point) != nullptr; }
  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  friend bool operator==(const NoisyHistogram&, const NoisyHistogram&) = default;
};

}  // namespace opaldp

#endif  // OPALDP_HISTOGRAM_HPP_
