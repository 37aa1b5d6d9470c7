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

#ifndef OPALDP_PARAMS_HPP_
#define OPALDP_PARAMS_HPP_

#include <cmath>
#include <string>

#include "opaldp/error.hpp"

namespace opaldp {

// An (epsilon, delta) pair. Construction validates epsilon > 0 and
// 0 < delta < 1.
class PrivacyParams {
 public:
  PrivacyParams(double epsilon, double delta) : epsilon_(epsilon), delta_(delta) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw InvalidArgumentError("epsilon must be positive and finite, got " +
                                 std::to_string(epsilon));
    }
    if (!(delta > 0.0) || !(delta < 1.0)) {
      throw InvalidArgumentError("delta must lie in (0, 1), got " +
                                 std::to_string(delta));
    }
  }

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }

  friend bool operator==(const PrivacyParams&, const PrivacyParams&) = default;

 private:
  double epsilon_;
  double delta_;
};

}  // namespace opaldp

#endif  // OPALDP_PARAMS_HPP_
