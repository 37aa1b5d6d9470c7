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

#ifndef OPALDP_OPALDP_HPP_
#define OPALDP_OPALDP_HPP_

#include "opaldp/accountant.hpp"
#include "opaldp/auditor.hpp"
#include "opaldp/datagen.hpp"
#include "opaldp/dataset.hpp"
#include "opaldp/mechanisms.hpp"
#include "opaldp/preprocess.hpp"
#include "opaldp/release.hpp"
#include "opaldp/simulation.hpp"

#endif  // OPALDP_OPALDP_HPP_
