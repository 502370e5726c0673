// Copyright 2026 The mmrl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MMRL_STABLE_JSON_H_
#define MMRL_STABLE_JSON_H_

#include <string>

#include "json.hpp"

namespace mmrl {

// Formats a floating-point value with `digits` significant digits ("%.*g").
// Non-finite values have no JSON spelling and become null.
std::string FormatNumber(double v, int digits = 6);

// Serializes with sorted keys and fixed-precision floats so that equal
// documents produce identical bytes. `indent` < 0 yields a single line.
std::string DumpStable(const nlohmann::json& j, int indent = 2, int digits = 6);

}  // namespace mmrl

#endif  // MMRL_STABLE_JSON_H_
