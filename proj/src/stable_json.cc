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

#include "mmrl/stable_json.h"

#include <cmath>
#include <cstdio>

namespace mmrl {
namespace {

void Dump(const nlohmann::json& j, int indent, int digits, int depth, std::string& out) {
  const bool pretty = indent >= 0;
  auto newline = [&](int d) {
    if (!pretty) return;
    out += '\n';
    out.append(static_cast<std::size_t>(d * indent), ' ');
  };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      // nlohmann's default object type is std::map, so items are key-sorted.
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += nlohmann::json(key).dump();
        out += pretty ? ": " : ":";
        Dump(value, indent, digits, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) out += ',';
        newline(depth + 1);
        Dump(j[i], indent, digits, depth + 1, out);
      }
      newline(depth);
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float:
      out += FormatNumber(j.get<double>(), digits);
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string FormatNumber(double v, int digits) {
  if (!std::isfinite(v)) return "null";
  if (v == 0) return "0";  // folds -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

std::string DumpStable(const nlohmann::json& j, int indent, int digits) {
  std::string out;
  Dump(j, indent, digits, 0, out);
  return out;
}

}  // namespace mmrl
