// Copyright 2026 The xlir Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef XLIR_KV_CONFIG_H_
#define XLIR_KV_CONFIG_H_

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace xlir {

// Flat key=value configuration. Blank lines and lines starting with '#' are
// ignored; whitespace around keys and values is trimmed.
class KeyValues {
 public:
  KeyValues() = default;

  static KeyValues parse(const std::string& text,
                         const std::string& source = "<string>");
  static KeyValues load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  void set(const std::string& key, std::string value) {
    values_[key] = std::move(value);
  }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated doubles, e.g. "0.2,0.7".
  std::vector<double> get_doubles(const std::string& key,
                                  std::vector<double> fallback) const;
  // "lo,hi" or "lo-hi".
  std::pair<int, int> get_range(const std::string& key,
                                std::pair<int, int> fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::string source_ = "<string>";
};

// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

}  // namespace xlir

#endif  // XLIR_KV_CONFIG_H_
