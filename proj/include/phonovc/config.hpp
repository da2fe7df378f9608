// Copyright 2026 The phonovc Authors
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

#ifndef PHONOVC_CONFIG_HPP_
#define PHONOVC_CONFIG_HPP_

#include <map>
#include <string>
#include <vector>

namespace phonovc {

// Flat "key = value" text; '#' starts a comment. Keys are dotted names such
// as "ssl.alpha". Typed getters throw ConfigError on malformed values.
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text);
  static Config load(const std::string& path);
  std::string serialize() const;
  void save(const std::string& path) const;

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, double value);
  void set(const std::string& key, int value);
  void set(const std::string& key, bool value);
  void set(const std::string& key, const std::vector<int>& value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated integers.
  std::vector<int> get_ints(const std::string& key,
                            const std::vector<int>& fallback) const;

  // Entries of `other` override entries here.
  void merge(const Config& other);
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace phonovc

#endif  // PHONOVC_CONFIG_HPP_
