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

#include "phonovc/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "phonovc/error.hpp"

namespace phonovc {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    PHONOVC_CHECK(eq != std::string::npos, ConfigError, "config line ", lineno,
                  ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    PHONOVC_CHECK(!key.empty(), ConfigError, "config line ", lineno,
                  ": empty key");
    c.values_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  PHONOVC_CHECK(in.good(), IoError, "cannot open config '", path, "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Config::serialize() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << '\n';
  return os.str();
}

void Config::save(const std::string& path) const {
  std::ofstream out(path);
  PHONOVC_CHECK(out.good(), IoError, "cannot write config '", path, "'");
  out << serialize();
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

void Config::set(const std::string& key, double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  values_[key] = std::string(buf, res.ptr);
}

void Config::set(const std::string& key, int value) {
  values_[key] = std::to_string(value);
}

void Config::set(const std::string& key, bool value) {
  values_[key] = value ? "true" : "false";
}

void Config::set(const std::string& key, const std::vector<int>& value) {
  std::string s;
  for (size_t i = 0; i < value.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(value[i]);
  }
  values_[key] = s;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = 0.0;
  const auto& s = it->second;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  PHONOVC_CHECK(res.ec == std::errc() && res.ptr == s.data() + s.size(),
                ConfigError, "config key '", key, "': '", s,
                "' is not a number");
  return v;
}

int Config::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  int v = 0;
  const auto& s = it->second;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  PHONOVC_CHECK(res.ec == std::errc() && res.ptr == s.data() + s.size(),
                ConfigError, "config key '", key, "': '", s,
                "' is not an integer");
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto& s = it->second;
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw ConfigError(detail::concat("config key '", key, "': '", s,
                                   "' is not a boolean"));
}

std::vector<int> Config::get_ints(const std::string& key,
                                  const std::vector<int>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<int> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    int v = 0;
    auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    PHONOVC_CHECK(res.ec == std::errc() && res.ptr == item.data() + item.size(),
                  ConfigError, "config key '", key, "': '", item,
                  "' is not an integer");
    out.push_back(v);
  }
  return out;
}

void Config::merge(const Config& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

}  // namespace phonovc
