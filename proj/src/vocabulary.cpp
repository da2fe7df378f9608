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

#include "phonovc/vocabulary.hpp"

#include <fstream>
#include <sstream>

#include "phonovc/error.hpp"

namespace phonovc {
namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  PHONOVC_CHECK(in.good(), IoError, "cannot open '", path, "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  PHONOVC_CHECK(out.good(), IoError, "cannot write '", path, "'");
  out << text;
}

// Parses "token id" lines and checks ids are dense and ordered.
std::vector<std::string> parse_table(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto space = line.find_last_of(' ');
    PHONOVC_CHECK(space != std::string::npos, IoError,
                  "malformed table line '", line, "'");
    const std::string token = line.substr(0, space);
    const int id = std::stoi(line.substr(space + 1));
    PHONOVC_CHECK(id == static_cast<int>(tokens.size()), IoError,
                  "table ids must be dense and ordered; got ", id,
                  " at position ", tokens.size());
    tokens.push_back(token);
  }
  return tokens;
}

}  // namespace

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
}

int Vocabulary::add(const std::string& token) {
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  const int id = size();
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
  return ids_.count(token) > 0;
}

const std::string& Vocabulary::token(int id) const {
  PHONOVC_CHECK(id >= 0 && id < size(), ConfigError, "token id ", id,
                " out of range");
  return tokens_[id];
}

std::string Vocabulary::serialize() const {
  std::ostringstream os;
  for (int i = 0; i < size(); ++i) os << tokens_[i] << ' ' << i << '\n';
  return os.str();
}

Vocabulary Vocabulary::deserialize(const std::string& text) {
  const auto tokens = parse_table(text);
  PHONOVC_CHECK(tokens.size() >= 2 && tokens[0] == "<pad>" &&
                    tokens[1] == "<unk>",
                IoError, "vocabulary must start with <pad> and <unk>");
  Vocabulary v;
  for (size_t i = 2; i < tokens.size(); ++i) v.add(tokens[i]);
  return v;
}

void Vocabulary::save(const std::string& path) const {
  write_text(path, serialize());
}

Vocabulary Vocabulary::load(const std::string& path) {
  return deserialize(read_text(path));
}

int SpeakerTable::add(const std::string& name) {
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  const int id = size();
  names_.push_back(name);
  ids_.emplace(name, id);
  return id;
}

int SpeakerTable::id(const std::string& name) const {
  auto it = ids_.find(name);
  PHONOVC_CHECK(it != ids_.end(), ConfigError, "unknown speaker '", name, "'");
  return it->second;
}

const std::string& SpeakerTable::name(int id) const {
  PHONOVC_CHECK(id >= 0 && id < size(), ConfigError, "unknown speaker id ", id);
  return names_[id];
}

std::string SpeakerTable::serialize() const {
  std::ostringstream os;
  for (int i = 0; i < size(); ++i) os << names_[i] << ' ' << i << '\n';
  return os.str();
}

SpeakerTable SpeakerTable::deserialize(const std::string& text) {
  SpeakerTable t;
  for (const auto& name : parse_table(text)) t.add(name);
  return t;
}

void SpeakerTable::save(const std::string& path) const {
  write_text(path, serialize());
}

SpeakerTable SpeakerTable::load(const std::string& path) {
  return deserialize(read_text(path));
}

}  // namespace phonovc
