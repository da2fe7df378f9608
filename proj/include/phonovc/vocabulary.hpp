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

#ifndef PHONOVC_VOCABULARY_HPP_
#define PHONOVC_VOCABULARY_HPP_

#include <map>
#include <string>
#include <vector>

namespace phonovc {

// Token <-> id table. Id 0 is padding and id 1 the unknown token; corpus
// tokens start at 2. On disk: one "token id" pair per line, UTF-8.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary();

  // Returns the id, inserting the token if it is new.
  int add(const std::string& token);
  // kUnk for unseen tokens.
  int id(const std::string& token) const;
  bool contains(const std::string& token) const;
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);
  // Same "token id" lines, in id order.
  std::string serialize() const;
  static Vocabulary deserialize(const std::string& text);

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> ids_;
};

// Speakers are a closed categorical set: no padding or unknown entries.
class SpeakerTable {
 public:
  int add(const std::string& name);
  // Throws ConfigError for an unknown speaker.
  int id(const std::string& name) const;
  bool contains(const std::string& name) const { return ids_.count(name) > 0; }
  const std::string& name(int id) const;
  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

  void save(const std::string& path) const;
  static SpeakerTable load(const std::string& path);
  std::string serialize() const;
  static SpeakerTable deserialize(const std::string& text);

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> ids_;
};

}  // namespace phonovc

#endif  // PHONOVC_VOCABULARY_HPP_
