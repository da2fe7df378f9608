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

#ifndef PHONOVC_ERROR_HPP_
#define PHONOVC_ERROR_HPP_

#include <sstream>
#include <stdexcept>
#include <string>

namespace phonovc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes or sequence lengths that do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Durations that cannot be reconciled with the frame count.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

class ExtractionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A training loss went NaN/Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

namespace detail {

template <typename... Args>
std::string concat(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

}  // namespace detail

#define PHONOVC_CHECK(cond, ErrorType, ...)                         \
  do {                                                              \
    if (!(cond)) throw ErrorType(::phonovc::detail::concat(__VA_ARGS__)); \
  } while (0)

}  // namespace phonovc

#endif  // PHONOVC_ERROR_HPP_
