// Copyright 2026 The dpvb Authors
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

#ifndef DPVB_ERRORS_HPP_
#define DPVB_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dpvb {

// std::domain_error is used directly for precondition violations.

class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what)
      : std::runtime_error(what) {}
};

class calibration_error : public std::runtime_error {
 public:
  explicit calibration_error(const std::string& what)
      : std::runtime_error(what) {}
};

class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, int line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace dpvb

#endif  // DPVB_ERRORS_HPP_
