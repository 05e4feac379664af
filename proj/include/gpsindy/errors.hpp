// Copyright 2026 The gpsindy Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GPSINDY_ERRORS_HPP
#define GPSINDY_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace gpsindy {

enum class ErrorKind {
  InvalidArgument,
  UnsupportedRequest,
  IllConditionedKernel,
  FitFailed,
  SingularSystem,
  IntegrationFailed,
  SolverUnstable,
  OutOfDomain,
  ParseError,
  ConfigError,
  Timeout,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace gpsindy

#endif  // GPSINDY_ERRORS_HPP
