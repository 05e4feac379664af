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

#include "gpsindy/errors.hpp"

namespace gpsindy {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::UnsupportedRequest: return "unsupported-request";
    case ErrorKind::IllConditionedKernel: return "ill-conditioned-kernel";
    case ErrorKind::FitFailed: return "fit-failed";
    case ErrorKind::SingularSystem: return "singular-system";
    case ErrorKind::IntegrationFailed: return "integration-failed";
    case ErrorKind::SolverUnstable: return "solver-unstable";
    case ErrorKind::OutOfDomain: return "out-of-domain";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::ConfigError: return "config-error";
    case ErrorKind::Timeout: return "timeout";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace gpsindy
