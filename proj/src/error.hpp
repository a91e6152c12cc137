// Copyright 2026 The pulsekit authors
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

#ifndef PULSEKIT_ERROR_HPP_
#define PULSEKIT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace pulsekit {

// Error categories; mirrored one-to-one by the pk_status codes of the C API.
enum class ErrorCode {
  invalid_argument,
  signal_too_short,
  zero_norm,
  insufficient_beats,
  fps_mismatch,
  length_mismatch,
  io,
  bad_checkpoint,
  numeric,
  out_of_band,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace pulsekit

#endif  // PULSEKIT_ERROR_HPP_
