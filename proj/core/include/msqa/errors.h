// Copyright 2026 The msqa Authors.
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

#ifndef MSQA_ERRORS_H_
#define MSQA_ERRORS_H_

#include <stdexcept>
#include <string>

namespace msqa {

// Root of every error thrown by the library. Callers that only care about
// "something went wrong" catch this; the subclasses name the failure class.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class StateError : public Error { using Error::Error; };
class InputError : public Error { using Error::Error; };
class DecodeError : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };
class LocalizationError : public Error { using Error::Error; };
class SplitError : public Error { using Error::Error; };
class EmptyRegionError : public Error { using Error::Error; };

}  // namespace msqa

#endif  // MSQA_ERRORS_H_
