// Copyright 2026 The Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace deltr {

// Base class for every domain failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// A group-exposure quantity was requested on a list that lacks one group.
class EmptyGroupError : public Error {
 public:
  using Error::Error;
};

// FA*IR constraints cannot be met by the available protected candidates.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Gradient descent produced a non-finite loss, gradient or weight.
class TrainingAborted : public Error {
 public:
  using Error::Error;
};

}  // namespace deltr
