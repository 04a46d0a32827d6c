// Copyright 2026 The byola-speaker Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BYOLA_ERRORS_H_
#define BYOLA_ERRORS_H_

#include <stdexcept>
#include <string>

namespace byola {

// Base class of every error raised by the library. The CLI maps these to
// exit code 2 (data error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class WavErrorKind {
  kMissingFile,
  kMalformedHeader,
  kUnsupportedEncoding,
  kUnwritable,
};

class WavError : public Error {
 public:
  WavError(WavErrorKind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  WavErrorKind kind() const { return kind_; }

 private:
  WavErrorKind kind_;
};

enum class CheckpointErrorKind {
  kIo,
  kBadMagic,
  kVersion,
  kTruncated,
  kChecksum,
  kMalformed,
};

class CheckpointError : public Error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

// Layer shape chain violations; the message names the offending layer.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Bad input data: degenerate power, too-short audio, empty corpora, ...
class DataError : public Error {
 public:
  using Error::Error;
};

// Raised when training produces a non-finite loss or gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace byola

#endif  // BYOLA_ERRORS_H_
