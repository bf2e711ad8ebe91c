// Copyright 2026 The lexsum Authors.
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

#ifndef LEXSUM_ERROR_H_
#define LEXSUM_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lexsum {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates an operation's precondition.
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// A file or directory could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Loading finished without a single valid sample.
class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};

/// Not enough values for a statistic (e.g. KDE with one point).
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// The scorer could not be reached or kept failing; carries the attempt count.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, std::size_t attempts)
      : Error(what), attempts_(attempts) {}
  std::size_t attempts() const { return attempts_; }

 private:
  std::size_t attempts_;
};

/// The scorer answered with something that does not follow the wire contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Scorer tokens could not be mapped onto word tokens / weight spans.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// One member of a scorer ensemble failed; the sample is not scored.
class PartialEnsembleError : public Error {
 public:
  PartialEnsembleError(const std::string& what, std::size_t scorer_index)
      : Error(what), scorer_index_(scorer_index) {}
  std::size_t scorer_index() const { return scorer_index_; }

 private:
  std::size_t scorer_index_;
};

/// A two-stage generation (back translation) failed; `stage()` names which.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : Error(stage + " stage: " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace lexsum

#endif  // LEXSUM_ERROR_H_
