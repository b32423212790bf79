// Copyright 2026 the rarebound authors
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

namespace rarebound {

/// Failure families; the value doubles as the CLI process exit status.
enum class ErrorKind : int {
  precondition = 2,
  budget = 3,
  numerical = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define RAREBOUND_DEFINE_ERROR(NAME, KIND)                  \
  struct NAME : Error {                                     \
    explicit NAME(const std::string& msg)                   \
        : Error(ErrorKind::KIND, std::string(#NAME ": ") + msg) {} \
  }

RAREBOUND_DEFINE_ERROR(PreconditionError, precondition);
RAREBOUND_DEFINE_ERROR(DomainViolation, precondition);
RAREBOUND_DEFINE_ERROR(BudgetExhausted, budget);
RAREBOUND_DEFINE_ERROR(EvalFailure, numerical);
RAREBOUND_DEFINE_ERROR(SingularCovariance, numerical);
RAREBOUND_DEFINE_ERROR(RankDeficientTrend, numerical);
RAREBOUND_DEFINE_ERROR(DegenerateLeaveOut, numerical);
RAREBOUND_DEFINE_ERROR(DegenerateModel, numerical);
RAREBOUND_DEFINE_ERROR(RepairFailure, numerical);
RAREBOUND_DEFINE_ERROR(TieFailure, numerical);
RAREBOUND_DEFINE_ERROR(InfeasibleTarget, numerical);
RAREBOUND_DEFINE_ERROR(RejectionStall, numerical);
RAREBOUND_DEFINE_ERROR(NoCrossing, numerical);
RAREBOUND_DEFINE_ERROR(IoError, numerical);

#undef RAREBOUND_DEFINE_ERROR

// Process-level evaluator failures; both are a kind of EvalFailure so that
// callers catching EvalFailure also see adapter problems.
struct ProcessFailure : EvalFailure {
  explicit ProcessFailure(const std::string& msg)
      : EvalFailure("ProcessFailure: " + msg) {}
};
struct Timeout : EvalFailure {
  explicit Timeout(const std::string& msg)
      : EvalFailure("Timeout: " + msg) {}
};

}  // namespace rarebound
