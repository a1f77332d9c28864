#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vpfit {

enum class ErrorKind {
  InvalidSpec,
  InvalidArgument,
  OutOfDomain,
  DimensionMismatch,
  RankDeficient,
  InsufficientData,
  NonUniformSampling,
  NoPeriodicity,
  CostEvaluation,
  NoInteriorMinimum,
  Io,
  Parse,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSpec: return "invalid-spec";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::OutOfDomain: return "out-of-domain";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::RankDeficient: return "rank-deficient";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::NonUniformSampling: return "non-uniform-sampling";
    case ErrorKind::NoPeriodicity: return "no-periodicity";
    case ErrorKind::CostEvaluation: return "cost-evaluation";
    case ErrorKind::NoInteriorMinimum: return "no-interior-minimum";
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
  }
  return "unknown";
}

/// Single exception type for the library. `kind()` is stable and meant for
/// dispatch; `what()` is a human-readable message that may carry a
/// "[stage] " prefix when raised from inside the fitting pipeline.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Copy of this error tagged with a pipeline stage. The innermost stage wins.
  Error with_stage(std::string_view stage) const {
    if (!stage_.empty()) return *this;
    Error tagged(kind_, "[" + std::string(stage) + "] " + detail_);
    tagged.stage_ = std::string(stage);
    return tagged;
  }

 private:
  ErrorKind kind_;
  std::string detail_;
  std::string stage_;
};

}  // namespace vpfit
