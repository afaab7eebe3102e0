#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mkslab {

enum class ErrorCode {
  InvalidArgument,
  IntegrationFailure,
  NoConvergence,
  SingularJacobian,
  EigFailure,
  ShootingFailure,
  CollocationFailure,
  DegenerateEquilibrium,
  ContinuationTerminated,
  BracketMissing,
  BoundInapplicable,
  SplittingFailure,
  ContourDegenerate,
  WeightInadmissible,
  EvolutionFailure,
  TruncationTooTight,
  IncompatibleSegments,
  IncompatibleWrap,
  TruncationInsufficient,
  RefinementFailure,
  PlotEmpty,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code; the CLI maps it onto its
/// error JSON and exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace mkslab
