#include "mkslab/error.hpp"

namespace mkslab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::IntegrationFailure: return "integration-failure";
    case ErrorCode::NoConvergence: return "no-convergence";
    case ErrorCode::SingularJacobian: return "singular-jacobian";
    case ErrorCode::EigFailure: return "eig-failure";
    case ErrorCode::ShootingFailure: return "shooting-failure";
    case ErrorCode::CollocationFailure: return "collocation-failure";
    case ErrorCode::DegenerateEquilibrium: return "degenerate-equilibrium";
    case ErrorCode::ContinuationTerminated: return "continuation-terminated";
    case ErrorCode::BracketMissing: return "bracket-missing";
    case ErrorCode::BoundInapplicable: return "bound-inapplicable";
    case ErrorCode::SplittingFailure: return "splitting-failure";
    case ErrorCode::ContourDegenerate: return "contour-degenerate";
    case ErrorCode::WeightInadmissible: return "weight-inadmissible";
    case ErrorCode::EvolutionFailure: return "evolution-failure";
    case ErrorCode::TruncationTooTight: return "truncation-too-tight";
    case ErrorCode::IncompatibleSegments: return "incompatible-segments";
    case ErrorCode::IncompatibleWrap: return "incompatible-wrap";
    case ErrorCode::TruncationInsufficient: return "truncation-insufficient";
    case ErrorCode::RefinementFailure: return "refinement-failure";
    case ErrorCode::PlotEmpty: return "plot-empty";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::IoError: return "io-error";
  }
  return "unknown";
}

}  // namespace mkslab
