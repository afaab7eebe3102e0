#pragma once

#include "mkslab/error.hpp"

namespace mkslab {

struct Tolerances {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_iter = 100;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_iter < 1) {
      fail(ErrorCode::InvalidArgument, "tolerances must be strictly positive");
    }
  }
};

}  // namespace mkslab
