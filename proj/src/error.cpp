#include "lagot/error.hpp"

namespace lagot {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidInput: return "invalid input";
    case ErrorCode::kConfig: return "configuration error";
    case ErrorCode::kConvergence: return "convergence failure";
    case ErrorCode::kMissingDependency: return "missing dependency";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kImbalance: return "imbalanced marginals";
    case ErrorCode::kSolver: return "solver failure";
    case ErrorCode::kIo: return "i/o error";
  }
  return "unknown";
}

}  // namespace lagot
