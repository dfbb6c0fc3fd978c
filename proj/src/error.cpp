#include "birkhoff/error.hpp"

namespace birkhoff {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::InfeasibleState: return "infeasible state";
    case ErrorKind::BoundaryPoint: return "boundary point";
    case ErrorKind::DegenerateInterval: return "degenerate interval";
    case ErrorKind::NotDoublyStochastic: return "not doubly stochastic";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

}  // namespace birkhoff
