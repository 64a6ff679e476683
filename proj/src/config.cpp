#include "sparsear/config.hpp"

namespace sparsear {

Solver solver_from_string(const std::string& name) {
  if (name == "nnsp") return Solver::nnsp;
  if (name == "mio") return Solver::mio;
  if (name == "mio-dvp") return Solver::mio_dvp;
  throw std::invalid_argument("unknown solver '" + name +
                              "' (expected nnsp, mio, or mio-dvp)");
}

std::string to_string(Solver s) {
  switch (s) {
    case Solver::nnsp:
      return "nnsp";
    case Solver::mio:
      return "mio";
    case Solver::mio_dvp:
      return "mio-dvp";
  }
  throw std::logic_error("unreachable solver value");
}

void ModelConfig::validate() const {
  if (order < 1) {
    throw std::invalid_argument("order must be >= 1, got " +
                                std::to_string(order));
  }
  if (sparsity < 1 || sparsity > order) {
    throw std::invalid_argument(
        "sparsity must lie in [1, order]: sparsity=" +
        std::to_string(sparsity) + ", order=" + std::to_string(order));
  }
  if (!(big_m > 0.0)) {
    throw std::invalid_argument("big-M bound must be positive");
  }
  if (solver == Solver::mio_dvp) {
    if (tau0 <= sparsity || tau0 > order) {
      throw std::invalid_argument(
          "mio-dvp needs sparsity < tau0 <= order: tau0=" +
          std::to_string(tau0) + ", sparsity=" + std::to_string(sparsity) +
          ", order=" + std::to_string(order));
    }
  }
  if (threads < 0) {
    throw std::invalid_argument("threads must be >= 0 (0 = all)");
  }
}

}  // namespace sparsear
