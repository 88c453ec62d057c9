#pragma once

#include <stdexcept>
#include <string>

namespace tbq {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes, lattices or wavepackets that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid element settings, grids, configs.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// A state whose norm dropped to zero (e.g. shifted out of the lattice).
class AnnihilatedStateError : public Error {
 public:
  AnnihilatedStateError() : Error("state annihilated") {}
};

/// Optimizer or decomposition failures; carries the best objective reached.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double best_objective)
      : Error(what), best_objective_(best_objective) {}
  double best_objective() const noexcept { return best_objective_; }

 private:
  double best_objective_;
};

}  // namespace tbq
