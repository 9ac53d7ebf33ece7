#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pilotwave {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs that do not fit the basis, grid or model they are used with.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Invalid parameters for a model or an operation.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// The actual configuration sits where the wave function carries no weight.
class SupportError : public Error {
 public:
  using Error::Error;
};

// |psi| fell below the node threshold where a velocity was requested.
class NodeError : public Error {
 public:
  using Error::Error;
};

// Schrodinger step whose norm defect could not be brought under tolerance.
class EvolutionError : public Error {
 public:
  using Error::Error;
};

// Aggregated scenario validation failure.
class ScenarioError : public Error {
 public:
  explicit ScenarioError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string out = "invalid scenario:";
    for (const auto& p : problems) {
      out += "\n  - ";
      out += p;
    }
    return out;
  }

  std::vector<std::string> problems_;
};

}  // namespace pilotwave
