#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jdsn {

enum class ErrorKind {
  ParameterDomain,
  BoundaryEvaluation,
  Model,
  Evaluation,
  SimulationDiverged,
  Quadrature,
  SingularInformation,
  Configuration,
  Study,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParameterDomain: return "parameter_domain";
    case ErrorKind::BoundaryEvaluation: return "boundary_evaluation";
    case ErrorKind::Model: return "model";
    case ErrorKind::Evaluation: return "evaluation";
    case ErrorKind::SimulationDiverged: return "simulation_diverged";
    case ErrorKind::Quadrature: return "quadrature";
    case ErrorKind::SingularInformation: return "singular_information";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Study: return "study";
  }
  return "unknown";
}

/// Base exception for every failure raised by the library. The kind lets
/// front-ends map failures onto exit codes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace jdsn
