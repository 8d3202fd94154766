#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stratavg {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// State outside the validity domain of an equation of state.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

/// The pressure-equilibrium closure has no root in (0,1).
class ClosureError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "closure"; }
};

/// An iterative solver stopped without meeting its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_iterate, double best_residual)
      : Error(what), best_iterate_(best_iterate), best_residual_(best_residual) {}
  const char* kind() const noexcept override { return "convergence"; }
  double best_iterate() const noexcept { return best_iterate_; }
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_iterate_;
  double best_residual_;
};

/// Time step exceeds the stability bound; carries the admissible step.
class StepRejected : public Error {
 public:
  StepRejected(const std::string& what, double admissible_dt)
      : Error(what), admissible_dt_(admissible_dt) {}
  const char* kind() const noexcept override { return "step-rejected"; }
  double admissible_dt() const noexcept { return admissible_dt_; }

 private:
  double admissible_dt_;
};

/// A partial mass dropped below the positivity floor.
class PositivityError : public Error {
 public:
  PositivityError(const std::string& what, std::size_t cell) : Error(what), cell_(cell) {}
  const char* kind() const noexcept override { return "positivity"; }
  std::size_t cell() const noexcept { return cell_; }

 private:
  std::size_t cell_;
};

/// Degenerate layer geometry (thickness below the stratification band).
class GeometryError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "geometry"; }
};

/// The interface left the stratification band: the run is outside the model's regime.
class RegimeExitError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "regime-exit"; }
};

/// Invalid experiment configuration; `where` names the key and line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string where)
      : Error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
  const char* kind() const noexcept override { return "config"; }
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

}  // namespace stratavg
