#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ubkde {

enum class ErrorKind {
  dimension,
  domain,
  config,
  usage,
  accuracy,
  model_inconsistency,
  invariant_violation,
  window_not_valid,
  degenerate_region,
  io
};

const char* to_string(ErrorKind kind);

/// Process exit status for an error surfaced by the CLI:
/// 2 for usage/configuration problems, 3 for numerical or IO failures.
int exit_code_for(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Two quadrature resolutions disagreed by more than the allowed tolerance.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double coarse, double fine)
      : Error(ErrorKind::accuracy, what), coarse_(coarse), fine_(fine) {}

  double coarse() const noexcept { return coarse_; }
  double fine() const noexcept { return fine_; }

 private:
  double coarse_;
  double fine_;
};

/// An invariant failed at a concrete point; the point is carried along.
class InvariantViolation : public Error {
 public:
  InvariantViolation(const std::string& what, std::vector<double> witness)
      : Error(ErrorKind::invariant_violation, what),
        witness_(std::move(witness)) {}

  const std::vector<double>& witness() const noexcept { return witness_; }

 private:
  std::vector<double> witness_;
};

class WindowNotValid : public Error {
 public:
  WindowNotValid(const std::string& what, std::size_t n_min)
      : Error(ErrorKind::window_not_valid, what), n_min_(n_min) {}

  std::size_t n_min() const noexcept { return n_min_; }

 private:
  std::size_t n_min_;
};

}  // namespace ubkde
