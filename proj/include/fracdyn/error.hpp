#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fracdyn {

// Bad shapes, out-of-range indices, invalid configuration.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A decomposition or iterative solver failed to produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Signal carries no information (constant channel, zero variance).
class DegenerateSignalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LassoNonConvergence : public NumericalError {
 public:
  LassoNonConvergence(const std::string& what, Eigen::VectorXd last_iterate,
                      double optimality_residual,
                      std::optional<std::size_t> time_index = std::nullopt)
      : NumericalError(what),
        last_iterate_(std::move(last_iterate)),
        optimality_residual_(optimality_residual),
        time_index_(time_index) {}

  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }
  double optimality_residual() const { return optimality_residual_; }
  // Set when the failing solve belongs to one time step of an E-step.
  std::optional<std::size_t> time_index() const { return time_index_; }

 private:
  Eigen::VectorXd last_iterate_;
  double optimality_residual_;
  std::optional<std::size_t> time_index_;
};

// File or text parse failure. Line numbers are 1-based; 0 means "whole file".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")"
                                : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace fracdyn
