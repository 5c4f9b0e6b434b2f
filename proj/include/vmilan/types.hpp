#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vmilan {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A point outside dom(f1) was handed to an evaluation that needs f1 finite.
class InfeasiblePointError : public Error {
 public:
  using Error::Error;
};

/// The smooth term was evaluated outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class LinearSolveError : public Error {
 public:
  LinearSolveError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Inner dual solver ran out of iterations before the gap certificate held.
class InexactProxFailure : public Error {
 public:
  InexactProxFailure(const std::string& what, double last_gap)
      : Error(what), last_gap_(last_gap) {}
  double last_gap() const { return last_gap_; }

 private:
  double last_gap_;
};

}  // namespace vmilan
