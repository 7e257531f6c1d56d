#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace imlike {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Observed data: one row per observation, one column per variable.
using Data = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument: non-PD covariance, alpha outside [0,1], nonpositive sigma...
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Parameter outside the model's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Data for which the model's inference is undefined (e.g. zero resultant length).
class DegenerateData : public Error {
 public:
  using Error::Error;
};

// Iterative method failed to converge. Carries the last iterate when meaningful.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, Vector last = {}) : Error(what), last_(std::move(last)) {}
  const Vector& last_iterate() const { return last_; }

 private:
  Vector last_;
};

// Malformed or missing dataset.
class DatasetError : public Error {
 public:
  using Error::Error;
};

}  // namespace imlike
