#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qlim {

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using CMatrix = ComplexMatrix<double>;
using CVector = ComplexVector<double>;

// Exit status 2 at the command line.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateGeometryError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class PreconditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonIdentifiableError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Exit status 3 at the command line.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qlim
