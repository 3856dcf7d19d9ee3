#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>

namespace sisdecay {

using Scalar = double;
using Index = Eigen::Index;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMat = Eigen::SparseMatrix<Scalar>;
using Triplet = Eigen::Triplet<Scalar>;

/// Bad or malformed input (files, edge lists, rate vectors).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure (non-convergence, degenerate fit).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Refusal by a size/memory guard.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sisdecay
