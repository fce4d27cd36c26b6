#pragma once

#include <complex>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "robsense/error.hpp"

namespace robsense {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Relative Hermitian defect ‖A − Aᴴ‖_F / ‖A‖_F (0 for the zero matrix).
inline double hermitian_defect(const CMatrix& a) {
  const double scale = a.norm();
  if (scale == 0.0) return 0.0;
  return (a - a.adjoint()).norm() / scale;
}

/**
 * Hermitian p×p matrix holding a scatter matrix or one of its estimates.
 *
 * Construction rejects non-square input and anything further than 1e−12
 * (relative Frobenius) from Hermitian, then stores the exact Hermitian part.
 * Positive definiteness is not enforced here, because the SCM of a rank
 * deficient sample is only semidefinite; operations that need PD check it.
 */
class ScatterMatrix {
 public:
  static constexpr double kHermitianTolerance = 1e-12;

  explicit ScatterMatrix(const CMatrix& m) {
    if (m.rows() != m.cols() || m.rows() < 1)
      throw InvalidDimension("scatter matrix must be square with p >= 1");
    if (!m.allFinite()) throw InvalidArgument("scatter matrix has non-finite entries");
    if (hermitian_defect(m) > kHermitianTolerance)
      throw InvalidArgument("scatter matrix is not Hermitian");
    m_ = (m + m.adjoint()) * 0.5;
  }

  static ScatterMatrix identity(Index p) {
    if (p < 1) throw InvalidDimension("dimension must be >= 1");
    return ScatterMatrix(CMatrix::Identity(p, p));
  }

  const CMatrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  double trace() const { return m_.diagonal().real().sum(); }

  bool is_positive_definite() const {
    Eigen::LLT<CMatrix> llt(m_);
    return llt.info() == Eigen::Success;
  }

  /// Lower Cholesky factor L with LLᴴ = Σ; throws DecompositionError if not PD.
  CMatrix cholesky_factor() const {
    Eigen::LLT<CMatrix> llt(m_);
    if (llt.info() != Eigen::Success)
      throw DecompositionError("scatter matrix is not positive definite");
    return llt.matrixL();
  }

  ScatterMatrix scaled(double c) const { return ScatterMatrix(m_ * c); }

 private:
  CMatrix m_;
};

/**
 * p×n matrix of received snapshots, one column per time instant.
 *
 * Every column must be nonzero; the Tyler weight p/d is undefined otherwise.
 */
class SampleMatrix {
 public:
  explicit SampleMatrix(CMatrix x) : x_(std::move(x)) {
    if (x_.rows() < 1 || x_.cols() < 1) throw InvalidDimension("sample matrix needs p >= 1 and n >= 1");
    if (!x_.allFinite()) throw InvalidArgument("sample matrix has non-finite entries");
    for (Index j = 0; j < x_.cols(); ++j) {
      if (x_.col(j).squaredNorm() == 0.0)
        throw InvalidArgument("sample matrix column " + std::to_string(j) + " is zero");
    }
  }

  const CMatrix& matrix() const noexcept { return x_; }
  Index dim() const noexcept { return x_.rows(); }
  Index count() const noexcept { return x_.cols(); }

 private:
  CMatrix x_;
};

}  // namespace robsense
