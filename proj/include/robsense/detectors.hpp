#pragma once

#include <compare>
#include <optional>
#include <string>

#include <Eigen/Eigenvalues>

#include "robsense/estimators.hpp"

namespace robsense {

enum class Statistic { RLRT, GLRT };

inline std::string to_string(Statistic s) { return s == Statistic::RLRT ? "rlrt" : "glrt"; }

/// Which statistic is computed from which scatter estimate.
struct DetectorSpec {
  Statistic statistic = Statistic::GLRT;
  EstimatorKind estimator = EstimatorKind::SCM;
  double sigma2 = 1.0;  // used by RLRT only
  double dof_nu = 3.0;  // used by the t-ML estimator only

  void validate() const {
    if (statistic == Statistic::RLRT && !(sigma2 > 0.0)) throw InvalidArgument("RLRT requires sigma2 > 0");
    if (estimator == EstimatorKind::StudentT_ML && !(dof_nu >= 0.0))
      throw InvalidArgument("t-ML detector requires nu >= 0");
  }

  /// Stable identifier such as "tyler-glrt"; used in file names and CSV rows.
  std::string name() const { return to_string(estimator) + "-" + to_string(statistic); }

  auto operator<=>(const DetectorSpec&) const = default;
};

/// Parses "scm-rlrt", "tyler-glrt", "tml-glrt", "ggml-rlrt", ...
inline std::optional<DetectorSpec> parse_detector(const std::string& name) {
  const auto dash = name.rfind('-');
  if (dash == std::string::npos) return std::nullopt;
  const std::string est = name.substr(0, dash);
  const std::string stat = name.substr(dash + 1);
  DetectorSpec spec;
  if (stat == "rlrt") spec.statistic = Statistic::RLRT;
  else if (stat == "glrt") spec.statistic = Statistic::GLRT;
  else return std::nullopt;
  if (est == "scm") spec.estimator = EstimatorKind::SCM;
  else if (est == "tyler") spec.estimator = EstimatorKind::Tyler;
  else if (est == "tml") spec.estimator = EstimatorKind::StudentT_ML;
  else if (est == "ggml") spec.estimator = EstimatorKind::GG_ML;
  else return std::nullopt;
  return spec;
}

struct TestStatisticValue {
  double value = 0.0;
  DetectorSpec spec;
};

enum class Decision { H0, H1 };

/// λ₁ via a full Hermitian eigendecomposition (p is small).
inline double largest_eigenvalue(const CMatrix& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1) throw InvalidDimension("matrix must be square");
  if (hermitian_defect(sigma) > ScatterMatrix::kHermitianTolerance)
    throw InvalidArgument("largest_eigenvalue needs a Hermitian matrix");
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(sigma, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw DecompositionError("Hermitian eigensolver failed");
  return eig.eigenvalues().maxCoeff();
}

inline double largest_eigenvalue(const ScatterMatrix& sigma) { return largest_eigenvalue(sigma.matrix()); }

/// Roy's largest root test λ₁/σ².
inline TestStatisticValue rlrt(const ScatterMatrix& sigma_hat, double sigma2,
                               EstimatorKind source = EstimatorKind::SCM) {
  if (!(sigma2 > 0.0)) throw InvalidArgument("RLRT requires sigma2 > 0");
  DetectorSpec spec{Statistic::RLRT, source, sigma2};
  return {largest_eigenvalue(sigma_hat) / sigma2, spec};
}

/// Generalized likelihood ratio statistic λ₁ / (tr(Σ̂)/p).
inline TestStatisticValue glrt(const ScatterMatrix& sigma_hat, EstimatorKind source = EstimatorKind::SCM) {
  const double tr = sigma_hat.trace();
  if (!(tr > 0.0)) throw InvalidArgument("GLRT requires a positive trace");
  DetectorSpec spec{Statistic::GLRT, source};
  return {largest_eigenvalue(sigma_hat) / (tr / static_cast<double>(sigma_hat.dim())), spec};
}

/// Evaluates `spec`'s statistic on an estimate produced by spec.estimator.
inline TestStatisticValue evaluate(const DetectorSpec& spec, const ScatterMatrix& sigma_hat) {
  TestStatisticValue t = spec.statistic == Statistic::RLRT ? rlrt(sigma_hat, spec.sigma2, spec.estimator)
                                                           : glrt(sigma_hat, spec.estimator);
  t.spec = spec;
  return t;
}

/// H1 iff T > t; ties go to H0.
inline Decision decide(const TestStatisticValue& stat, double threshold) {
  return stat.value > threshold ? Decision::H1 : Decision::H0;
}

}  // namespace robsense
