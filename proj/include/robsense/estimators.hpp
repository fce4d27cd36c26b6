#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "robsense/ces.hpp"
#include "robsense/matrix.hpp"

namespace robsense {

enum class EstimatorKind { SCM, Tyler, StudentT_ML, GG_ML };

inline std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::SCM: return "scm";
    case EstimatorKind::Tyler: return "tyler";
    case EstimatorKind::StudentT_ML: return "tml";
    case EstimatorKind::GG_ML: return "ggml";
  }
  return "unknown";
}

/**
 * Weight u(d) of an M-estimator of scatter, d = xᴴΣ⁻¹x.
 *
 *   SCM          u(d) = 1
 *   Tyler        u(d) = p/d
 *   Student-t ML u(d) = (2p + ν)/(ν + 2d)        (ν = 0 gives Tyler's weight)
 *   GG ML        u(d) = (s/b)·d^{s−1},  b = [pΓ(p/s)/Γ((p+1)/s)]^s
 */
class WeightFunction {
 public:
  static WeightFunction scm(Index p) { return WeightFunction(EstimatorKind::SCM, p, 0.0, 1.0); }
  static WeightFunction tyler(Index p) { return WeightFunction(EstimatorKind::Tyler, p, 0.0, 1.0); }
  static WeightFunction student_t(Index p, double nu) {
    if (!(nu >= 0.0) || !std::isfinite(nu)) throw InvalidArgument("t-ML weight needs nu >= 0");
    return WeightFunction(EstimatorKind::StudentT_ML, p, nu, 1.0);
  }
  static WeightFunction generalized_gaussian(Index p, double s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("GG-ML weight needs s > 0");
    return WeightFunction(EstimatorKind::GG_ML, p, 0.0, s);
  }

  double operator()(double d) const {
    switch (kind_) {
      case EstimatorKind::SCM: return 1.0;
      case EstimatorKind::Tyler: return pd_ / d;
      case EstimatorKind::StudentT_ML: return (2.0 * pd_ + nu_) / (nu_ + 2.0 * d);
      case EstimatorKind::GG_ML: return std::exp(log_s_over_b_ + (s_ - 1.0) * std::log(d));
    }
    return 1.0;
  }

  EstimatorKind kind() const noexcept { return kind_; }
  Index dim() const noexcept { return p_; }
  double nu() const noexcept { return nu_; }
  double s() const noexcept { return s_; }
  double b() const { return gg_scale_b(p_, s_); }

 private:
  WeightFunction(EstimatorKind kind, Index p, double nu, double s) : kind_(kind), p_(p), nu_(nu), s_(s) {
    if (p < 1) throw InvalidDimension("weight dimension must be >= 1");
    pd_ = static_cast<double>(p);
    if (kind == EstimatorKind::GG_ML) log_s_over_b_ = std::log(s) - gg_log_scale_b(p, s);
  }

  EstimatorKind kind_;
  Index p_;
  double pd_ = 1.0;
  double nu_;
  double s_;
  double log_s_over_b_ = 0.0;
};

enum class MatrixNorm { Frobenius, Spectral };

struct FixedPointOptions {
  double epsilon = 1e-6;
  int max_iterations = 200;
  MatrixNorm norm = MatrixNorm::Frobenius;
  std::optional<double> alpha;             // Tyler trace target; defaults to p
  std::optional<ScatterMatrix> initial;    // defaults to the identity

  void validate() const {
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
    if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
    if (alpha && !(*alpha > 0.0)) throw InvalidArgument("alpha must be > 0");
  }
};

struct FixedPointResult {
  ScatterMatrix estimate;
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
};

/// Sample covariance (1/n)·X·Xᴴ.
inline ScatterMatrix scm(const SampleMatrix& X) {
  const CMatrix& x = X.matrix();
  CMatrix s = x * x.adjoint();
  s /= static_cast<double>(X.count());
  return ScatterMatrix(s);
}

namespace detail {

inline double matrix_norm(const CMatrix& a, MatrixNorm norm) {
  if (norm == MatrixNorm::Frobenius) return a.norm();
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

inline void checked_cholesky(const CMatrix& sigma, Eigen::LLT<CMatrix>& llt) {
  constexpr double kMaxCondition = 1e14;
  llt.compute(sigma);
  if (llt.info() != Eigen::Success) throw ConvergenceError("iterate lost positive definiteness");
  const Eigen::VectorXd diag = llt.matrixLLT().diagonal().real().cwiseAbs();
  const double ratio = diag.maxCoeff() / diag.minCoeff();
  if (!(ratio * ratio <= kMaxCondition)) throw ConvergenceError("iterate is numerically singular");
}

// Scratch buffers reused across iterations of one fixed-point solve.
struct IterationWorkspace {
  CMatrix l_inv, next, ratio;
  Eigen::RowVectorXd d;
};

// (1/n) Σ u(dᵢ) xᵢxᵢᴴ with dᵢ = xᵢᴴΣ⁻¹xᵢ = ‖L⁻¹xᵢ‖², given the Cholesky
// factor L of Σ.  Written with explicit real arithmetic: for p ≈ 5 the
// generic complex GEMM and std::complex operator* cost several times more.
inline void weighted_scatter(const CMatrix& x, const Eigen::LLT<CMatrix>& llt, const WeightFunction& u,
                             IterationWorkspace& ws) {
  const Index p = x.rows();
  const Index n = x.cols();
  ws.l_inv.setIdentity(p, p);
  llt.matrixL().solveInPlace(ws.l_inv);
  ws.d.resize(n);
  ws.next.setZero(p, p);
  const Complex* li = ws.l_inv.data();
  Complex* acc = ws.next.data();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Index j = 0; j < n; ++j) {
    const Complex* xj = x.data() + j * p;
    double d = 0.0;
    for (Index r = 0; r < p; ++r) {
      double re = 0.0, im = 0.0;
      for (Index c = 0; c <= r; ++c) {
        const Complex a = li[c * p + r];
        const Complex b = xj[c];
        re += a.real() * b.real() - a.imag() * b.imag();
        im += a.real() * b.imag() + a.imag() * b.real();
      }
      d += re * re + im * im;
    }
    ws.d(j) = d;
    const double w = u(d) * inv_n;
    // lower triangle of w·xⱼxⱼᴴ
    for (Index c = 0; c < p; ++c) {
      const double bre = w * xj[c].real();
      const double bim = -w * xj[c].imag();
      for (Index r = c; r < p; ++r) {
        const Complex a = xj[r];
        acc[c * p + r] += Complex(a.real() * bre - a.imag() * bim, a.real() * bim + a.imag() * bre);
      }
    }
  }
  for (Index c = 0; c < p; ++c) {
    acc[c * p + c].imag(0.0);
    for (Index r = c + 1; r < p; ++r) acc[r * p + c] = std::conj(acc[c * p + r]);
  }
}

inline CMatrix weighted_scatter(const CMatrix& x, const Eigen::LLT<CMatrix>& llt, const WeightFunction& u) {
  IterationWorkspace ws;
  weighted_scatter(x, llt, u, ws);
  return ws.next;
}

inline void normalize_trace(CMatrix& m, double alpha) { m *= alpha / m.diagonal().real().sum(); }

}  // namespace detail

/// One application of the fixed-point map, without Tyler's trace step.
inline CMatrix fixed_point_step(const SampleMatrix& X, const ScatterMatrix& sigma, const WeightFunction& u) {
  if (X.dim() != sigma.dim() || u.dim() != X.dim()) throw InvalidDimension("dimension mismatch");
  Eigen::LLT<CMatrix> llt(sigma.matrix());
  if (llt.info() != Eigen::Success) throw DecompositionError("scatter matrix is not positive definite");
  return detail::weighted_scatter(X.matrix(), llt, u);
}

/**
 * Solves Σ = (1/n) Σᵢ u(xᵢᴴΣ⁻¹xᵢ) xᵢxᵢᴴ by direct iteration.
 *
 * Stops when ‖I − Σₘ₋₁⁻¹Σₘ‖ < ε.  Tyler iterates are rescaled to trace α
 * after every step.  Hitting max_iterations returns converged = false;
 * a singular iterate (condition above 1e14) throws ConvergenceError.
 */
inline FixedPointResult m_estimate(const SampleMatrix& X, const WeightFunction& u,
                                   const FixedPointOptions& opts = {}) {
  opts.validate();
  const Index p = X.dim();
  const Index n = X.count();
  if (u.dim() != p) throw InvalidDimension("weight dimension does not match data");

  // u ≡ 1 makes the map constant: the first step is the fixed point.
  if (u.kind() == EstimatorKind::SCM) return FixedPointResult{scm(X), 1, 0.0, true};

  if (n <= p) throw PreconditionError("M-estimation of scatter requires n > p");

  const bool is_tyler = u.kind() == EstimatorKind::Tyler;
  const double alpha = opts.alpha.value_or(static_cast<double>(p));

  CMatrix sigma = opts.initial ? opts.initial->matrix() : CMatrix::Identity(p, p);
  if (sigma.rows() != p) throw InvalidDimension("initial iterate has the wrong dimension");
  if (is_tyler) detail::normalize_trace(sigma, alpha);

  detail::IterationWorkspace ws;
  Eigen::LLT<CMatrix> llt(p);
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  bool converged = false;
  while (it < opts.max_iterations) {
    detail::checked_cholesky(sigma, llt);
    detail::weighted_scatter(X.matrix(), llt, u, ws);
    if (is_tyler) detail::normalize_trace(ws.next, alpha);
    // Σₘ⁻¹Σₘ₊₁ = L⁻ᴴ(L⁻¹Σₘ₊₁)
    ws.ratio = ws.next;
    llt.solveInPlace(ws.ratio);
    ws.ratio.diagonal().array() -= 1.0;
    residual = detail::matrix_norm(ws.ratio, opts.norm);
    sigma.swap(ws.next);
    ++it;
    if (!std::isfinite(residual)) throw ConvergenceError("non-finite residual");
    if (residual < opts.epsilon) {
      converged = true;
      break;
    }
  }
  detail::checked_cholesky(sigma, llt);
  return FixedPointResult{ScatterMatrix(sigma), it, residual, converged};
}

/// Tyler's M-estimator, normalized to trace α (default p).
inline FixedPointResult tyler_estimate(const SampleMatrix& X, const FixedPointOptions& opts = {}) {
  return m_estimate(X, WeightFunction::tyler(X.dim()), opts);
}

/**
 * ‖Σ̂ − F(Σ̂)‖_F / ‖Σ̂‖_F where F is the fixed-point map.  For Tyler's weight
 * F(Σ̂) is rescaled to trace α first; α defaults to trace(Σ̂).
 */
inline double fixed_point_residual(const ScatterMatrix& sigma_hat, const SampleMatrix& X, const WeightFunction& u,
                                   std::optional<double> alpha = std::nullopt) {
  CMatrix rhs = fixed_point_step(X, sigma_hat, u);
  if (u.kind() == EstimatorKind::Tyler) detail::normalize_trace(rhs, alpha.value_or(sigma_hat.trace()));
  return (sigma_hat.matrix() - rhs).norm() / sigma_hat.matrix().norm();
}

}  // namespace robsense
