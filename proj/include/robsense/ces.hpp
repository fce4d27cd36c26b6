#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "robsense/matrix.hpp"
#include "robsense/rng.hpp"

namespace robsense {

enum class NoiseFamily { Gaussian, GeneralizedGaussian, StudentT };

inline std::string to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::Gaussian: return "gaussian";
    case NoiseFamily::GeneralizedGaussian: return "generalized_gaussian";
    case NoiseFamily::StudentT: return "student_t";
  }
  return "unknown";
}

inline std::optional<NoiseFamily> parse_noise_family(const std::string& s) {
  if (s == "gaussian") return NoiseFamily::Gaussian;
  if (s == "generalized_gaussian" || s == "gg") return NoiseFamily::GeneralizedGaussian;
  if (s == "student_t" || s == "t") return NoiseFamily::StudentT;
  return std::nullopt;
}

/**
 * A member of the CES family together with its power.
 *
 * The texture is normalized so that E[xᴴx] = p·σ² at scatter = I; the
 * covariance of the noise is then σ²·I.  For the Student-t family that
 * normalization needs ν > 2; below that the raw ν/χ²_ν mixing is used and
 * covariance_defined() reports false.
 */
struct NoiseModel {
  NoiseFamily family = NoiseFamily::Gaussian;
  double shape_s = 1.0;  // generalized Gaussian only
  double dof_nu = 3.0;   // Student-t only
  double sigma2 = 1.0;

  static NoiseModel gaussian(double sigma2 = 1.0) { return {NoiseFamily::Gaussian, 1.0, 3.0, sigma2}; }
  static NoiseModel generalized_gaussian(double s, double sigma2 = 1.0) {
    return {NoiseFamily::GeneralizedGaussian, s, 3.0, sigma2};
  }
  static NoiseModel student_t(double nu = 3.0, double sigma2 = 1.0) {
    return {NoiseFamily::StudentT, 1.0, nu, sigma2};
  }

  void validate() const {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InvalidArgument("noise power sigma2 must be > 0");
    if (family == NoiseFamily::GeneralizedGaussian && !(shape_s > 0.0 && std::isfinite(shape_s)))
      throw InvalidArgument("generalized Gaussian shape s must be > 0");
    if (family == NoiseFamily::StudentT && !(dof_nu > 0.0 && std::isfinite(dof_nu)))
      throw InvalidArgument("Student-t degrees of freedom nu must be > 0");
  }

  bool covariance_defined() const { return family != NoiseFamily::StudentT || dof_nu > 2.0; }

  /// Non-fatal diagnostic for parameter choices that the samplers accept
  /// but that change the meaning of sigma2.
  std::optional<std::string> warning() const {
    if (!covariance_defined())
      return "Student-t with nu <= 2 has no covariance; sigma2 scales the scatter only";
    return std::nullopt;
  }
};

/// log b for the generalized Gaussian generator g(d) = exp(−d^s / b),
/// with b = [p Γ(p/s) / Γ((p+1)/s)]^s.
inline double gg_log_scale_b(Index p, double s) {
  const double pd = static_cast<double>(p);
  return s * (std::log(pd) + std::lgamma(pd / s) - std::lgamma((pd + 1.0) / s));
}

inline double gg_scale_b(Index p, double s) { return std::exp(gg_log_scale_b(p, s)); }

/// Uniform draw from the unit sphere of ℂᵖ (normalized standard complex normal).
template <class Rng>
CVector sample_complex_sphere(Index p, Rng& rng) {
  if (p < 1) throw InvalidDimension("sphere dimension must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector u(p);
  for (;;) {
    for (Index k = 0; k < p; ++k) {
      const double re = normal(rng);
      const double im = normal(rng);
      u(k) = Complex(re, im);
    }
    const double nrm = u.norm();
    if (nrm > 0.0) {
      u /= nrm;
      return u;
    }
  }
}

/**
 * Squared radius Q = xᴴΣ⁻¹x of a CES vector, scaled by σ².
 *
 *   Gaussian:             Q = σ²·G,                  G ~ Gamma(p, 1)
 *   generalized Gaussian: Q = σ²·(b·G)^{1/s},        G ~ Gamma(p/s, 1)
 *   Student-t (ν > 2):    Q = σ²·G·(ν − 2)/χ²_ν,     G ~ Gamma(p, 1)
 *   Student-t (ν ≤ 2):    Q = σ²·G·ν/χ²_ν
 */
template <class Rng>
double sample_texture(const NoiseModel& model, Index p, Rng& rng) {
  if (p < 1) throw InvalidDimension("dimension must be >= 1");
  model.validate();
  const double pd = static_cast<double>(p);
  switch (model.family) {
    case NoiseFamily::Gaussian: {
      std::gamma_distribution<double> gamma(pd, 1.0);
      return model.sigma2 * gamma(rng);
    }
    case NoiseFamily::GeneralizedGaussian: {
      const double s = model.shape_s;
      std::gamma_distribution<double> gamma(pd / s, 1.0);
      const double g = gamma(rng);
      // Evaluated in log space: for small s the power 1/s overflows quickly.
      return model.sigma2 * std::exp((gg_log_scale_b(p, s) + std::log(g)) / s);
    }
    case NoiseFamily::StudentT: {
      const double nu = model.dof_nu;
      std::gamma_distribution<double> gamma(pd, 1.0);
      std::chi_squared_distribution<double> chi2(nu);
      const double g = gamma(rng);
      const double c = chi2(rng);
      const double mix = model.covariance_defined() ? (nu - 2.0) / c : nu / c;
      return model.sigma2 * g * mix;
    }
  }
  throw InvalidArgument("unknown noise family");
}

/// n i.i.d. columns √Q·L·u, with L the Cholesky factor of `scatter`.
template <class Rng>
SampleMatrix sample_ces(const ScatterMatrix& scatter, const NoiseModel& model, Index n, Rng& rng) {
  if (n < 1) throw InvalidDimension("sample count must be >= 1");
  model.validate();
  const Index p = scatter.dim();
  const CMatrix L = scatter.cholesky_factor();
  CMatrix x(p, n);
  for (Index j = 0; j < n; ++j) {
    for (;;) {
      const CVector u = sample_complex_sphere(p, rng);
      const double q = sample_texture(model, p, rng);
      x.col(j) = std::sqrt(q) * (L * u);
      if (x.col(j).squaredNorm() > 0.0 && x.col(j).allFinite()) break;
    }
  }
  return SampleMatrix(std::move(x));
}

/// Fading channel of the rank-one signal model; ‖h‖² = ρ·p·σ².
struct ChannelVector {
  CVector h;
  double rho = 0.0;
  double sigma2 = 1.0;

  Index dim() const noexcept { return h.size(); }
};

/// Channel with uniformly random direction, rescaled to the exact SNR ρ.
template <class Rng>
ChannelVector make_channel(Index p, double rho, double sigma2, Rng& rng) {
  if (p < 1) throw InvalidDimension("channel dimension must be >= 1");
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw InvalidArgument("SNR rho must be >= 0");
  if (!(sigma2 > 0.0)) throw InvalidArgument("noise power sigma2 must be > 0");
  ChannelVector ch;
  ch.rho = rho;
  ch.sigma2 = sigma2;
  if (rho == 0.0) {
    ch.h = CVector::Zero(p);
    return ch;
  }
  const CVector u = sample_complex_sphere(p, rng);
  ch.h = u * (std::sqrt(rho * static_cast<double>(p) * sigma2) / u.norm());
  return ch;
}

/// A channel that carries no signal; used for H0 draws.
inline ChannelVector null_channel(Index p, double sigma2 = 1.0) {
  if (p < 1) throw InvalidDimension("channel dimension must be >= 1");
  return ChannelVector{CVector::Zero(p), 0.0, sigma2};
}

enum class Hypothesis { H0, H1 };

inline std::string to_string(Hypothesis h) { return h == Hypothesis::H0 ? "H0" : "H1"; }

/**
 * Received snapshots under either hypothesis:
 *   H0: x(i) = z(i)
 *   H1: x(i) = s(i)·h + z(i),  s(i) ~ CN(0, 1)
 * with z(i) CES noise of covariance σ²·I and h fixed over the n columns.
 */
template <class Rng>
SampleMatrix sample_hypothesis(const NoiseModel& model, const ChannelVector& channel, Hypothesis hypothesis,
                               Index n, Rng& rng) {
  const Index p = channel.dim();
  if (p < 1) throw InvalidDimension("channel dimension must be >= 1");
  SampleMatrix noise = sample_ces(ScatterMatrix::identity(p), model, n, rng);
  if (hypothesis == Hypothesis::H0) return noise;

  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CMatrix x = noise.matrix();
  for (Index j = 0; j < n; ++j) {
    const double re = normal(rng);
    const double im = normal(rng);
    x.col(j) += Complex(re, im) * channel.h;
  }
  return SampleMatrix(std::move(x));
}

}  // namespace robsense
