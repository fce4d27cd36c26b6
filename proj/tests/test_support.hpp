#pragma once

// Independent reference computations used as oracles by the tests.  None of
// these go through the library's samplers, estimators or eigensolver.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace robsense::test {

using Cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;

/// p×n matrix of i.i.d. CN(0, 1) entries drawn straight from std::normal_distribution.
inline Mat complex_gaussian(int p, int n, std::mt19937_64& gen) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  Mat m(p, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < p; ++i) m(i, j) = Cd(nd(gen), nd(gen));
  return m;
}

/// Hermitian positive definite matrix A·Aᴴ + shift·I.
inline Mat random_hpd(int p, std::mt19937_64& gen, double shift = 0.5) {
  const Mat a = complex_gaussian(p, p, gen);
  Mat m = a * a.adjoint();
  m.diagonal().array() += shift;
  return (m + m.adjoint()) * 0.5;
}

/// (1/n) Σ xxᴴ by explicit triple loop.
inline Mat brute_force_scm(const Mat& x) {
  const int p = static_cast<int>(x.rows());
  const int n = static_cast<int>(x.cols());
  Mat s = Mat::Zero(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      Cd acc = 0.0;
      for (int j = 0; j < n; ++j) acc += x(a, j) * std::conj(x(b, j));
      s(a, b) = acc / static_cast<double>(n);
    }
  return s;
}

/**
 * Eigenvalues of a Hermitian matrix via cyclic Jacobi rotations on its real
 * symmetric embedding [[Re, −Im], [Im, Re]] (each eigenvalue appears twice).
 * Returned in descending order, one copy of each.
 */
inline std::vector<double> jacobi_eigenvalues(const Mat& h) {
  const int p = static_cast<int>(h.rows());
  const int m = 2 * p;
  std::vector<double> a(m * m);
  auto at = [&](int r, int c) -> double& { return a[r * m + c]; };
  for (int r = 0; r < p; ++r)
    for (int c = 0; c < p; ++c) {
      at(r, c) = h(r, c).real();
      at(r + p, c + p) = h(r, c).real();
      at(r, c + p) = -h(r, c).imag();
      at(r + p, c) = h(r, c).imag();
    }
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int r = 0; r < m; ++r)
      for (int c = r + 1; c < m; ++c) off += at(r, c) * at(r, c);
    if (off < 1e-30) break;
    for (int k = 0; k < m; ++k)
      for (int l = k + 1; l < m; ++l) {
        if (std::abs(at(k, l)) < 1e-300) continue;
        const double theta = (at(l, l) - at(k, k)) / (2.0 * at(k, l));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int r = 0; r < m; ++r) {
          const double ark = at(r, k), arl = at(r, l);
          at(r, k) = c * ark - s * arl;
          at(r, l) = s * ark + c * arl;
        }
        for (int r = 0; r < m; ++r) {
          const double akr = at(k, r), alr = at(l, r);
          at(k, r) = c * akr - s * alr;
          at(l, r) = s * akr + c * alr;
        }
      }
  }
  std::vector<double> ev(m);
  for (int i = 0; i < m; ++i) ev[i] = at(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  std::vector<double> out;
  for (int i = 0; i < m; i += 2) out.push_back(0.5 * (ev[i] + ev[i + 1]));
  return out;
}

/// Random unitary matrix: Q factor of a complex Gaussian matrix via Gram–Schmidt.
inline Mat random_unitary(int p, std::mt19937_64& gen) {
  Mat q = complex_gaussian(p, p, gen);
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
    q.col(j) /= q.col(j).norm();
  }
  return q;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double standard_error(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

/// Mean of the radial law with density ∝ d^{p−1}·exp(−d^s/b), by trapezoidal
/// quadrature in log d (the integrand spans many decades when s is small).
inline double gg_radial_mean_quadrature(int p, double s, double b) {
  // integrand in y = ln d: exp(k·y − e^{s·y}/b) for k = p (mass) or p + 1 (first moment)
  auto log_integrand = [&](double y, double k) { return k * y - std::exp(s * y) / b; };
  // locate the mode of the first-moment integrand to centre the grid
  const double y_mode = std::log((p + 1.0) * b / s) / s;
  const double lo = y_mode - 400.0 / std::max(1.0, s * 10.0) - 60.0;
  const double hi = y_mode + 60.0 / s;
  const int steps = 400000;
  const double h = (hi - lo) / steps;
  const double ref = log_integrand(y_mode, p + 1.0);
  double mass = 0.0, moment = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double y = lo + h * i;
    const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
    mass += w * std::exp(log_integrand(y, p) - ref);
    moment += w * std::exp(log_integrand(y, p + 1.0) - ref);
  }
  return moment / mass;
}

}  // namespace robsense::test
