#include "sbc/kernels.hpp"

#include <cmath>
#include <random>

namespace sbc {

namespace {

constexpr double kMinEigClamp = 1e-10;
constexpr double kSymTol = 1e-10;
constexpr int kDenseLimit = 4096;

void check_spec(const KernelSpec& spec) {
  if (!(spec.bandwidth > 0.0))
    throw std::invalid_argument("kernel bandwidth must be positive");
}

// Power iteration on sym, returns dominant eigenvalue in absolute value.
double power_iterate(const Matrix& sym, double tol) {
  const Eigen::Index n = sym.rows();
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
  v.normalize();
  double prev = 0.0;
  for (int it = 0; it < 100000; ++it) {
    Vector w = sym * v;
    double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    double rayleigh = v.dot(sym * v);
    if (std::abs(rayleigh - prev) <= tol * std::max(1.0, std::abs(rayleigh))) return rayleigh;
    prev = rayleigh;
  }
  return prev;
}

}  // namespace

double evaluate(const KernelSpec& spec, const Vector& x, const Vector& x2) {
  check_spec(spec);
  if (x.size() != x2.size())
    throw std::invalid_argument("kernel evaluate: dimension mismatch");
  const double d2 = (x - x2).squaredNorm();
  return std::exp(-d2 / (2.0 * spec.bandwidth * spec.bandwidth));
}

std::pair<double, double> spectral_bounds(const Matrix& sym) {
  if (sym.rows() != sym.cols())
    throw std::invalid_argument("spectral_bounds: matrix must be square");
  if (sym.rows() == 0)
    throw std::invalid_argument("spectral_bounds: empty matrix");
  const double asym = (sym - sym.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymTol * std::max(1.0, sym.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("spectral_bounds: matrix is not symmetric");

  if (sym.rows() <= kDenseLimit) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("spectral_bounds: eigendecomposition failed");
    const Vector& ev = solver.eigenvalues();
    return {ev[ev.size() - 1], ev[0]};
  }

  // Large case: dominant eigenvalue by power iteration, then the spectrum
  // edge furthest from it via the shifted matrix.
  const double tol = 1e-10;
  double mu = power_iterate(sym, tol);
  Matrix shifted = -sym;
  shifted.diagonal().array() += mu;
  double other = mu - power_iterate(shifted, tol);
  return {std::max(mu, other), std::min(mu, other)};
}

KernelMatrix gram(const KernelSpec& spec, const Matrix& points) {
  check_spec(spec);
  const Eigen::Index m = points.rows();
  if (m == 0) throw std::invalid_argument("gram: empty point set");

  Vector sq = points.rowwise().squaredNorm();
  Matrix dist2 = sq.replicate(1, m) + sq.transpose().replicate(m, 1) -
                 2.0 * points * points.transpose();
  KernelMatrix km;
  km.entries = (-dist2 / (2.0 * spec.bandwidth * spec.bandwidth)).array().exp();
  // enforce exact symmetry and unit diagonal against rounding
  km.entries = 0.5 * (km.entries + km.entries.transpose()).eval();
  km.entries.diagonal().setOnes();

  auto [lmax, lmin] = spectral_bounds(km.entries);
  km.lambda_max = std::max(lmax, 0.0);
  km.lambda_min_raw = lmin;
  km.lambda_min = std::max(lmin, kMinEigClamp);
  km.cond = km.lambda_max / km.lambda_min;
  return km;
}

Matrix cross_gram(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
  check_spec(spec);
  if (a.cols() != b.cols())
    throw std::invalid_argument("cross_gram: dimension mismatch");
  Vector sa = a.rowwise().squaredNorm();
  Vector sb = b.rowwise().squaredNorm();
  Matrix dist2 = sa.replicate(1, b.rows()) + sb.transpose().replicate(a.rows(), 1) -
                 2.0 * a * b.transpose();
  return (-dist2.cwiseMax(0.0) / (2.0 * spec.bandwidth * spec.bandwidth)).array().exp();
}

}  // namespace sbc
