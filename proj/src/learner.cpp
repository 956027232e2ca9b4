#include "sbc/learner.hpp"

#include <cmath>
#include <vector>

namespace sbc {

namespace {
constexpr double kJitter = 1e-10;
}

Hypothesis fit(const Matrix& x, const Vector& y, const WeightDistribution& w,
               const KernelSpec& kernel, double lambda) {
  const Eigen::Index m = x.rows();
  if (y.size() != m || w.mass.size() != m)
    throw std::invalid_argument("fit: inconsistent sizes");
  if (!(lambda > 0.0)) throw std::invalid_argument("fit: lambda must be positive");
  if (std::abs(w.mass.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("fit: weights are not normalized");

  // Zero-weight rows decouple: lambda alpha_i = 0. Solve on the rest, where
  // substituting alpha = D^{1/2} beta turns the stationarity system into the
  // SPD system (D^{1/2} K D^{1/2} + lambda I) beta = D^{1/2} y.
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < m; ++i)
    if (w.mass[i] > 0.0) active.push_back(i);
  const Eigen::Index p = static_cast<Eigen::Index>(active.size());

  Matrix xa(p, x.cols());
  Vector ya(p), wa(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    xa.row(j) = x.row(active[j]);
    ya[j] = y[active[j]];
    wa[j] = w.mass[active[j]];
  }

  Matrix ka = cross_gram(kernel, xa, xa);
  ka = 0.5 * (ka + ka.transpose()).eval();
  Vector sqw = wa.cwiseSqrt();
  Matrix sys = sqw.asDiagonal() * ka * sqw.asDiagonal();
  sys.diagonal().array() += lambda;

  Eigen::LLT<Matrix> llt(sys);
  Vector beta;
  if (llt.info() == Eigen::Success) {
    beta = llt.solve(sqw.cwiseProduct(ya));
  } else {
    sys.diagonal().array() += kJitter;
    Eigen::LDLT<Matrix> ldlt(sys);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error(
          "fit: singular stationarity system after jitter (lambda=" +
          std::to_string(lambda) + ")");
    beta = ldlt.solve(sqw.cwiseProduct(ya));
  }

  Hypothesis h;
  h.alpha = Vector::Zero(m);
  for (Eigen::Index j = 0; j < p; ++j) h.alpha[active[j]] = sqw[j] * beta[j];
  h.support = x;
  h.kernel = kernel;
  h.lambda = lambda;
  return h;
}

double predict(const Hypothesis& h, const Vector& x) {
  if (x.size() != h.support.cols())
    throw std::invalid_argument("predict: dimension mismatch");
  double out = 0.0;
  for (Eigen::Index i = 0; i < h.support.rows(); ++i)
    out += h.alpha[i] * evaluate(h.kernel, h.support.row(i), x);
  return out;
}

Vector predict(const Hypothesis& h, const Matrix& xs) {
  if (xs.cols() != h.support.cols())
    throw std::invalid_argument("predict: dimension mismatch");
  return cross_gram(h.kernel, xs, h.support) * h.alpha;
}

double cost(const Hypothesis& h, const Vector& x, double y) {
  const double r = predict(h, x) - y;
  return r * r;
}

double objective(const Matrix& k, const Vector& y, const WeightDistribution& w,
                 double lambda, const Vector& alpha) {
  Vector residual = k * alpha - y;
  return residual.cwiseAbs2().dot(w.mass) + lambda * alpha.dot(k * alpha);
}

}  // namespace sbc
