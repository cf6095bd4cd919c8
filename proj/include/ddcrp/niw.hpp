#pragma once

#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "ddcrp/types.hpp"

namespace ddcrp {

/// Normal-inverse-Wishart base measure over (mu, Sigma) of a 3-D Gaussian:
/// mu | Sigma ~ N(m0, Sigma / kappa0), Sigma ~ IW(S0, v0).
template <typename Scalar>
struct NiwPrior {
  using Vector = Eigen::Matrix<Scalar, 3, 1>;
  using Matrix = Eigen::Matrix<Scalar, 3, 3>;

  Vector m0 = Vector::Ones();
  Scalar kappa0 = Scalar(0.1);
  Matrix S0 = Scalar(10) * Matrix::Identity();
  Scalar v0 = Scalar(5);

  void validate() const {
    if (!(kappa0 > Scalar(0))) throw std::invalid_argument("NIW prior: kappa0 must be > 0");
    if (!(v0 > Scalar(2))) throw std::invalid_argument("NIW prior: v0 must be > 2");
    if (!S0.isApprox(S0.transpose())) throw std::invalid_argument("NIW prior: S0 must be symmetric");
    if (Eigen::LLT<Matrix>(S0).info() != Eigen::Success) {
      throw std::invalid_argument("NIW prior: S0 must be positive definite");
    }
  }

  /// Conjugate update with the data summarized by (n, sum, outer_sum).
  [[nodiscard]] NiwPrior posterior(Scalar n, const Vector& sum, const Matrix& outer_sum) const {
    NiwPrior out;
    out.kappa0 = kappa0 + n;
    out.v0 = v0 + n;
    out.m0 = (kappa0 * m0 + sum) / out.kappa0;
    out.S0 = S0 + outer_sum + kappa0 * m0 * m0.transpose() - out.kappa0 * out.m0 * out.m0.transpose();
    out.S0 = Scalar(0.5) * (out.S0 + out.S0.transpose()).eval();
    return out;
  }
};

/// Sufficient statistics of a table's average-RGB observations.
template <typename Scalar>
struct TableStats {
  using Vector = Eigen::Matrix<Scalar, 3, 1>;
  using Matrix = Eigen::Matrix<Scalar, 3, 3>;

  long n = 0;
  Vector sum = Vector::Zero();
  Matrix outer_sum = Matrix::Zero();

  void add(const Vector& x) {
    ++n;
    sum += x;
    outer_sum.noalias() += x * x.transpose();
  }
  TableStats& operator+=(const TableStats& other) {
    n += other.n;
    sum += other.sum;
    outer_sum += other.outer_sum;
    return *this;
  }
  friend TableStats operator+(TableStats a, const TableStats& b) { return a += b; }
};

using NiwPriorD = NiwPrior<double>;
using TableStatsD = TableStats<double>;

/// Number of log-determinants that needed diagonal jitter to factor.
inline std::atomic<long>& niw_jitter_count() {
  static std::atomic<long> count{0};
  return count;
}

template <typename Scalar>
Scalar log_multivariate_gamma(Scalar x, int d) {
  using std::lgamma;
  using std::log;
  Scalar out = Scalar(d * (d - 1)) / Scalar(4) * log(std::numbers::pi_v<Scalar>);
  for (int j = 1; j <= d; ++j) out += lgamma(x + Scalar(1 - j) / Scalar(2));
  return out;
}

/// log det of a symmetric positive-definite matrix via Cholesky, adding
/// 1e-10 I once when the plain factorization fails.
template <typename Derived>
typename Derived::Scalar log_det_spd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
  Matrix a = m;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    ++niw_jitter_count();
    a.diagonal().array() += Scalar(1e-10);
    llt.compute(a);
    if (llt.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "matrix is not positive definite even after jitter:\n" << m;
      throw NumericalError(msg.str());
    }
  }
  using std::log;
  return Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
}

/// Closed-form log marginal likelihood of a table's observations with the
/// Gaussian parameters integrated against the NIW prior.
template <typename Scalar>
Scalar niw_log_marginal(const TableStats<Scalar>& stats, const NiwPrior<Scalar>& prior) {
  if (stats.n == 0) return Scalar(0);
  using std::log;
  constexpr int d = 3;
  const Scalar n = static_cast<Scalar>(stats.n);
  const NiwPrior<Scalar> post = prior.posterior(n, stats.sum, stats.outer_sum);
  Scalar log_det_post;
  try {
    log_det_post = log_det_spd(post.S0);
  } catch (const NumericalError& e) {
    std::ostringstream msg;
    msg << "niw_log_marginal: posterior scale Sn singular (n=" << stats.n << "): " << e.what();
    throw NumericalError(msg.str());
  }
  return -(n * d / Scalar(2)) * log(std::numbers::pi_v<Scalar>) +
         (Scalar(d) / Scalar(2)) * log(prior.kappa0 / post.kappa0) + (prior.v0 / Scalar(2)) * log_det_spd(prior.S0) -
         (post.v0 / Scalar(2)) * log_det_post + log_multivariate_gamma(post.v0 / Scalar(2), d) -
         log_multivariate_gamma(prior.v0 / Scalar(2), d);
}

/// log of p(x_k u x_l) / (p(x_k) p(x_l)).
template <typename Scalar>
Scalar merge_log_ratio(const TableStats<Scalar>& k, const TableStats<Scalar>& l, const NiwPrior<Scalar>& prior) {
  if (k.n == 0 || l.n == 0) throw std::invalid_argument("merge_log_ratio: both tables must be nonempty");
  // summing the two parts first keeps the result exactly symmetric in (k, l)
  return niw_log_marginal(k + l, prior) - (niw_log_marginal(k, prior) + niw_log_marginal(l, prior));
}

}  // namespace ddcrp
