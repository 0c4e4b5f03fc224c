#include "physiocue/ica.hpp"

#include <cmath>

#include "physiocue/errors.hpp"
#include "physiocue/rng.hpp"

namespace physiocue {

IcaResult fast_ica(const Eigen::MatrixXd& x, std::uint64_t seed, const FastIcaOptions& options) {
  const Eigen::Index m = x.rows();
  const Eigen::Index n = x.cols();
  if (m < 1 || n < 2 * m) throw InvalidInput("fast_ica: need more samples than channels");

  const Eigen::VectorXd mu = x.rowwise().mean();
  const Eigen::MatrixXd xc = x.colwise() - mu;
  const Eigen::MatrixXd cov = (xc * xc.transpose()) / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd& d = eig.eigenvalues();  // ascending
  if (!(d(m - 1) > 0.0) || d(0) <= options.rank_tolerance * d(m - 1)) {
    throw DegenerateSignal("fast_ica: channel covariance is singular (colinear channels)");
  }
  const Eigen::MatrixXd whitening =
      d.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::MatrixXd z = whitening * xc;

  Rng rng(seed);
  Eigen::MatrixXd w_all = Eigen::MatrixXd::Zero(m, m);
  IcaResult result;
  for (Eigen::Index p = 0; p < m; ++p) {
    Eigen::VectorXd w(m);
    for (Eigen::Index i = 0; i < m; ++i) w(i) = rng.normal();
    w.normalize();

    bool done = false;
    for (int it = 0; it < options.max_iterations; ++it) {
      ++result.iterations;
      const Eigen::RowVectorXd proj = w.transpose() * z;
      const Eigen::RowVectorXd g = proj.array().tanh();
      const double g_prime_mean = (1.0 - g.array().square()).mean();
      Eigen::VectorXd w_new = (z * g.transpose()) / static_cast<double>(n) - g_prime_mean * w;
      // Deflate against components already found.
      for (Eigen::Index q = 0; q < p; ++q) {
        const Eigen::VectorXd prev = w_all.row(q).transpose();
        w_new -= w_new.dot(prev) * prev;
      }
      const double norm = w_new.norm();
      if (!(norm > 0.0)) throw DegenerateSignal("fast_ica: fixed-point update collapsed");
      w_new /= norm;
      const double change = std::abs(std::abs(w_new.dot(w)) - 1.0);
      w = w_new;
      if (change < options.tolerance) {
        done = true;
        break;
      }
    }
    if (!done) result.converged = false;
    w_all.row(p) = w.transpose();
  }

  result.unmixing = w_all * whitening;
  result.sources = w_all * z;
  return result;
}

}  // namespace physiocue
