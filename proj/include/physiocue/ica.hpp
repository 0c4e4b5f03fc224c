#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace physiocue {

struct FastIcaOptions {
  int max_iterations = 1000;
  double tolerance = 1e-8;
  // Whitening fails when the smallest covariance eigenvalue falls below this
  // fraction of the largest (colinear channels).
  double rank_tolerance = 1e-10;
};

struct IcaResult {
  Eigen::MatrixXd sources;    // components x samples, unit variance
  Eigen::MatrixXd unmixing;   // sources = unmixing * (x - mean)
  int iterations = 0;         // total fixed-point iterations over all components
  bool converged = true;      // false if any component hit max_iterations
};

// Fixed-point ICA with the log-cosh (tanh) contrast, extracting components one
// at a time by deflation. Rows of `x` are channels. Initial vectors come from
// the seeded Rng, so results are reproducible for a given seed. Throws
// DegenerateSignal when the channel covariance is singular.
IcaResult fast_ica(const Eigen::MatrixXd& x, std::uint64_t seed, const FastIcaOptions& options = {});

}  // namespace physiocue
