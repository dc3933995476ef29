#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace memlab {

struct GmmOptions {
  std::size_t components = 3;
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;  // on the mean per-point log-likelihood
  double variance_floor = 1e-6;
  std::uint64_t seed = 0;
};

struct GmmFit {
  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> variances;  // diagonal
  std::vector<std::size_t> labels;             // most responsible component per point
  std::size_t iterations = 0;
  double log_likelihood = 0.0;  // mean per point
};

// Diagonal-covariance Gaussian mixture fitted by expectation-maximization,
// initialised with k-means++ style seeding.
GmmFit fit_diagonal_gmm(const std::vector<std::vector<double>>& points, const GmmOptions& options);

}  // namespace memlab
