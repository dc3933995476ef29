#include "memlab/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "memlab/rng.hpp"

namespace memlab {
namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

std::vector<std::size_t> kmeanspp_seeds(const std::vector<std::vector<double>>& points,
                                        std::size_t k, Rng& rng) {
  std::vector<std::size_t> seeds{static_cast<std::size_t>(rng.below(points.size()))};
  std::vector<double> nearest(points.size(), std::numeric_limits<double>::infinity());
  while (seeds.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points[i], points[seeds.back()]));
      total += nearest[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform01() * total;
      for (pick = 0; pick + 1 < points.size(); ++pick) {
        target -= nearest[pick];
        if (target < 0.0) break;
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(points.size()));
    }
    seeds.push_back(pick);
  }
  return seeds;
}

}  // namespace

GmmFit fit_diagonal_gmm(const std::vector<std::vector<double>>& points, const GmmOptions& options) {
  const std::size_t k = options.components;
  if (k < 1) throw std::invalid_argument("GMM needs at least one component");
  if (points.size() < k) throw std::invalid_argument("GMM needs at least as many points as components");
  const std::size_t d = points.front().size();
  if (d == 0) throw std::invalid_argument("GMM points must be non-empty vectors");
  for (const auto& p : points) {
    if (p.size() != d) throw std::invalid_argument("GMM points have inconsistent dimensions");
  }
  const std::size_t n = points.size();

  std::vector<double> global_var(d, 0.0), global_mean(d, 0.0);
  for (const auto& p : points)
    for (std::size_t j = 0; j < d; ++j) global_mean[j] += p[j] / static_cast<double>(n);
  for (const auto& p : points)
    for (std::size_t j = 0; j < d; ++j)
      global_var[j] += (p[j] - global_mean[j]) * (p[j] - global_mean[j]) / static_cast<double>(n);
  for (auto& v : global_var) v = std::max(v, options.variance_floor);

  Rng rng(mix_seed(options.seed));
  GmmFit fit;
  fit.weights.assign(k, 1.0 / static_cast<double>(k));
  for (auto idx : kmeanspp_seeds(points, k, rng)) fit.means.push_back(points[idx]);
  fit.variances.assign(k, global_var);

  std::vector<double> resp(n * k);
  double previous = -std::numeric_limits<double>::infinity();
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    // E step, in log space.
    double total_ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        double lp = std::log(fit.weights[c]);
        for (std::size_t j = 0; j < d; ++j) {
          const double diff = points[i][j] - fit.means[c][j];
          lp -= 0.5 * (log_two_pi + std::log(fit.variances[c][j]) + diff * diff / fit.variances[c][j]);
        }
        resp[i * k + c] = lp;
        best = std::max(best, lp);
      }
      double sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) sum += std::exp(resp[i * k + c] - best);
      const double log_norm = best + std::log(sum);
      total_ll += log_norm;
      for (std::size_t c = 0; c < k; ++c) resp[i * k + c] = std::exp(resp[i * k + c] - log_norm);
    }
    fit.iterations = iter + 1;
    fit.log_likelihood = total_ll / static_cast<double>(n);

    // M step.
    for (std::size_t c = 0; c < k; ++c) {
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) mass += resp[i * k + c];
      if (mass <= 1e-12) {
        // Collapsed component: restart it on a random point.
        fit.means[c] = points[static_cast<std::size_t>(rng.below(n))];
        fit.variances[c] = global_var;
        fit.weights[c] = 1.0 / static_cast<double>(n);
        continue;
      }
      std::vector<double> mean(d, 0.0), var(d, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += resp[i * k + c] * points[i][j];
      for (auto& m : mean) m /= mass;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          const double diff = points[i][j] - mean[j];
          var[j] += resp[i * k + c] * diff * diff;
        }
      for (auto& v : var) v = std::max(v / mass, options.variance_floor);
      fit.means[c] = std::move(mean);
      fit.variances[c] = std::move(var);
      fit.weights[c] = mass / static_cast<double>(n);
    }
    double weight_sum = 0.0;
    for (double w : fit.weights) weight_sum += w;
    for (double& w : fit.weights) w /= weight_sum;

    if (std::abs(fit.log_likelihood - previous) < options.tolerance) break;
    previous = fit.log_likelihood;
  }

  fit.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* row = &resp[i * k];
    fit.labels[i] = static_cast<std::size_t>(std::max_element(row, row + k) - row);
  }
  return fit;
}

}  // namespace memlab
