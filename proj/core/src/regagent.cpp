#include "memlab/regagent.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace memlab {

Environment::Environment(std::vector<double> w, std::vector<double> means, double noise_bound,
                         std::uint64_t seed)
    : w_(std::move(w)),
      means_(std::move(means)),
      noise_bound_(noise_bound),
      seed_(seed),
      rng_(mix_seed(seed ^ 0x7461736b73ULL)) {
  if (w_.empty()) throw std::invalid_argument("environment dimension must be at least 1");
  if (means_.empty()) throw std::invalid_argument("environment needs at least one mean");
  if (!(noise_bound_ >= 0.0) || !std::isfinite(noise_bound_)) {
    throw std::invalid_argument("noise bound must be finite and non-negative");
  }
}

TaskInstance Environment::sample_task() {
  TaskInstance task;
  const double mu = means_[rng_.below(means_.size())];
  task.x.resize(w_.size());
  for (auto& xi : task.x) xi = mu + rng_.normal();
  const double noise = noise_bound_ > 0.0 ? rng_.uniform(-noise_bound_, noise_bound_) : 0.0;
  task.y = ground_truth(task.x) + noise;
  return task;
}

double Environment::ground_truth(std::span<const double> x) const {
  if (x.size() != w_.size()) {
    throw std::invalid_argument("ground_truth: expected dimension " + std::to_string(w_.size()) +
                                ", got " + std::to_string(x.size()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += w_[i] * x[i];
  return dot;
}

Environment generate_environment(std::uint64_t seed, std::size_t dimension,
                                 std::vector<double> means, double noise_bound) {
  if (dimension < 1) throw std::invalid_argument("environment dimension must be at least 1");
  Rng rng(mix_seed(seed));
  std::vector<double> w(dimension);
  for (auto& wi : w) wi = rng.uniform(-1.0, 1.0);
  return Environment(std::move(w), std::move(means), noise_bound, seed);
}

MemoryBank build_initial_memory(Environment& env, std::size_t n,
                                std::optional<std::size_t> capacity) {
  if (n < 1) throw std::invalid_argument("initial memory needs at least one record");
  MemoryBank bank(env.dimension(), capacity);
  for (std::size_t i = 0; i < n; ++i) {
    const auto task = env.sample_task();
    bank.insert_record(task.x, task.y, task.y, 0, Origin::initial);
  }
  return bank;
}

double ground_truth(const Environment& env, std::span<const double> x) {
  return env.ground_truth(x);
}

void SurrogateParams::validate() const {
  if (!(lambda_low_sim >= 0.0 && lambda_low_sim <= 1.0)) {
    throw std::invalid_argument("lambda_low_sim must lie in [0, 1]");
  }
  if (!(sim_lo < sim_hi)) throw std::invalid_argument("sim_lo must be below sim_hi");
  if (!(softmax_temperature > 0.0)) throw std::invalid_argument("softmax_temperature must be positive");
  if (!(ridge >= 0.0)) throw std::invalid_argument("ridge must be non-negative");
  if (fixed_lambda && !(*fixed_lambda >= 0.0 && *fixed_lambda <= 1.0)) {
    throw std::invalid_argument("fixed_lambda must lie in [0, 1]");
  }
}

double imitation_estimate(std::span<const double> similarities, std::span<const Demonstration> demos,
                          double temperature) {
  if (demos.empty()) throw std::invalid_argument("imitation_estimate: no demonstrations");
  if (similarities.size() != demos.size()) {
    throw std::invalid_argument("imitation_estimate: one similarity per demonstration required");
  }
  const double top = *std::max_element(similarities.begin(), similarities.end());
  double weight_sum = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < demos.size(); ++i) {
    const double wgt = std::exp((similarities[i] - top) / temperature);
    weight_sum += wgt;
    weighted += wgt * demos[i].guess;
  }
  return weighted / weight_sum;
}

double reasoning_estimate(std::span<const double> x, std::span<const Demonstration> demos,
                          double ridge) {
  if (demos.empty()) throw std::invalid_argument("reasoning_estimate: no demonstrations");
  const auto d = static_cast<Eigen::Index>(x.size());
  const auto n = static_cast<Eigen::Index>(demos.size());
  // Ridge as an augmented least-squares problem [X; sqrt(ridge) I] w = [g; 0];
  // the complete orthogonal decomposition gives the minimum-norm solution
  // when ridge is 0 and the demos do not span the space.
  const Eigen::Index rows = ridge > 0.0 ? n + d : n;
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows, d);
  Eigen::VectorXd target = Eigen::VectorXd::Zero(rows);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& demo = demos[static_cast<std::size_t>(i)];
    if (demo.x.size() != x.size()) {
      throw std::invalid_argument("reasoning_estimate: demonstration dimension mismatch");
    }
    for (Eigen::Index j = 0; j < d; ++j) design(i, j) = demo.x[static_cast<std::size_t>(j)];
    target(i) = demo.guess;
  }
  if (ridge > 0.0) {
    design.bottomRows(d).diagonal().setConstant(std::sqrt(ridge));
  }
  const Eigen::VectorXd w_hat = design.completeOrthogonalDecomposition().solve(target);
  const Eigen::Map<const Eigen::VectorXd> query(x.data(), d);
  return w_hat.dot(query);
}

double imitation_weight(double max_similarity, const SurrogateParams& params) {
  if (params.fixed_lambda) return *params.fixed_lambda;
  const double ramp = (max_similarity - params.sim_lo) / (params.sim_hi - params.sim_lo);
  return std::clamp(ramp, params.lambda_low_sim, 1.0);
}

SurrogateOutput surrogate_breakdown(std::span<const double> x, std::span<const Demonstration> demos,
                                    const SurrogateParams& params, const SimilarityFn& metric) {
  if (demos.empty()) throw std::invalid_argument("surrogate_execute: no demonstrations");
  std::vector<double> sims;
  sims.reserve(demos.size());
  for (const auto& demo : demos) sims.push_back(metric(x, demo.x));

  SurrogateOutput out;
  out.max_similarity = *std::max_element(sims.begin(), sims.end());
  out.lambda = imitation_weight(out.max_similarity, params);
  out.imitation = imitation_estimate(sims, demos, params.softmax_temperature);
  out.reasoning = out.lambda < 1.0 ? reasoning_estimate(x, demos, params.ridge) : 0.0;
  out.prediction = out.lambda * out.imitation + (1.0 - out.lambda) * out.reasoning;
  return out;
}

double surrogate_execute(std::span<const double> x, std::span<const Demonstration> demos,
                         const SurrogateParams& params, const SimilarityFn& metric) {
  return surrogate_breakdown(x, demos, params, metric).prediction;
}

SurrogateAgent::SurrogateAgent(SurrogateParams params, SimilarityFn metric)
    : params_(params), metric_(std::move(metric)) {
  params_.validate();
}

double SurrogateAgent::execute(std::span<const double> x, std::span<const Demonstration> demos) {
  return surrogate_execute(x, demos, params_, metric_);
}

}  // namespace memlab
