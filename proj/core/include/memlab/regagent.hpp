#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "memlab/memory_bank.hpp"
#include "memlab/rng.hpp"
#include "memlab/similarity.hpp"

namespace memlab {

// One labeled regression query: y = w.x + noise.
struct TaskInstance {
  std::vector<double> x;
  double y = 0.0;
};

// Synthetic linear-regression task source. Inputs come from an equal mixture
// of isotropic unit Gaussians centred at mu * (1, ..., 1); labels carry
// uniform noise bounded by noise_bound.
class Environment {
 public:
  Environment(std::vector<double> w, std::vector<double> means, double noise_bound,
              std::uint64_t seed);

  std::span<const double> w() const noexcept { return w_; }
  std::size_t dimension() const noexcept { return w_.size(); }
  std::span<const double> means() const noexcept { return means_; }
  double noise_bound() const noexcept { return noise_bound_; }
  std::uint64_t seed() const noexcept { return seed_; }

  // Advances the environment's stream.
  TaskInstance sample_task();
  // Noise-free functional value w.x.
  double ground_truth(std::span<const double> x) const;

 private:
  std::vector<double> w_;
  std::vector<double> means_;
  double noise_bound_;
  std::uint64_t seed_;
  Rng rng_;
};

inline const std::vector<double> kDefaultMeans{-0.5, 0.0, 0.5};

// Components of w are uniform in [-1, 1]. noise_bound == 0 gives noise-free
// labels.
Environment generate_environment(std::uint64_t seed, std::size_t dimension = 6,
                                 std::vector<double> means = kDefaultMeans,
                                 double noise_bound = 1.0);

// n freshly sampled tasks stored as (x, guess = y, truth = y) at step 0.
MemoryBank build_initial_memory(Environment& env, std::size_t n = 100,
                                std::optional<std::size_t> capacity = std::nullopt);

double ground_truth(const Environment& env, std::span<const double> x);

struct SurrogateParams {
  double lambda_low_sim = 0.1;
  double sim_lo = 0.80;
  double sim_hi = 0.98;
  double softmax_temperature = 0.005;
  double ridge = 0.01;
  // Pins the imitation weight, bypassing the similarity mapping.
  std::optional<double> fixed_lambda;

  void validate() const;
};

struct Demonstration {
  std::span<const double> x;
  double guess = 0.0;
};

// Breakdown of one surrogate execution.
struct SurrogateOutput {
  double prediction = 0.0;
  double imitation = 0.0;
  double reasoning = 0.0;
  double lambda = 0.0;
  double max_similarity = 0.0;
};

// Softmax(similarity / temperature) weighted mean of the demo guesses.
double imitation_estimate(std::span<const double> similarities, std::span<const Demonstration> demos,
                          double temperature);
// Ridge least-squares fit of w over the demos (no intercept), applied to x.
double reasoning_estimate(std::span<const double> x, std::span<const Demonstration> demos,
                          double ridge);
double imitation_weight(double max_similarity, const SurrogateParams& params);

SurrogateOutput surrogate_breakdown(std::span<const double> x, std::span<const Demonstration> demos,
                                    const SurrogateParams& params, const SimilarityFn& metric);

// prediction = lambda * imitation + (1 - lambda) * reasoning.
double surrogate_execute(std::span<const double> x, std::span<const Demonstration> demos,
                         const SurrogateParams& params, const SimilarityFn& metric);

// Something that turns a query plus retrieved demonstrations into a guess.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual double execute(std::span<const double> x, std::span<const Demonstration> demos) = 0;
};

class SurrogateAgent final : public Agent {
 public:
  SurrogateAgent(SurrogateParams params, SimilarityFn metric);
  double execute(std::span<const double> x, std::span<const Demonstration> demos) override;

 private:
  SurrogateParams params_;
  SimilarityFn metric_;
};

}  // namespace memlab
