#include "memlab/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "memlab/adapter.hpp"
#include "memlab/gmm.hpp"
#include "memlab/similarity.hpp"

namespace memlab {
namespace {

std::unique_ptr<Agent> default_agent(const SimulationConfig& config) {
  if (config.agent_command) {
    return std::make_unique<SubprocessAgent>(*config.agent_command, config.agent_timeout);
  }
  return std::make_unique<SurrogateAgent>(config.surrogate, SimilarityFn(cosine_similarity));
}

}  // namespace

void SimulationConfig::validate() const {
  if (stream_length < 1) throw std::invalid_argument("stream_length must be positive");
  if (k_retrieve < 1) throw std::invalid_argument("k_retrieve must be positive");
  if (initial_memory < 1) throw std::invalid_argument("initial_memory must be positive");
  if (dimension < 1) throw std::invalid_argument("dimension must be positive");
  if (means.empty()) throw std::invalid_argument("means must be non-empty");
  if (!(noise_bound >= 0.0) || !std::isfinite(noise_bound)) {
    throw std::invalid_argument("noise_bound must be finite and non-negative");
  }
  if (!(utility_threshold >= 0.0)) throw std::invalid_argument("utility_threshold must be non-negative");
  if (!(gamma_output > 0.0)) throw std::invalid_argument("gamma_output must be positive");
  if (agent_timeout.count() <= 0) throw std::invalid_argument("agent timeout must be positive");
  addition.validate();
  deletion.validate();
  surrogate.validate();
  if (deletion.capacity && initial_memory > *deletion.capacity) {
    throw std::invalid_argument("initial_memory exceeds the capacity limit");
  }
}

Simulation::Simulation(SimulationConfig config, std::unique_ptr<Agent> agent)
    : config_((config.validate(), std::move(config))),
      env_(generate_environment(config_.seed, config_.dimension, config_.means, config_.noise_bound)),
      bank_(build_initial_memory(env_, config_.initial_memory, config_.deletion.capacity)),
      agent_(agent ? std::move(agent) : default_agent(config_)),
      length_(config_.stream_length) {
  traces_.reserve(length_);
}

Simulation::Simulation(SimulationConfig config, std::vector<TaskInstance> tasks,
                       std::unique_ptr<Agent> agent)
    : Simulation(std::move(config), std::move(agent)) {
  for (const auto& t : tasks) {
    if (t.x.size() != config_.dimension) {
      throw std::invalid_argument("scripted task dimension does not match the configuration");
    }
  }
  length_ = tasks.size();
  scripted_ = std::move(tasks);
}

const StepTrace& Simulation::step() {
  if (finished()) throw std::logic_error("simulation already finished");
  const auto t = static_cast<std::int64_t>(steps_done_ + 1);
  const TaskInstance task = scripted_ ? (*scripted_)[steps_done_] : env_.sample_task();

  if (bank_.empty()) throw std::runtime_error("memory bank emptied; nothing to retrieve");
  const auto retrieved = retrieve_top_k(bank_, task.x, config_.k_retrieve, cosine_similarity);

  StepTrace trace;
  trace.step = t;
  std::vector<Demonstration> demos;
  demos.reserve(retrieved.size());
  for (const auto& hit : retrieved) {
    bank_.log_retrieval(hit.id, t);
    trace.retrieved_ids.push_back(hit.id);
    const auto& rec = bank_.record(hit.id);
    demos.push_back({rec.query_features, rec.output});
  }
  retrievals_logged_ += retrieved.size();

  trace.prediction = agent_->execute(task.x, demos);
  trace.truth = task.y;
  trace.input_similarity = retrieved.front().score;
  trace.output_similarity =
      rbf_similarity(trace.prediction, bank_.record(retrieved.front().id).output, config_.gamma_output);

  const auto verdict = evaluate(config_.addition, trace.prediction, task.y, config_.utility_threshold);
  trace.abs_error = verdict.abs_error;
  trace.success = success(trace.prediction, task.y);
  // Utilities go in before the add, so a record never scores its own step.
  for (const auto& hit : retrieved) bank_.log_utility(hit.id, t, verdict.utility);

  if (verdict.accept) {
    const Origin origin = config_.error_free ? Origin::error_free : Origin::executed;
    trace.added_id =
        bank_.insert_record(task.x, config_.error_free ? task.y : trace.prediction, task.y, t, origin);
    trace.added = true;
  }

  const auto& del = config_.deletion;
  const auto t_prev = t - del.period;
  switch (del.mode) {
    case DeletionMode::none:
      break;
    case DeletionMode::periodic:
      if (del.periodic_due(t)) {
        trace.deleted_ids = sweep(t, SweepKind::periodic,
                                  periodic_victims(bank_, t, t_prev, del.alpha), t_prev);
      }
      break;
    case DeletionMode::history:
      trace.deleted_ids = sweep(t, SweepKind::history,
                                history_victims(bank_, del.min_retrievals_n, del.beta), t_prev);
      break;
    case DeletionMode::combined:
      trace.deleted_ids =
          del.periodic_due(t)
              ? sweep(t, SweepKind::combined,
                      combined_victims(bank_, t, t_prev, del.alpha, del.min_retrievals_n, del.beta),
                      t_prev)
              : sweep(t, SweepKind::history,
                      history_victims(bank_, del.min_retrievals_n, del.beta), t_prev);
      break;
    case DeletionMode::capacity: {
      if (del.periodic_due(t)) {
        trace.deleted_ids = sweep(t, SweepKind::periodic,
                                  periodic_victims(bank_, t, t_prev, del.alpha), t_prev);
      }
      while (bank_.size() > *del.capacity) {
        auto removed = sweep(t, SweepKind::capacity, {capacity_victim(bank_)}, t_prev);
        trace.deleted_ids.insert(trace.deleted_ids.end(), removed.begin(), removed.end());
      }
      break;
    }
  }

  trace.mem_size_after = bank_.size();
  ++steps_done_;
  traces_.push_back(std::move(trace));
  return traces_.back();
}

std::vector<RecordId> Simulation::sweep(std::int64_t t, SweepKind kind, std::vector<RecordId> victims,
                                        std::int64_t t_prev) {
  if (observer_) observer_(SweepEvent{t, kind, t_prev, &bank_, victims});
  for (auto id : victims) {
    const auto& ledger = bank_.ledger(id);
    deletion_log_.push_back({bank_.record(id), ledger.retrieval_count(), ledger.mean_utility(), t});
    deleted_retrievals_ += ledger.retrieval_count();
  }
  bank_.remove_records(victims);
  return victims;
}

void Simulation::run() {
  while (!finished()) step();
}

SimulationResult run_simulation(const SimulationConfig& config) {
  Simulation sim(config);
  sim.run();
  return {sim.traces(), sim.bank(), sim.deletion_log(), sim.environment()};
}

std::vector<StepTrace> run_stream(const SimulationConfig& config) {
  Simulation sim(config);
  sim.run();
  return sim.traces();
}

std::vector<StepTrace> run_error_free_variant(SimulationConfig config) {
  config.error_free = true;
  return run_stream(config);
}

ShiftedStream make_shifted_stream(const std::vector<TaskInstance>& tasks, std::size_t clusters,
                                  std::uint64_t seed) {
  if (clusters < 2) throw std::invalid_argument("a shifted stream needs at least two clusters");
  if (tasks.size() < clusters) {
    throw std::invalid_argument("fewer tasks (" + std::to_string(tasks.size()) + ") than clusters (" +
                                std::to_string(clusters) + ")");
  }
  std::vector<std::vector<double>> points;
  points.reserve(tasks.size());
  for (const auto& t : tasks) points.push_back(t.x);
  GmmOptions options;
  options.components = clusters;
  options.max_iterations = 100;
  options.seed = seed;
  const auto fit = fit_diagonal_gmm(points, options);

  std::vector<std::size_t> order(tasks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fit.labels[a] < fit.labels[b]; });
  ShiftedStream out;
  out.tasks.reserve(tasks.size());
  out.labels.reserve(tasks.size());
  for (auto i : order) {
    out.tasks.push_back(tasks[i]);
    out.labels.push_back(fit.labels[i]);
  }
  return out;
}

ShiftedRun run_shifted(const SimulationConfig& config, std::size_t clusters) {
  config.validate();
  Environment env =
      generate_environment(config.seed, config.dimension, config.means, config.noise_bound);
  build_initial_memory(env, config.initial_memory);
  std::vector<TaskInstance> tasks;
  tasks.reserve(config.stream_length);
  for (std::size_t i = 0; i < config.stream_length; ++i) tasks.push_back(env.sample_task());
  auto shifted = make_shifted_stream(tasks, clusters, config.seed);

  Simulation sim(config, std::move(shifted.tasks));
  sim.run();
  return {{sim.traces(), sim.bank(), sim.deletion_log(), sim.environment()},
          std::move(shifted.labels)};
}

}  // namespace memlab
