// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "memlab/deletion.hpp"
#include "memlab/evaluators.hpp"
#include "memlab/metrics.hpp"
#include "memlab/regagent.hpp"
#include "memlab/similarity.hpp"
#include "memlab/simulation.hpp"

using namespace memlab;

namespace {

constexpr std::size_t kSteps = 4000;
const std::vector<std::uint64_t> kSeeds{0, 1, 2, 3, 4};

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

SimulationConfig config_for(EvaluatorSpec addition, std::uint64_t seed) {
  SimulationConfig c;
  c.seed = seed;
  c.stream_length = kSteps;
  c.addition = addition;
  return c;
}

const std::map<std::string, EvaluatorSpec>& variants() {
  static const std::map<std::string, EvaluatorSpec> v{
      {"fixed", EvaluatorSpec::fixed()},
      {"add_all", EvaluatorSpec::add_all()},
      {"C1", EvaluatorSpec::coarse(kCoarse1Threshold)},
      {"C2", EvaluatorSpec::coarse(kCoarse2Threshold)},
      {"C3", EvaluatorSpec::coarse(kCoarse3Threshold)},
      {"strict", EvaluatorSpec::strict(kStrictThreshold)},
  };
  return v;
}

// Runs shared by several criteria, keyed by (variant, error_free, seed).
std::map<std::tuple<std::string, bool, std::uint64_t>, std::vector<StepTrace>>& run_cache() {
  static std::map<std::tuple<std::string, bool, std::uint64_t>, std::vector<StepTrace>> cache;
  return cache;
}

const std::vector<StepTrace>& traces_for(const std::string& variant, std::uint64_t seed, bool error_free = false) {
  auto key = std::make_tuple(variant, error_free, seed);
  auto& cache = run_cache();
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto c = config_for(variants().at(variant), seed);
    it = cache.emplace(key, error_free ? run_error_free_variant(c) : run_stream(c)).first;
  }
  return it->second;
}

double mean_success(const std::string& variant, bool error_free = false) {
  std::vector<double> rates;
  for (auto s : kSeeds) rates.push_back(success_rate(traces_for(variant, s, error_free)));
  return mean(rates);
}

Outcome criterion1() {
  Outcome o;
  double slowest = 0;
  for (auto seed : kSeeds) {
    const auto start = std::chrono::steady_clock::now();
    Simulation add_all(config_for(EvaluatorSpec::add_all(), seed));
    bool law = true;
    while (!add_all.finished()) {
      const auto& tr = add_all.step();
      law = law && tr.mem_size_after == 100 + static_cast<std::size_t>(tr.step);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    slowest = std::max(slowest, secs);
    o.check(law && add_all.bank().size() == 4100, "add_all size law broken on seed " + std::to_string(seed));

    Simulation fixed(config_for(EvaluatorSpec::fixed(), seed));
    bool flat = true;
    while (!fixed.finished()) flat = flat && fixed.step().mem_size_after == 100;
    o.check(flat, "fixed size changed on seed " + std::to_string(seed));
  }
  o.check(slowest < 10.0, "run took " + fmt("%.2f s", slowest));
  o.note("add_all final 4100, fixed 100 every step; slowest 4000-step run " + fmt("%.3f s", slowest));
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto& v = variants();
  std::size_t checked = 0;
  for (int i = 0; i <= 2000; ++i) {
    const double err = i / 1000.0;
    for (double truth : {-4.0, -0.3, 0.0, 1.7, 12.5}) {
      for (double sign : {-1.0, 1.0}) {
        const double pred = truth + sign * err;
        const bool s = evaluate(v.at("strict"), pred, truth).accept;
        const bool c3 = evaluate(v.at("C3"), pred, truth).accept;
        const bool c2 = evaluate(v.at("C2"), pred, truth).accept;
        const bool c1 = evaluate(v.at("C1"), pred, truth).accept;
        const bool all = evaluate(v.at("add_all"), pred, truth).accept;
        if ((s && !c3) || (c3 && !c2) || (c2 && !c1) || (c1 && !all)) {
          o.check(false, "chain broken at error " + fmt("%.3f", err));
        }
        ++checked;
      }
    }
  }
  o.note(std::to_string(checked) + " (prediction, truth) pairs");
  return o;
}

Outcome criterion3() {
  Outcome o;
  std::map<std::string, double> sr;
  for (const auto& [name, spec] : variants()) sr[name] = mean_success(name);
  o.check(sr["strict"] - sr["add_all"] >= 0.05, "strict - add_all = " + fmt("%.4f", sr["strict"] - sr["add_all"]));
  for (const char* c : {"C1", "C2", "C3"}) o.check(sr["strict"] >= sr[c], std::string("strict < ") + c);
  o.check(sr["C3"] >= sr["C1"], "C3 < C1");
  for (const char* name : {"fixed", "add_all", "C1", "C2", "C3", "strict"}) {
    o.note(std::string(name) + " " + fmt("%.4f", sr[name]));
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  std::vector<double> rs, curve_rs, in_add, out_add, in_fixed, out_fixed;
  for (auto seed : kSeeds) {
    const auto& add_all = traces_for("add_all", seed);
    const auto& fixed = traces_for("fixed", seed);
    const auto xi = input_similarities(add_all), xo = output_similarities(add_all);
    const double r = pearson(xi, xo);
    rs.push_back(r);
    o.check(r >= 0.8, "seed " + std::to_string(seed) + " per-step r = " + fmt("%.3f", r));
    const auto ci = cumulative_average(xi), co = cumulative_average(xo);
    curve_rs.push_back(pearson(ci, co));
    in_add.push_back(ci.back());
    out_add.push_back(co.back());
    in_fixed.push_back(cumulative_average(input_similarities(fixed)).back());
    out_fixed.push_back(cumulative_average(output_similarities(fixed)).back());
  }
  o.check(mean(in_add) > mean(in_fixed), "cumulative input similarity does not dominate fixed");
  o.check(mean(out_add) > mean(out_fixed), "cumulative output similarity does not dominate fixed");
  o.note("mean per-step r " + fmt("%.3f", mean(rs)) + " (cumulative curves r " + fmt("%.3f", mean(curve_rs)) +
         ", not scored), cumulative input " + fmt("%.3f", mean(in_add)) +
         " vs fixed " + fmt("%.3f", mean(in_fixed)) + ", cumulative output " + fmt("%.3f", mean(out_add)) +
         " vs fixed " + fmt("%.3f", mean(out_fixed)));
  return o;
}

Outcome criterion5() {
  Outcome o;
  std::map<std::string, double> gap;
  for (const char* v : {"add_all", "C1", "strict"}) {
    gap[v] = mean_success(v, true) - mean_success(v, false);
    o.note(std::string(v) + " gap " + fmt("%.4f", gap[v]));
  }
  o.check(gap["add_all"] >= 0.0, "error-free below normal under add_all");
  o.check(gap["C1"] >= 0.0, "error-free below normal under C1");
  o.check(gap["add_all"] >= gap["strict"], "add_all gap smaller than strict gap");
  return o;
}

struct SweepAudit {
  std::size_t n = 5;
  double beta = 0.5;
  std::int64_t alpha = 0;
  std::size_t sweeps = 0;
  std::size_t violations = 0;

  bool history_hit(const UtilityLedger& l) const {
    return l.retrieval_count() > n && l.mean_utility() && *l.mean_utility() <= beta;
  }
  bool periodic_hit(const UtilityLedger& l, std::int64_t t_prev, std::int64_t t) const {
    return l.count_in_window(t_prev, t) <= static_cast<std::size_t>(alpha);
  }

  void operator()(const SweepEvent& e) {
    if (e.kind == SweepKind::capacity) return;
    ++sweeps;
    const std::set<RecordId> victims(e.victims.begin(), e.victims.end());
    for (const auto& s : e.bank->slots()) {
      const bool h = history_hit(s.ledger);
      const bool p = periodic_hit(s.ledger, e.t_prev, e.step);
      bool should = false;
      switch (e.kind) {
        case SweepKind::history:
          should = h;
          // Retained records past the guard must be above beta.
          if (!victims.contains(s.record.id) && s.ledger.retrieval_count() > n &&
              !(s.ledger.mean_utility() && *s.ledger.mean_utility() > beta)) {
            ++violations;
          }
          break;
        case SweepKind::periodic:
          should = p;
          if (!victims.contains(s.record.id) && s.ledger.count_in_window(e.t_prev, e.step) < 1) ++violations;
          break;
        case SweepKind::combined:
          should = h || p;
          break;
        case SweepKind::capacity:
          break;
      }
      if (should != victims.contains(s.record.id)) ++violations;
    }
  }
};

Outcome criterion6() {
  Outcome o;
  std::size_t sweeps = 0;
  for (auto mode : {DeletionMode::history, DeletionMode::periodic, DeletionMode::combined}) {
    for (auto seed : kSeeds) {
      auto c = config_for(EvaluatorSpec::coarse(kCoarse1Threshold), seed);
      c.deletion.mode = mode;
      c.deletion.alpha = 0;
      c.deletion.min_retrievals_n = 5;
      c.deletion.beta = 0.5;
      Simulation sim(c);
      SweepAudit audit;
      sim.set_sweep_observer(std::ref(audit));
      sim.run();
      sweeps += audit.sweeps;
      o.check(audit.violations == 0, std::string(to_string(mode)) + " run on seed " + std::to_string(seed) + ": " +
                                         std::to_string(audit.violations) + " violations");
      for (const auto& s : sim.bank().slots()) {
        if (mode != DeletionMode::periodic && audit.history_hit(s.ledger)) {
          o.check(false, "history-eligible record survived at end of run");
        }
      }
    }
  }

  std::mt19937_64 gen(2024);
  std::size_t random_banks = 0;
  for (int trial = 0; trial < 500; ++trial, ++random_banks) {
    MemoryBank bank(2);
    const std::vector<double> f{1.0, 0.5};
    const std::int64_t horizon = 30;
    for (std::size_t i = 0, size = 1 + gen() % 80; i < size; ++i) {
      const auto id = bank.insert_record(f, 0.0, std::nullopt, 0, Origin::initial);
      for (std::int64_t s = 1; s <= horizon; ++s) {
        if (gen() % 3 == 0) {
          bank.log_retrieval(id, s);
          bank.log_utility(id, s, static_cast<double>(gen() % 2));
        }
      }
    }
    SweepAudit audit;
    audit.n = 1 + gen() % 10;
    audit.beta = (gen() % 11) / 10.0;
    const std::int64_t t_prev = static_cast<std::int64_t>(gen() % horizon);
    audit(SweepEvent{horizon, SweepKind::history, t_prev, &bank, history_victims(bank, audit.n, audit.beta)});
    audit(SweepEvent{horizon, SweepKind::periodic, t_prev, &bank, periodic_victims(bank, horizon, t_prev, 0)});
    audit(SweepEvent{horizon, SweepKind::combined, t_prev, &bank,
                     combined_victims(bank, horizon, t_prev, 0, audit.n, audit.beta)});
    o.check(audit.violations == 0, "randomized ledger trial " + std::to_string(trial) + " violated");
  }
  o.note(std::to_string(sweeps) + " full-run sweeps and " + std::to_string(random_banks) +
         " randomized banks audited");
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::size_t wins = 0;
  for (auto seed : kSeeds) {
    auto c = config_for(EvaluatorSpec::coarse(kCoarse1Threshold), seed);
    c.deletion.mode = DeletionMode::history;
    c.deletion.min_retrievals_n = 5;
    c.deletion.beta = 0.5;
    const auto result = run_simulation(c);
    const auto split = deleted_vs_retained(result.final_bank, result.deletion_log, result.environment, 5);
    const bool win = split.mean_deleted > split.mean_retained;
    wins += win;
    o.note("seed " + std::to_string(seed) + " deleted " + fmt("%.3f", split.mean_deleted) + " retained " +
           fmt("%.3f", split.mean_retained));
  }
  o.check(wins >= 4, "deleted error above retained on only " + std::to_string(wins) + " seeds");
  return o;
}

Outcome criterion8() {
  Outcome o;
  std::size_t events = 0;
  for (auto seed : kSeeds) {
    auto c = config_for(EvaluatorSpec::add_all(), seed);
    c.deletion.mode = DeletionMode::capacity;
    c.deletion.capacity = 100;
    Simulation sim(c);
    std::size_t bad = 0;
    sim.set_sweep_observer([&](const SweepEvent& e) {
      if (e.kind != SweepKind::capacity) return;
      ++events;
      if (e.victims.size() != 1 || e.bank->size() != 101) {
        ++bad;
        return;
      }
      // Minimum mean utility, unretrieved records neutral, oldest on ties.
      double lowest = INFINITY;
      RecordId expect{};
      for (const auto& s : e.bank->slots()) {
        const auto m = s.ledger.mean_utility();
        const double score = m ? *m : kUnretrievedUtility;
        if (score < lowest) {
          lowest = score;
          expect = s.record.id;
        }
      }
      if (e.victims.front() != expect) ++bad;
    });
    while (!sim.finished()) {
      if (sim.step().mem_size_after > 100) ++bad;
    }
    o.check(bad == 0, "seed " + std::to_string(seed) + ": " + std::to_string(bad) + " violations");
  }
  o.note(std::to_string(events) + " over-capacity events, each removing one minimum-utility record");
  return o;
}

Outcome criterion9() {
  Outcome o;
  std::mt19937_64 gen(9);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<TaskInstance> tasks;
    for (int i = 0; i < 600; ++i) {
      TaskInstance t;
      t.x.resize(6);
      const double centre = -5.0 + 5.0 * (gen() % 3);
      for (auto& v : t.x) v = centre + normal(gen);
      t.y = i;
      tasks.push_back(t);
    }
    const auto shifted = make_shifted_stream(tasks, 3, trial);
    std::vector<double> ys;
    for (const auto& t : shifted.tasks) ys.push_back(t.y);
    std::sort(ys.begin(), ys.end());
    bool perm = ys.size() == tasks.size();
    for (std::size_t i = 0; perm && i < ys.size(); ++i) perm = ys[i] == static_cast<double>(i);
    o.check(perm, "not a permutation in trial " + std::to_string(trial));

    std::set<std::size_t> closed;
    bool contiguous = true;
    for (std::size_t i = 1; i < shifted.labels.size(); ++i) {
      if (shifted.labels[i] != shifted.labels[i - 1]) {
        closed.insert(shifted.labels[i - 1]);
        if (closed.contains(shifted.labels[i])) contiguous = false;
      }
    }
    // One block per blob: the mean feature value identifies the blob.
    std::size_t blocks = 1;
    for (std::size_t i = 1; i < shifted.labels.size(); ++i) blocks += shifted.labels[i] != shifted.labels[i - 1];
    std::map<std::size_t, std::set<long>> centres;
    for (std::size_t i = 0; i < shifted.tasks.size(); ++i) {
      double m = 0;
      for (double v : shifted.tasks[i].x) m += v / 6.0;
      centres[shifted.labels[i]].insert(std::lround(m / 5.0));
    }
    bool pure = true;
    for (const auto& [label, set] : centres) pure = pure && set.size() == 1;
    o.check(contiguous && blocks == 3 && pure, "blocks not contiguous per blob in trial " + std::to_string(trial));
  }

  for (auto seed : kSeeds) {
    auto c = config_for(EvaluatorSpec::strict(), seed);
    const auto run = run_shifted(c, 3);
    const auto blocks = block_success_rates(run.result.traces, run.labels);
    std::size_t steps = 0;
    bool ok = run.result.traces.size() == kSteps && !blocks.empty();
    for (const auto& b : blocks) {
      steps += b.steps;
      ok = ok && b.success_rate >= 0.0 && b.success_rate <= 1.0;
    }
    o.check(ok && steps == kSteps, "shifted run malformed on seed " + std::to_string(seed));
    if (seed == 0) {
      std::string rates;
      for (const auto& b : blocks) rates += (rates.empty() ? "" : "/") + fmt("%.3f", b.success_rate);
      o.note("seed 0 per-block success " + rates);
    }
  }
  return o;
}

double naive_cosine(const std::vector<double>& u, const std::vector<double>& v) {
  long double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<long double>(u[i]) * v[i];
    nu += static_cast<long double>(u[i]) * u[i];
    nv += static_cast<long double>(v[i]) * v[i];
  }
  return static_cast<double>(dot / std::sqrt(nu * nv));
}

// Gaussian elimination on the ridge normal equations in extended precision,
// then w.x.
double solve_reasoning(const std::vector<double>& x, const std::vector<std::vector<double>>& xs,
                       const std::vector<double>& ys, double ridge) {
  using Real = long double;
  const std::size_t d = x.size();
  std::vector<std::vector<Real>> a(d, std::vector<Real>(d + 1, 0.0L));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) a[r][c] += static_cast<Real>(xs[i][r]) * xs[i][c];
      a[r][d] += static_cast<Real>(xs[i][r]) * ys[i];
    }
  }
  for (std::size_t r = 0; r < d; ++r) a[r][r] += ridge;
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < d; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col) continue;
      const Real f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= d; ++c) a[r][c] -= f * a[col][c];
    }
  }
  Real out = 0;
  for (std::size_t r = 0; r < d; ++r) out += a[r][d] / a[r][r] * x[r];
  return static_cast<double>(out);
}

Outcome criterion10() {
  Outcome o;
  std::mt19937_64 gen(10);
  std::normal_distribution<double> normal;

  std::size_t topk_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t size = 1 + gen() % 200;
    MemoryBank bank(6);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < size; ++i) {
      std::vector<double> r(6);
      for (auto& v : r) v = std::round(normal(gen) * 2.0) / 2.0;
      r[0] += 0.25;
      rows.push_back(r);
      bank.insert_record(r, 0.0, std::nullopt, 0, Origin::initial);
    }
    std::vector<double> q(6);
    for (auto& v : q) v = normal(gen);
    const std::size_t k = 1 + gen() % 12;
    std::vector<std::pair<double, std::size_t>> brute;
    for (std::size_t i = 0; i < size; ++i) brute.push_back({cosine_similarity(q, rows[i]), i});
    std::sort(brute.begin(), brute.end(),
              [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
    const auto got = retrieve_top_k(bank, q, k, cosine_similarity);
    if (got.size() != std::min(k, size)) {
      ++topk_bad;
      continue;
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (to_underlying(got[i].id) != brute[i].second || got[i].score != brute[i].first) {
        ++topk_bad;
        break;
      }
    }
  }
  o.check(topk_bad == 0, std::to_string(topk_bad) + " top-K mismatches");

  double worst_reason = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto env = generate_environment(trial, 6, kDefaultMeans, 0.0);
    const std::size_t n = 6 + gen() % 10;
    std::vector<std::vector<double>> xs(n, std::vector<double>(6));
    std::vector<double> ys;
    std::vector<Demonstration> demos;
    for (auto& x : xs) {
      for (auto& v : x) v = normal(gen);
      ys.push_back(env.ground_truth(x));
    }
    for (std::size_t i = 0; i < n; ++i) demos.push_back({xs[i], ys[i]});
    std::vector<double> q(6);
    for (auto& v : q) v = normal(gen);
    worst_reason = std::max(worst_reason, std::abs(reasoning_estimate(q, demos, 0.0) - solve_reasoning(q, xs, ys, 0.0)));
    worst_reason = std::max(worst_reason, std::abs(reasoning_estimate(q, demos, 0.0) - env.ground_truth(q)));
    worst_reason = std::max(worst_reason, std::abs(reasoning_estimate(q, demos, 0.01) - solve_reasoning(q, xs, ys, 0.01)));
  }
  o.check(worst_reason <= 1e-9, "reasoning deviates by " + fmt("%.3g", worst_reason));

  double worst_sim = 0;
  const FeatureSchema schema(std::vector<FeatureKind>(6, FeatureKind::continuous));
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> u(6), v(6);
    for (auto& x : u) x = normal(gen);
    for (auto& x : v) x = normal(gen);
    const double gamma = 0.05 + (trial % 20) * 0.1;
    long double d2 = 0, change = 0;
    for (int i = 0; i < 6; ++i) {
      d2 += static_cast<long double>(u[i] - v[i]) * (u[i] - v[i]);
      change += std::min(1.0, std::abs(u[i] - v[i]) / std::max(std::abs(u[i]), std::abs(v[i])));
    }
    worst_sim = std::max(worst_sim, std::abs(cosine_similarity(u, v) - naive_cosine(u, v)));
    worst_sim = std::max(worst_sim, std::abs(rbf_similarity(u, v, gamma) - static_cast<double>(std::exp(-gamma * d2))));
    worst_sim = std::max(worst_sim, std::abs(rbf_similarity(u[0], v[0], gamma) -
                                             std::exp(-gamma * (u[0] - v[0]) * (u[0] - v[0]))));
    worst_sim = std::max(worst_sim, std::abs(feature_relative_similarity(u, v, schema) -
                                             static_cast<double>(1.0L - change / 6.0L)));
  }
  o.check(worst_sim <= 1e-9, "similarity deviates by " + fmt("%.3g", worst_sim));
  o.note("1000 top-K banks, 1500 reasoning solves (max dev " + fmt("%.2g", worst_reason) +
         "), 40000 similarity checks (max dev " + fmt("%.2g", worst_sim) + ")");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"memory-size laws", criterion1},
      {"evaluator monotonicity", criterion2},
      {"policy ordering", criterion3},
      {"experience-following", criterion4},
      {"error propagation", criterion5},
      {"deletion soundness", criterion6},
      {"deleted-vs-retained quality", criterion7},
      {"capacity constraint", criterion8},
      {"distribution shift", criterion9},
      {"oracle equivalences", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
