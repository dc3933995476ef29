#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace memlab {

enum class EvaluatorKind { fixed, add_all, coarse, strict };

std::string_view to_string(EvaluatorKind kind) noexcept;
EvaluatorKind evaluator_kind_from_string(std::string_view text);

// Addition gate. coarse and strict carry an absolute-error threshold.
struct EvaluatorSpec {
  EvaluatorKind kind = EvaluatorKind::fixed;
  std::optional<double> threshold;

  static EvaluatorSpec fixed() { return {EvaluatorKind::fixed, std::nullopt}; }
  static EvaluatorSpec add_all() { return {EvaluatorKind::add_all, std::nullopt}; }
  static EvaluatorSpec coarse(double threshold) { return {EvaluatorKind::coarse, threshold}; }
  static EvaluatorSpec strict(double threshold = 1.0) { return {EvaluatorKind::strict, threshold}; }

  void validate() const;
};

// RegAgent thresholds for the three coarse judges.
inline constexpr double kCoarse1Threshold = 1.6;
inline constexpr double kCoarse2Threshold = 1.4;
inline constexpr double kCoarse3Threshold = 1.2;
inline constexpr double kStrictThreshold = 1.0;
// |prediction - truth| <= 1 counts as a successful execution.
inline constexpr double kSuccessTolerance = 1.0;

struct Verdict {
  bool accept = false;
  double utility = 0.0;
  double abs_error = 0.0;
};

// utility_threshold decides the ledger utility (1 when the error is within
// it); it defaults to the task success tolerance, independent of the gate.
Verdict evaluate(const EvaluatorSpec& spec, double prediction, double truth,
                 double utility_threshold = kSuccessTolerance);

bool success(double prediction, double truth);

}  // namespace memlab
