#include "memlab/evaluators.hpp"

#include <cmath>
#include <stdexcept>

namespace memlab {

std::string_view to_string(EvaluatorKind kind) noexcept {
  switch (kind) {
    case EvaluatorKind::fixed:
      return "fixed";
    case EvaluatorKind::add_all:
      return "add_all";
    case EvaluatorKind::coarse:
      return "coarse";
    case EvaluatorKind::strict:
      return "strict";
  }
  return "fixed";
}

EvaluatorKind evaluator_kind_from_string(std::string_view text) {
  if (text == "fixed") return EvaluatorKind::fixed;
  if (text == "add_all") return EvaluatorKind::add_all;
  if (text == "coarse") return EvaluatorKind::coarse;
  if (text == "strict") return EvaluatorKind::strict;
  throw std::invalid_argument("unknown evaluator kind '" + std::string(text) + "'");
}

void EvaluatorSpec::validate() const {
  const bool needs_threshold = kind == EvaluatorKind::coarse || kind == EvaluatorKind::strict;
  if (needs_threshold && !threshold) {
    throw std::invalid_argument(std::string(to_string(kind)) + " evaluator requires a threshold");
  }
  if (!needs_threshold && threshold) {
    throw std::invalid_argument(std::string(to_string(kind)) + " evaluator takes no threshold");
  }
  if (threshold && !(*threshold > 0.0 && std::isfinite(*threshold))) {
    throw std::invalid_argument("evaluator threshold must be positive and finite");
  }
}

Verdict evaluate(const EvaluatorSpec& spec, double prediction, double truth,
                 double utility_threshold) {
  if (!std::isfinite(prediction) || !std::isfinite(truth)) {
    throw std::invalid_argument("evaluate: non-finite prediction or truth");
  }
  spec.validate();
  Verdict v;
  v.abs_error = std::abs(prediction - truth);
  switch (spec.kind) {
    case EvaluatorKind::fixed:
      v.accept = false;
      break;
    case EvaluatorKind::add_all:
      v.accept = true;
      break;
    case EvaluatorKind::coarse:
    case EvaluatorKind::strict:
      v.accept = v.abs_error <= *spec.threshold;
      break;
  }
  v.utility = v.abs_error <= utility_threshold ? 1.0 : 0.0;
  return v;
}

bool success(double prediction, double truth) {
  if (!std::isfinite(prediction) || !std::isfinite(truth)) {
    throw std::invalid_argument("success: non-finite prediction or truth");
  }
  return std::abs(prediction - truth) <= kSuccessTolerance;
}

}  // namespace memlab
