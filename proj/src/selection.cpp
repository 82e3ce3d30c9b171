#include "heavytail/selection.hpp"

#include <cmath>
#include <stdexcept>

namespace heavytail {

std::string to_string(HyperParameter p) {
  switch (p) {
    case HyperParameter::clip_level:
      return "lambda";
    case HyperParameter::delay:
      return "gamma";
    case HyperParameter::reg_weight:
      return "reg_weight";
  }
  return "?";
}

HyperParameter parse_hyper_parameter(const std::string& name) {
  if (name == "lambda" || name == "clip_level") return HyperParameter::clip_level;
  if (name == "gamma" || name == "delay") return HyperParameter::delay;
  if (name == "reg_weight" || name == "reg") return HyperParameter::reg_weight;
  throw std::invalid_argument("unknown hyperparameter '" + name + "'");
}

void CandidateGrid::validate() const {
  if (values.empty()) throw std::invalid_argument("candidate grid is empty");
  if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("validation fraction q must lie in (0, 1)");
}

std::size_t validation_window(std::size_t n, double q) {
  // Guard against q * n landing a hair above an integer.
  const double raw = q * static_cast<double>(n);
  const double rounded = std::round(raw);
  const double w = std::abs(raw - rounded) < 1e-9 ? rounded : std::ceil(raw);
  return static_cast<std::size_t>(w);
}

OptimizerConfig with_value(const OptimizerConfig& base, HyperParameter parameter, double value) {
  OptimizerConfig c = base;
  switch (parameter) {
    case HyperParameter::clip_level:
      c.clip_level = value;
      break;
    case HyperParameter::delay:
      c.schedule = StepSchedule(base.schedule.tau_l(), value);
      break;
    case HyperParameter::reg_weight:
      if (c.regularizer.kind == Regularizer::Kind::huber) {
        c.regularizer.threshold = value;
      } else {
        c.regularizer.weight = value;
      }
      break;
  }
  return c;
}

std::vector<OptimizerConfig> expand_grid(const OptimizerConfig& base, const CandidateGrid& grid) {
  grid.validate();
  std::vector<OptimizerConfig> out;
  out.reserve(grid.values.size());
  for (double v : grid.values) out.push_back(with_value(base, grid.parameter, v));
  return out;
}

std::vector<OptimizerConfig> product_grid(const OptimizerConfig& base,
                                          std::span<const CandidateGrid> grids) {
  std::vector<OptimizerConfig> out{base};
  for (const auto& grid : grids) {
    std::vector<OptimizerConfig> next;
    next.reserve(out.size() * grid.values.size());
    for (const auto& c : out) {
      auto expanded = expand_grid(c, grid);
      next.insert(next.end(), expanded.begin(), expanded.end());
    }
    out = std::move(next);
  }
  return out;
}

std::size_t argmin_index(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("argmin of an empty sequence");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    // NaN scores (diverged candidates) never win.
    if (scores[i] < scores[best] || (std::isnan(scores[best]) && !std::isnan(scores[i]))) best = i;
  }
  return best;
}

SelectionResult sequential_validate(const LossModelPtr& model,
                                    std::span<const OptimizerConfig> candidates,
                                    SampleStream& stream, std::size_t n, double q) {
  if (candidates.empty()) throw std::invalid_argument("no candidates to validate");
  if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("validation fraction q must lie in (0, 1)");
  const std::size_t window = validation_window(n, q);
  if (window < 1 || window > n) throw std::invalid_argument("need 1 <= ceil(q n) <= n");

  std::vector<StreamingOptimizer> runs;
  runs.reserve(candidates.size());
  for (const auto& c : candidates) runs.emplace_back(model, c);

  std::vector<double> totals(candidates.size(), 0.0);
  const std::size_t eval_from = n - window;  // 0-based index of the first evaluated sample
  Sample s;
  for (std::size_t t = 0; t < n; ++t) {
    if (!stream.next(s)) throw StreamExhausted(t, n);
    for (std::size_t j = 0; j < runs.size(); ++j) {
      if (t >= eval_from) totals[j] += model->loss(runs[j].param(), s);
      runs[j].step(s);
    }
  }

  SelectionResult result;
  result.scores.resize(totals.size());
  for (std::size_t j = 0; j < totals.size(); ++j) {
    result.scores[j] = totals[j] / static_cast<double>(window);
  }
  result.winner_index = argmin_index(result.scores);
  return result;
}

SelectionResult sequential_validate(const LossModelPtr& model, const OptimizerConfig& base,
                                    const CandidateGrid& grid, SampleStream& stream,
                                    std::size_t n) {
  const auto candidates = expand_grid(base, grid);
  return sequential_validate(model, candidates, stream, n, grid.q);
}

std::vector<CandidateGrid> default_grids(GridTask task, std::size_t n, std::size_t p) {
  const double scale = std::sqrt(static_cast<double>(n) * static_cast<double>(p));
  const double pd = static_cast<double>(p);
  CandidateGrid lambda{HyperParameter::clip_level, {}, 0.2};
  for (int i = 0; i <= 20; ++i) lambda.values.push_back((0.01 + 0.05 * i) * scale);
  if (task == GridTask::mean) return {lambda};

  CandidateGrid gamma{HyperParameter::delay, {0.1 * pd, pd, 10.0 * pd}, 0.2};
  CandidateGrid reg{HyperParameter::reg_weight, {}, 0.2};
  for (int i = 0; i <= 20; ++i) reg.values.push_back((0.001 + 0.005 * i) * scale);
  return {gamma, lambda, reg};
}

}  // namespace heavytail
