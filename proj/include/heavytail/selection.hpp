#pragma once

#include "heavytail/models.hpp"
#include "heavytail/optimizer.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace heavytail {

enum class HyperParameter { clip_level, delay, reg_weight };

std::string to_string(HyperParameter p);
HyperParameter parse_hyper_parameter(const std::string& name);

struct CandidateGrid {
  HyperParameter parameter = HyperParameter::clip_level;
  std::vector<double> values;
  /// Fraction of the stream used for evaluation.
  double q = 0.2;

  void validate() const;
};

struct SelectionResult {
  std::size_t winner_index = 0;
  /// Mean held-out loss per candidate.
  std::vector<double> scores;
};

/// Number of evaluated steps, ceil(q n).
std::size_t validation_window(std::size_t n, double q);

/// Copy of `base` with one hyperparameter replaced. For huber, reg_weight sets
/// the residual threshold.
OptimizerConfig with_value(const OptimizerConfig& base, HyperParameter parameter, double value);

std::vector<OptimizerConfig> expand_grid(const OptimizerConfig& base, const CandidateGrid& grid);

/// Cartesian product of several grids; the last grid varies fastest.
std::vector<OptimizerConfig> product_grid(const OptimizerConfig& base,
                                          std::span<const CandidateGrid> grids);

/// argmin with ties broken towards the smallest index.
std::size_t argmin_index(std::span<const double> scores);

/// Runs every candidate in lockstep over the same n samples. During the last
/// ceil(q n) steps each candidate's loss on x_t is recorded before x_t is used
/// for its update; the winner minimizes the mean recorded loss.
SelectionResult sequential_validate(const LossModelPtr& model,
                                    std::span<const OptimizerConfig> candidates,
                                    SampleStream& stream, std::size_t n, double q = 0.2);

SelectionResult sequential_validate(const LossModelPtr& model, const OptimizerConfig& base,
                                    const CandidateGrid& grid, SampleStream& stream,
                                    std::size_t n);

enum class GridTask { mean, regression };

/// Candidate sets:
///   clip level   c sqrt(N p), c = 0.01, 0.06, ..., 1.01   (both tasks)
///   delay        0.1 p, p, 10 p                          (regression)
///   reg weight   c sqrt(N p), c = 0.001, 0.006, ..., 0.101 (regression)
std::vector<CandidateGrid> default_grids(GridTask task, std::size_t n, std::size_t p);

}  // namespace heavytail
