#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfo/data.hpp"
#include "sfo/model.hpp"

namespace sfo {

struct TrainConfig {
  double lr = 1e-3;
  std::size_t epochs = 200;
  std::size_t batch = 32;
  std::uint64_t seed = 0;
  double split = 0.9;          // train fraction after the seeded shuffle
  double weight_decay = 0.0;   // fixed at 0; recorded in every metrics file

  std::string to_json() const;
  static TrainConfig from_json(const std::string& json);
};

struct AdamState {
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double eps = 1e-8;

  std::vector<std::vector<double>> m, v;
  std::size_t step = 0;

  static AdamState init(const std::vector<Tensor*>& params);
};

// One bias-corrected Adam update; grads are laid out like params.
void adam_step(const std::vector<Tensor*>& params,
               const std::vector<std::vector<double>>& grads, AdamState& state,
               double lr);

struct EpochStats {
  double train_rel_l2 = 0.0;  // percent, mean over the epoch's batches
  double val_rel_l2 = 0.0;    // percent
};

struct TrainResult {
  std::vector<EpochStats> history;
  bool diverged = false;
  std::vector<std::size_t> train_indices;  // post-shuffle split
  std::vector<std::size_t> val_indices;
};

// Deterministic given (model config, train config): shuffles once for the
// 90/10 split, then per-epoch over the training indices; per-sample tapes
// with fixed-order gradient reduction. Aborts when a batch loss exceeds 1e3.
TrainResult train(SFOModel& model, const Dataset& ds, const TrainConfig& cfg);

struct EvalMetrics {
  double rel_l2 = 0.0;  // percent over the evaluated samples
  BandErrors bands;
  std::vector<double> coeff_norms;

  std::string to_json() const;
};

EvalMetrics evaluate(const SFOModel& model, const Dataset& ds);
EvalMetrics evaluate_subset(const SFOModel& model, const Dataset& ds,
                            const std::vector<std::size_t>& indices);

// Shared split so training and evaluation agree on the held-out samples.
void split_indices(std::size_t N, double split, std::uint64_t seed,
                   std::vector<std::size_t>& train_out,
                   std::vector<std::size_t>& val_out);

// One row of an ablation table.
struct ExperimentRow {
  std::string factor;
  std::string value;
  std::uint64_t seed = 0;
  double val_rel_l2 = 0.0;
  std::size_t param_count = 0;
  double wall_seconds = 0.0;
  std::size_t batch = 0;
  double weight_decay = 0.0;
};

// CSV with a fixed header; `include_timing` off yields byte-stable output.
std::string experiment_csv(const std::vector<ExperimentRow>& rows,
                           bool include_timing = true);

// Experiment drivers: each trains one model per (arm, seed) on the shared
// dataset, varying only the ablated factor.
std::vector<ExperimentRow> ablate_basis(const SFOConfig& base,
                                        const TrainConfig& tcfg,
                                        const Dataset& ds,
                                        const std::vector<BasisKind>& kinds,
                                        const std::vector<std::uint64_t>& seeds);

std::vector<ExperimentRow> sweep_rank(const SFOConfig& base,
                                      const TrainConfig& tcfg,
                                      const Dataset& ds,
                                      const std::vector<std::size_t>& Ls,
                                      const std::vector<std::uint64_t>& seeds);

std::vector<ExperimentRow> sweep_width(const SFOConfig& base,
                                       const TrainConfig& tcfg,
                                       const Dataset& ds,
                                       const std::vector<std::size_t>& widths,
                                       const std::vector<std::uint64_t>& seeds);

std::vector<ExperimentRow> tied_vs_multi(const SFOConfig& base,
                                         const TrainConfig& tcfg,
                                         const Dataset& ds,
                                         const std::vector<std::uint64_t>& seeds);

std::vector<ExperimentRow> glu_vs_mlp(const SFOConfig& base,
                                      const TrainConfig& tcfg,
                                      const Dataset& ds,
                                      const std::vector<std::uint64_t>& seeds);

// Evaluates a trained model on uniformly coarsened copies of the dataset's
// validation split after rebuilding the basis at the coarse resolution.
std::vector<ExperimentRow> resolution_transfer(
    const SFOModel& model, const Dataset& ds, const TrainConfig& tcfg,
    const std::vector<std::size_t>& strides);

}  // namespace sfo
