#pragma once

/// REINFORCE training of the preference-conditioned policy with a mean
/// rollout baseline and Adam.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "mocoguard/core.hpp"
#include "mocoguard/instance_gen.hpp"
#include "mocoguard/policy.hpp"
#include "mocoguard/scalarize.hpp"

namespace mocoguard {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
  public:
    Adam(const tape::ParamSet& like, AdamConfig cfg = {});
    /// params -= lr * m_hat / (sqrt(v_hat) + eps).
    void step(tape::ParamSet& params, const tape::ParamSet& grads);
    std::uint64_t steps() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

  private:
    AdamConfig cfg_;
    tape::ParamSet m_, v_;
    std::uint64_t t_ = 0;
};

/// One (instance, preference) training item with its rollout seed.
struct StepSample {
    const Instance* instance = nullptr;
    Preference preference;
    std::uint64_t seed = 0;
};

struct StepMetrics {
    double mean_loss = 0.0;
    double mean_abs_advantage = 0.0;
    double grad_norm = 0.0;
};

struct LossOptions {
    Scalarization scalarization = Scalarization::WeightedSum;
    /// Running ideal point; required for Tchebycheff. The rollouts of the
    /// step are observed into it before the losses are computed.
    IdealPoint* ideal = nullptr;
    /// Added to every rollout loss.
    double loss_offset = 0.0;
};

/// L_j - mean(L).
std::vector<double> advantages(std::span<const double> losses);

struct PolicyGradient {
    tape::ParamSet grads;
    StepMetrics metrics;
};

/// Mean over samples and rollouts of advantage * grad log p, without
/// updating anything. Samples run in parallel; the reduction is ordered.
PolicyGradient policy_gradient(const Policy& policy, std::span<const StepSample> samples, int M,
                               const LossOptions& loss = {});

/// policy_gradient followed by an Adam update. A non-finite gradient
/// throws NumericError before the parameters change.
StepMetrics reinforce_step(Policy& policy, Adam& adam, std::span<const StepSample> samples, int M,
                           const LossOptions& loss = {});

double grad_norm(const tape::ParamSet& grads);

struct TrainConfig {
    ProblemKind kind = ProblemKind::BiTSP;
    std::size_t n = 10;
    int epochs = 50;
    std::size_t epoch_size = 512;
    std::size_t batch = 32;
    int rollouts = 8;
    /// Preference grid resolution; 0 selects 100 (m = 2) or 13 (m = 3).
    int grid_h = 0;
    Scalarization scalarization = Scalarization::WeightedSum;
    AdamConfig adam;
    std::uint64_t seed = 1;
    PolicyConfig policy;
    GenOptions gen;
    std::size_t val_instances = 10;
    int val_grid_h = 10;
    /// Validate every this many steps (and after the last step); 0 = once
    /// per epoch.
    int val_every = 0;

    std::size_t batches_per_epoch() const { return epoch_size / batch; }
    PreferenceGrid grid() const;
    void validate() const;
    nlohmann::json to_json() const;
    /// Missing keys keep their defaults.
    static TrainConfig from_json(const nlohmann::json& j);
};

int default_grid_resolution(ProblemKind kind);

/// Clean data and preference draws of one epoch. Shared by clean and
/// adversarial training so both consume identical streams.
struct EpochPlan {
    std::vector<Instance> clean;
    /// Per mini-batch: indices into `clean` and the grid preference index.
    std::vector<std::vector<std::size_t>> batches;
    std::vector<std::size_t> pref_index;
};

EpochPlan plan_epoch(const TrainConfig& cfg, int epoch);

/// Rollout seed of sample i in mini-batch b of an epoch.
std::uint64_t rollout_seed(std::uint64_t seed, int epoch, std::size_t batch, std::size_t i);

struct TrainLogRow {
    std::uint64_t step = 0;
    double mean_loss = 0.0;
    double grad_norm = 0.0;
    /// NaN when the step was not validated.
    double val_hv = 0.0;
};

void write_train_log(const std::filesystem::path& path, std::span<const TrainLogRow> rows);

/// Called after every parameter update with the global step (1-based).
using StepCallback = std::function<void(std::uint64_t step, const Policy& policy, const StepMetrics& m)>;

/// Held-out validation instances and the fixed reference point.
struct Validator {
    std::vector<Instance> instances;
    PreferenceGrid grid;
    ObjectiveVector reference;

    /// Reference point from the fronts of `initial` (1.1 x nadir rule).
    static Validator make(const TrainConfig& cfg, const Policy& initial);
    double mean_hv(const Policy& policy) const;
};

struct TrainResult {
    Policy best;
    Policy last;
    double best_val_hv = 0.0;
    std::vector<TrainLogRow> log;
    ObjectiveVector val_reference;
};

/// Epochs of fresh uniform mini-batches, one grid preference per mini-batch;
/// keeps the best checkpoint by validation HV (ties keep the earlier one).
TrainResult train_clean(const TrainConfig& cfg, std::optional<Policy> init = std::nullopt,
                        const StepCallback& on_step = {});

}  // namespace mocoguard
