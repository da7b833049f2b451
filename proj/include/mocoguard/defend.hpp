#pragma once

/// Dynamic preference-augmented defense: adversarial training on a mix of
/// clean and attacked instances, with perturbed preferences ranked by their
/// Tchebycheff cost and training under the hardest one.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "mocoguard/attack.hpp"
#include "mocoguard/train.hpp"

namespace mocoguard {

struct DpdConfig {
    /// Data, optimizer and rollout settings; train.epochs is the DPD epoch count.
    TrainConfig train;
    double eps = 0.1;
    int n_perturb = 8;
    int mix_clean = 1;
    int mix_hard = 1;
    /// Regenerate the hard pool with PAA at the start of every epoch.
    bool attack = true;
    /// Perturb and select preferences; off trains on the mini-batch preference.
    bool augment = true;
    /// Scalarization of the training loss (Tchebycheff = recalibrated loss).
    Scalarization loss = Scalarization::Tchebycheff;
    /// Clean instances attacked under each grid preference per epoch.
    std::size_t hard_per_pref = 2;
    AttackConfig attack_cfg;

    void validate() const;
    nlohmann::json to_json() const;
    /// Missing keys keep their defaults; "train" and "attack" are nested.
    static DpdConfig from_json(const nlohmann::json& j);
};

/// lambda + U(-eps, eps)^m per draw, negatives clamped to 0, renormalized;
/// an all-zero draw falls back to lambda.
std::vector<Preference> perturb_preferences(const Preference& lambda, int count, double eps, std::uint64_t seed);

/// softmax(-tch) with max-shift. Throws NumericError on non-finite input.
std::vector<double> relevance_scores(std::span<const double> tch);

/// Index of the smallest score, lowest index on ties. Throws on empty input.
std::size_t select_adversarial(std::span<const double> scores);
const Preference& select_adversarial(std::span<const Preference> prefs, std::span<const double> scores);

/// Tchebycheff cost under the selected preference.
double recalibrated_loss(std::span<const double> f, const Preference& lambda_adv, std::span<const double> ideal);

/// Hard and clean counts of a mini-batch of size B under the mix ratio.
struct BatchSplit {
    std::size_t clean = 0;
    std::size_t hard = 0;
};
BatchSplit stratified_split(std::size_t batch, int mix_clean, int mix_hard, bool have_hard);

/// Grid index closest (L1) to lambda; ties resolve to the lower index.
std::size_t nearest_grid_index(const PreferenceGrid& grid, std::span<const double> lambda);

struct DpdEpochMetrics {
    std::size_t steps = 0;
    std::size_t hard_pool = 0;
    std::size_t hard_used = 0;
    std::size_t clean_used = 0;
    double mean_loss = 0.0;
    double mean_selected_tch = 0.0;
    std::vector<TrainLogRow> log;
};

/// Mean over the instances of the best greedy Tchebycheff cost under each
/// preference, using `ideal` after observing every greedy rollout.
std::vector<double> estimate_tch(const Policy& policy, std::span<const Instance* const> instances,
                                 std::span<const Preference> prefs, int starts, IdealPoint& ideal);

/// One epoch of adversarial training. `hard_pool` holds the current hard
/// set (attacked and / or imported). `step` is the global step counter.
DpdEpochMetrics dpd_epoch(Policy& policy, Adam& adam, const DpdConfig& cfg, int epoch, const HardInstanceSet& hard_pool,
                          std::uint64_t& step, const StepCallback& on_step = {});

struct DpdResult {
    Policy policy;
    std::vector<DpdEpochMetrics> epochs;
    std::vector<TrainLogRow> log;
};

/// cfg.train.epochs epochs starting from `init`. When cfg.attack is set the
/// hard pool is rebuilt each epoch by attacking that epoch's clean data with
/// the current parameters; `imported` records are always added.
DpdResult dpd_train(const DpdConfig& cfg, Policy init, const HardInstanceSet* imported = nullptr,
                    const StepCallback& on_step = {});

/// Reads an externally generated hard set (provenance imported or paa).
HardInstanceSet import_hard_set(const std::filesystem::path& path);

}  // namespace mocoguard
