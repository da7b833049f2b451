#pragma once

/// Preference-based adversarial attack: per-preference gradient ascent on
/// instance features followed by min-max projection, and hard-set assembly.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mocoguard/core.hpp"
#include "mocoguard/eval.hpp"
#include "mocoguard/policy.hpp"
#include "mocoguard/scalarize.hpp"

namespace mocoguard {

struct AttackConfig {
    double alpha = 0.01;
    int steps = 3;
    int rollouts = 8;
    /// Scalarization of the attacked loss L.
    Scalarization scalarization = Scalarization::WeightedSum;
    /// Grid resolution; 0 selects the default for the problem kind.
    int grid_h = 0;
    std::uint64_t seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
    /// Missing keys keep their defaults.
    static AttackConfig from_json(const nlohmann::json& j);
};

struct AttackStepInfo {
    /// Value of the attacked objective before the step.
    double objective = 0.0;
    double baseline = 0.0;
    double grad_norm = 0.0;
};

/// Attacked objective mean_j (L_j / b) * log p_j of M sampled rollouts, with
/// L_j recomputed from the feature leaf `x` and b = mean_j L_j. Throws
/// NumericError when b is zero.
tape::Var attack_objective(const BoundPolicy& net, const Instance& inst, tape::Var x, const Preference& pref, int M,
                           std::uint64_t seed, Scalarization s, double* baseline = nullptr);

/// Gradient of attack_objective with respect to the features.
Matrix attack_gradient(const Policy& policy, const Instance& inst, const Preference& pref, int M, std::uint64_t seed,
                       Scalarization s, AttackStepInfo* info = nullptr);

/// x' = project(x + alpha * grad). Depot, demands and capacities are kept;
/// the id is kept and the provenance becomes paa.
Instance paa_step(const Policy& policy, const Instance& x, const Preference& pref, double alpha, int M,
                  std::uint64_t seed, Scalarization s = Scalarization::WeightedSum, AttackStepInfo* info = nullptr);

struct HardRecord {
    Instance instance;
    std::vector<double> lambda;
    std::size_t lambda_index = 0;
    std::string source_id;
    std::string checkpoint;
};

struct HardInstanceSet {
    std::string checkpoint;
    std::vector<HardRecord> records;

    std::size_t size() const { return records.size(); }
    std::vector<Instance> instances() const;
    /// Record indices grouped by lambda_index.
    std::map<std::size_t, std::vector<std::size_t>> by_preference() const;
};

/// Substream seed of one (preference, instance) attack.
std::uint64_t attack_seed(std::uint64_t seed, std::size_t lambda_index, const std::string& instance_id);

/// Attacks each listed (source index, grid index) pair for cfg.steps steps.
/// Parallel across pairs; records follow the pair order.
HardInstanceSet paa_attack_pairs(const Policy& policy, const std::string& checkpoint_id,
                                 std::span<const Instance> sources, const PreferenceGrid& grid,
                                 std::span<const std::pair<std::size_t, std::size_t>> pairs, const AttackConfig& cfg);

/// Every clean instance under every grid preference, grouped by preference.
HardInstanceSet paa_attack(const Policy& policy, const std::string& checkpoint_id, std::span<const Instance> clean,
                           const PreferenceGrid& grid, const AttackConfig& cfg);

nlohmann::json hard_record_to_json(const HardRecord& r);
/// Validates the instance and requires lambda on the simplex with m entries.
HardRecord hard_record_from_json(const nlohmann::json& j);

void write_hard_set(const std::filesystem::path& path, const HardInstanceSet& set);
/// Reads a hard set; records must carry provenance paa or imported.
HardInstanceSet read_hard_set(const std::filesystem::path& path);

/// Greedy model fronts on `instances` against oracle fronts, shared r.
Comparison evaluate_attack(const Policy& policy, std::span<const Instance> instances, const PreferenceGrid& grid,
                           std::span<const double> reference = {}, const OracleOptions& oracle = {});

}  // namespace mocoguard
