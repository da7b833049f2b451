#pragma once

/// Experiment pipelines behind the command-line tool: probe, attack and
/// defense evaluation, parameter sweeps, and CSV report emission.
///
/// A report is plot-ready CSV preceded by `#` metadata lines that carry the
/// resolved configuration, seeds, checkpoint hashes and reference points.
/// Everything except the wall_s column is a deterministic function of the
/// inputs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mocoguard/attack.hpp"
#include "mocoguard/defend.hpp"
#include "mocoguard/eval.hpp"
#include "mocoguard/instance_gen.hpp"

namespace mocoguard {

struct Report {
    nlohmann::json meta = nlohmann::json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    /// Index of a column; throws ConfigError when absent.
    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

void write_report(const std::filesystem::path& path, const Report& r);
Report read_report(const std::filesystem::path& path);
std::string report_csv(const Report& r);

/// A checkpoint together with its identity tag.
struct NamedPolicy {
    std::string name;
    Policy policy;
    std::string hash;
};

NamedPolicy load_named(const std::filesystem::path& path, std::string name = {});

struct EvalOptions {
    /// Evaluation grid resolution; 0 = default for the problem kind.
    int grid_h = 0;
    /// Greedy starts per preference; 0 = one per node.
    int starts = 0;
    OracleOptions oracle;

    nlohmann::json to_json() const;
};

PreferenceGrid eval_grid(ProblemKind kind, const EvalOptions& opts);

struct ProbeConfig {
    ProblemKind kind = ProblemKind::BiTSP;
    std::size_t n = 10;
    std::size_t count = 200;
    std::vector<double> c_dists{1, 5, 10, 20, 30, 40, 50};
    int clusters = 3;
    std::uint64_t seed = 1;
    EvalOptions eval;

    nlohmann::json to_json() const;
};

/// Gap of the checkpoint against the oracle on GMM instances, one row per
/// c_dist: c_dist, hv_model, hv_oracle, gap, wall_s.
Report run_probe(const NamedPolicy& policy, const ProbeConfig& cfg);

struct AttackEvalConfig {
    AttackConfig attack;
    /// Each clean instance is attacked once, under a grid preference drawn
    /// from its own substream.
    EvalOptions eval;

    nlohmann::json to_json() const;
};

/// Grid preference index attacked for clean instance i.
std::size_t attack_eval_preference(std::uint64_t seed, std::size_t i, std::size_t grid_size);

struct AttackEvalResult {
    Report report;
    std::vector<Instance> attacked;
    std::vector<double> hv_clean;
    std::vector<double> hv_attacked;
    ObjectiveVector reference;
};

/// Rows for the clean set and its PAA counterpart: set, hv_model,
/// hv_oracle, gap, wall_s. Both sets share one reference point.
AttackEvalResult run_attack_eval(const NamedPolicy& policy, const std::vector<Instance>& clean,
                                 const AttackEvalConfig& cfg);

/// Every checkpoint on every named set: checkpoint, set, hv_model,
/// hv_oracle, gap, wall_s. One reference point per set, shared by all
/// checkpoints and the oracle.
Report run_defense_eval(const std::vector<NamedPolicy>& policies,
                        const std::vector<std::pair<std::string, std::vector<Instance>>>& sets,
                        const EvalOptions& eval);

enum class SweepParam { Steps, Alpha, Eps, NPerturb };
SweepParam sweep_param_from_string(const std::string& name);
std::string to_string(SweepParam p);

struct SweepConfig {
    SweepParam param = SweepParam::Steps;
    std::vector<double> values;
    AttackEvalConfig attack_eval;
    /// Used for eps / n_perturb sweeps.
    DpdConfig dpd;
};

/// t and alpha: one attack evaluation per value (param, value, hv_clean,
/// hv_paa, gap_clean, gap_paa, wall_s). eps and n_perturb: one defense run
/// per value, evaluated on the clean set and on a PAA set built against the
/// starting checkpoint (param, value, hv_clean, hv_paa, gap_clean, gap_paa,
/// wall_s).
Report run_sweep(const NamedPolicy& policy, const std::vector<Instance>& clean, const SweepConfig& cfg);

}  // namespace mocoguard
