#pragma once

/// Preference-conditioned constructive policy p(solution | instance, preference).
///
/// Encoder: linear node embedding followed by `layers` multi-head
/// self-attention blocks (residual, ReLU feed-forward). The decoder builds a
/// solution step by step with a single-head glimpse and a tanh-clipped
/// pointer over the feasible actions. The preference enters the decoder
/// twice: as an embedding concatenated with the mean node embedding to form
/// the context, and as mixing weights over per-objective query and pointer
/// projections.
///
/// All M rollouts of one instance are decoded together, one row per rollout.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "mocoguard/core.hpp"
#include "mocoguard/gradtape.hpp"
#include "mocoguard/scalarize.hpp"

namespace mocoguard {

struct PolicyConfig {
    ProblemKind kind = ProblemKind::BiTSP;
    int hidden = 64;
    int heads = 4;
    int layers = 2;
    int ff_hidden = 128;
    double logit_clip = 10.0;

    /// Throws ConfigError on non-positive sizes or hidden % heads != 0.
    void validate() const;
    nlohmann::json to_json() const;
    static PolicyConfig from_json(const nlohmann::json& j);
    bool operator==(const PolicyConfig&) const = default;
};

class Policy {
  public:
    /// Fresh parameters drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    static Policy init(const PolicyConfig& cfg, std::uint64_t seed);
    static Policy load(const std::filesystem::path& path);

    Policy(PolicyConfig cfg, tape::ParamSet params);

    void save(const std::filesystem::path& path, const nlohmann::json& extra_meta = {}) const;

    const PolicyConfig& config() const { return cfg_; }
    const tape::ParamSet& params() const { return params_; }
    tape::ParamSet& params() { return params_; }

  private:
    PolicyConfig cfg_;
    tape::ParamSet params_;
};

/// Parameters registered on one tape, grouped by role.
struct BoundPolicy {
    struct Layer {
        std::vector<tape::Var> wq, wk, wv, wo;
        tape::Var bo, w1, b1, w2, b2;
    };
    const PolicyConfig* cfg = nullptr;
    std::vector<tape::Var> all;
    tape::Var w_in, b_in;
    std::vector<Layer> layers;
    tape::Var w_pref, b_pref, w_ctx;
    tape::Var w_first, w_cap;
    std::vector<tape::Var> w_last, w_key;
    tape::Var w_glimpse_k, w_glimpse_v, w_glimpse_out;
};

BoundPolicy bind(tape::Tape& tape, const Policy& policy);

/// Preference-independent encoder output.
struct NodeEncoding {
    const Instance* instance = nullptr;
    tape::Var features;   ///< the instance feature leaf
    tape::Var embedding;  ///< N x d, N = nodes (+ depot) or items
    tape::Var graph_mean; ///< 1 x d
};

/// Encoder output conditioned on one preference.
struct Encoded {
    NodeEncoding nodes;
    std::vector<double> preference;
    tape::Var context;        ///< 1 x 2d: [mean embedding, preference embedding]
    tape::Var query_fixed;    ///< 1 x d
    tape::Var first_proj;     ///< N x d
    tape::Var last_proj;      ///< N x d, preference-mixed
    tape::Var glimpse_keys;   ///< N x d
    tape::Var glimpse_values; ///< N x d
    tape::Var pointer_keys;   ///< N x d, preference-mixed
};

/// Registers nothing; `features` must already live on the tape (as an input
/// leaf when x-gradients are wanted, a constant otherwise).
NodeEncoding encode_nodes(const BoundPolicy& net, const Instance& inst, tape::Var features);
Encoded condition(const BoundPolicy& net, const NodeEncoding& nodes, const Preference& pref);
Encoded encode(const BoundPolicy& net, const Instance& inst, tape::Var features, const Preference& pref);

enum class DecodeMode { Sample, Greedy, Replay };

struct RolloutBatch {
    std::vector<Solution> solutions;
    /// Raw action sequence per rollout (forced steps included), replayable.
    std::vector<std::vector<int>> actions;
    tape::Var log_prob;  ///< M x 1, sum of chosen log-probabilities
    std::vector<double> log_probs;
    std::vector<ObjectiveVector> objectives;
    /// Scalarized losses; filled by score().
    std::vector<double> losses;

    std::size_t size() const { return solutions.size(); }
};

/// Autoregressive construction of M solutions.
///
/// Rollout j starts at node / customer / item j mod n (for knapsack only
/// when that item fits); the forced first step contributes no
/// log-probability. Sample mode draws each row from its own substream
/// (seed, j); greedy takes the lowest-index argmax; replay follows
/// `replay_actions`.
RolloutBatch rollout(const BoundPolicy& net, const Encoded& enc, int M, DecodeMode mode, std::uint64_t seed,
                     const std::vector<std::vector<int>>* replay_actions = nullptr);

/// Fills batch.losses with the scalarized objective of every rollout.
void score(RolloutBatch& batch, Scalarization s, const Preference& pref, std::span<const double> ideal = {});

/// Objective vector of `sol` computed on the tape from the feature node, so
/// that it is differentiable in the features. 1 x m.
tape::Var objectives_on_tape(tape::Var features, const Instance& inst, const Solution& sol);

/// Scalarized objective on the tape (1 x 1).
tape::Var scalarize_on_tape(tape::Var f, Scalarization s, const Preference& pref, std::span<const double> ideal);

/// sum_j coeff_j * log p_j over the rollouts (1 x 1).
tape::Var combine_log_probs(const RolloutBatch& batch, std::span<const double> coefficients);

/// Best rollout of a batch by its scalarized loss (ties: lowest index).
std::size_t best_rollout(const RolloutBatch& batch);

}  // namespace mocoguard
