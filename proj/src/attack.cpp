#include "mocoguard/attack.hpp"

#include <cmath>

#include "mocoguard/errors.hpp"
#include "mocoguard/instance_gen.hpp"
#include "mocoguard/instance_io.hpp"
#include "mocoguard/parallel.hpp"
#include "mocoguard/rng.hpp"

namespace mocoguard {

void AttackConfig::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be a finite value >= 0");
    if (steps < 1) throw ConfigError("attack steps must be >= 1");
    if (rollouts < 1) throw ConfigError("attack rollouts must be >= 1");
    if (grid_h < 0) throw ConfigError("grid resolution must be >= 0");
}

nlohmann::json AttackConfig::to_json() const {
    return {{"alpha", alpha},
            {"steps", steps},
            {"rollouts", rollouts},
            {"scalarization", to_string(scalarization)},
            {"grid_h", grid_h},
            {"seed", seed}};
}

AttackConfig AttackConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("attack config must be a JSON object");
    AttackConfig c;
    nlohmann::json merged = c.to_json();
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!merged.contains(it.key())) throw ConfigError("unknown attack config key '" + it.key() + "'");
        merged[it.key()] = it.value();
    }
    try {
        c.alpha = merged.at("alpha").get<double>();
        c.steps = merged.at("steps").get<int>();
        c.rollouts = merged.at("rollouts").get<int>();
        c.scalarization = scalarization_from_string(merged.at("scalarization").get<std::string>());
        c.grid_h = merged.at("grid_h").get<int>();
        c.seed = merged.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad attack config: ") + e.what());
    }
    return c;
}

tape::Var attack_objective(const BoundPolicy& net, const Instance& inst, tape::Var x, const Preference& pref, int M,
                           std::uint64_t seed, Scalarization s, double* baseline) {
    const Encoded enc = encode(net, inst, x, pref);
    const RolloutBatch batch = rollout(net, enc, M, DecodeMode::Sample, seed);

    ObjectiveVector z;
    if (s == Scalarization::Tchebycheff) {
        IdealPoint ideal;
        for (const auto& f : batch.objectives) ideal.observe(f);
        z = ideal.value();
    }
    std::vector<tape::Var> losses;
    for (const auto& sol : batch.solutions) losses.push_back(scalarize_on_tape(objectives_on_tape(x, inst, sol), s, pref, z));
    tape::Var total = losses.front();
    for (std::size_t j = 1; j < losses.size(); ++j) total = tape::add(total, losses[j]);
    const tape::Var b = tape::scale(total, 1.0 / M);
    if (baseline) *baseline = b.scalar();
    if (b.scalar() == 0.0) throw NumericError("degenerate baseline: mean rollout loss is zero");

    tape::Var acc = tape::mul(tape::div(losses[0], b), tape::gather_rows(batch.log_prob, std::vector<int>{0}));
    for (std::size_t j = 1; j < losses.size(); ++j) {
        const tape::Var lp = tape::gather_rows(batch.log_prob, std::vector<int>{static_cast<int>(j)});
        acc = tape::add(acc, tape::mul(tape::div(losses[j], b), lp));
    }
    return tape::scale(acc, 1.0 / M);
}

Matrix attack_gradient(const Policy& policy, const Instance& inst, const Preference& pref, int M, std::uint64_t seed,
                       Scalarization s, AttackStepInfo* info) {
    tape::Tape t;
    const BoundPolicy net = bind(t, policy);
    const tape::Var x = t.input(inst.features);
    double b = 0.0;
    const tape::Var obj = attack_objective(net, inst, x, pref, M, seed, s, &b);
    t.backward(obj);
    Matrix g = t.grad(x);
    double norm = 0.0;
    for (double v : g.data) {
        if (!std::isfinite(v)) throw NumericError("non-finite feature gradient");
        norm += v * v;
    }
    if (info) *info = {obj.scalar(), b, std::sqrt(norm)};
    return g;
}

Instance paa_step(const Policy& policy, const Instance& x, const Preference& pref, double alpha, int M,
                  std::uint64_t seed, Scalarization s, AttackStepInfo* info) {
    const Matrix g = attack_gradient(policy, x, pref, M, seed, s, info);
    Instance out = x;
    const std::size_t first_row = x.kind == ProblemKind::BiCVRP ? 1 : 0;
    for (std::size_t r = first_row; r < out.features.rows; ++r)
        for (std::size_t c = 0; c < out.features.cols; ++c) out.features(r, c) += alpha * g(r, c);
    project_instance(out);
    out.provenance = Provenance::Paa;
    return out;
}

std::vector<Instance> HardInstanceSet::instances() const {
    std::vector<Instance> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.instance);
    return out;
}

std::map<std::size_t, std::vector<std::size_t>> HardInstanceSet::by_preference() const {
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < records.size(); ++i) groups[records[i].lambda_index].push_back(i);
    return groups;
}

std::uint64_t attack_seed(std::uint64_t seed, std::size_t lambda_index, const std::string& instance_id) {
    return stream_seed(seed, "paa", lambda_index, hash_tag(instance_id));
}

HardInstanceSet paa_attack_pairs(const Policy& policy, const std::string& checkpoint_id,
                                 std::span<const Instance> sources, const PreferenceGrid& grid,
                                 std::span<const std::pair<std::size_t, std::size_t>> pairs, const AttackConfig& cfg) {
    cfg.validate();
    HardInstanceSet set;
    set.checkpoint = checkpoint_id;
    set.records.resize(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t k) {
        const auto [src, li] = pairs[k];
        if (src >= sources.size() || li >= grid.prefs.size()) throw ConfigError("attack pair index out of range");
        const Instance& source = sources[src];
        const Preference& pref = grid.prefs[li];
        const std::uint64_t base = attack_seed(cfg.seed, li, source.id);
        Instance x = source;
        for (int s = 0; s < cfg.steps; ++s)
            x = paa_step(policy, x, pref, cfg.alpha, cfg.rollouts, stream_seed(base, "paa-step", s), cfg.scalarization);
        HardRecord& r = set.records[k];
        r.instance = std::move(x);
        r.lambda.assign(pref.weights().begin(), pref.weights().end());
        r.lambda_index = li;
        r.source_id = source.id;
        r.checkpoint = checkpoint_id;
    });
    return set;
}

HardInstanceSet paa_attack(const Policy& policy, const std::string& checkpoint_id, std::span<const Instance> clean,
                           const PreferenceGrid& grid, const AttackConfig& cfg) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t li = 0; li < grid.prefs.size(); ++li)
        for (std::size_t i = 0; i < clean.size(); ++i) pairs.emplace_back(i, li);
    return paa_attack_pairs(policy, checkpoint_id, clean, grid, pairs, cfg);
}

nlohmann::json hard_record_to_json(const HardRecord& r) {
    nlohmann::json j = instance_to_json(r.instance);
    j["lambda"] = r.lambda;
    j["lambda_index"] = r.lambda_index;
    j["source_id"] = r.source_id;
    j["checkpoint"] = r.checkpoint;
    return j;
}

HardRecord hard_record_from_json(const nlohmann::json& j) {
    HardRecord r;
    r.instance = instance_from_json(j);
    try {
        r.lambda = j.at("lambda").get<std::vector<double>>();
        r.lambda_index = j.value("lambda_index", std::size_t{0});
        r.source_id = j.value("source_id", r.instance.id);
        r.checkpoint = j.value("checkpoint", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed hard-set record: ") + e.what());
    }
    if (r.lambda.size() != static_cast<std::size_t>(objective_count(r.instance.kind)))
        throw SchemaError("record '" + r.instance.id + "': lambda length differs from objective count");
    if (!on_simplex(r.lambda, Preference::kTolerance))
        throw SchemaError("record '" + r.instance.id + "': lambda is not on the simplex");
    return r;
}

void write_hard_set(const std::filesystem::path& path, const HardInstanceSet& set) {
    std::vector<nlohmann::json> lines;
    for (const auto& r : set.records) lines.push_back(hard_record_to_json(r));
    write_jsonl(path, lines);
}

HardInstanceSet read_hard_set(const std::filesystem::path& path) {
    HardInstanceSet set;
    for (const auto& j : read_jsonl(path)) {
        HardRecord r = hard_record_from_json(j);
        if (r.instance.provenance != Provenance::Paa && r.instance.provenance != Provenance::Imported)
            throw SchemaError("record '" + r.instance.id + "': hard-set provenance must be paa or imported");
        if (set.records.empty()) set.checkpoint = r.checkpoint;
        set.records.push_back(std::move(r));
    }
    return set;
}

Comparison evaluate_attack(const Policy& policy, std::span<const Instance> instances, const PreferenceGrid& grid,
                           std::span<const double> reference, const OracleOptions& oracle) {
    const auto model = model_fronts(policy, instances, grid);
    const auto ref = oracle_fronts(instances, grid, oracle);
    return compare_fronts(model, ref, reference);
}

}  // namespace mocoguard
