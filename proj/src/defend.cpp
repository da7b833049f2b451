#include "mocoguard/defend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "mocoguard/errors.hpp"
#include "mocoguard/parallel.hpp"
#include "mocoguard/rng.hpp"

namespace mocoguard {

void DpdConfig::validate() const {
    train.validate();
    attack_cfg.validate();
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw ConfigError("eps must be >= 0");
    if (n_perturb < 1) throw ConfigError("n_perturb must be >= 1");
    if (mix_clean < 0 || mix_hard < 0 || mix_clean + mix_hard == 0) throw ConfigError("invalid clean:hard mix");
    if (attack && hard_per_pref < 1) throw ConfigError("hard_per_pref must be >= 1 when attacking");
}

nlohmann::json DpdConfig::to_json() const {
    return {{"train", train.to_json()},
            {"eps", eps},
            {"n_perturb", n_perturb},
            {"mix", std::to_string(mix_clean) + ":" + std::to_string(mix_hard)},
            {"attack", attack},
            {"augment", augment},
            {"loss", to_string(loss)},
            {"hard_per_pref", hard_per_pref},
            {"attack_config", attack_cfg.to_json()}};
}

namespace {

std::pair<int, int> parse_mix(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ConfigError("mix must look like clean:hard");
    try {
        return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw ConfigError("mix must look like clean:hard");
    }
}

}  // namespace

DpdConfig DpdConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("defense config must be a JSON object");
    DpdConfig c;
    const nlohmann::json defaults = c.to_json();
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!defaults.contains(it.key())) throw ConfigError("unknown defense config key '" + it.key() + "'");
    try {
        if (j.contains("train")) c.train = TrainConfig::from_json(j.at("train"));
        if (j.contains("attack_config")) c.attack_cfg = AttackConfig::from_json(j.at("attack_config"));
        c.eps = j.value("eps", c.eps);
        c.n_perturb = j.value("n_perturb", c.n_perturb);
        if (j.contains("mix")) std::tie(c.mix_clean, c.mix_hard) = parse_mix(j.at("mix").get<std::string>());
        c.attack = j.value("attack", c.attack);
        c.augment = j.value("augment", c.augment);
        if (j.contains("loss")) c.loss = scalarization_from_string(j.at("loss").get<std::string>());
        c.hard_per_pref = j.value("hard_per_pref", c.hard_per_pref);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad defense config: ") + e.what());
    }
    return c;
}

std::vector<Preference> perturb_preferences(const Preference& lambda, int count, double eps, std::uint64_t seed) {
    if (count < 0) throw ConfigError("perturbation count must be >= 0");
    Rng rng(seed, "perturb");
    std::vector<Preference> out;
    out.reserve(static_cast<std::size_t>(count));
    const auto base = lambda.weights();
    for (int k = 0; k < count; ++k) {
        std::vector<double> raw(base.begin(), base.end());
        double sum = 0.0;
        for (auto& v : raw) {
            v = std::max(0.0, v + rng.uniform(-eps, eps));
            sum += v;
        }
        if (!(sum > 0.0)) {
            out.push_back(lambda);
            continue;
        }
        for (auto& v : raw) v /= sum;
        out.emplace_back(std::move(raw));
    }
    return out;
}

std::vector<double> relevance_scores(std::span<const double> tch) {
    if (tch.empty()) throw ConfigError("relevance scores need at least one value");
    double lo = tch[0];
    for (double v : tch) {
        if (!std::isfinite(v)) throw NumericError("non-finite Tchebycheff value");
        lo = std::min(lo, v);
    }
    std::vector<double> p(tch.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < tch.size(); ++i) sum += p[i] = std::exp(-(tch[i] - lo));
    for (auto& v : p) v /= sum;
    return p;
}

std::size_t select_adversarial(std::span<const double> scores) {
    if (scores.empty()) throw ConfigError("cannot select from an empty preference list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] < scores[best]) best = i;
    return best;
}

const Preference& select_adversarial(std::span<const Preference> prefs, std::span<const double> scores) {
    if (prefs.size() != scores.size()) throw ShapeError("preference and score lists differ in length");
    return prefs[select_adversarial(scores)];
}

double recalibrated_loss(std::span<const double> f, const Preference& lambda_adv, std::span<const double> ideal) {
    return tchebycheff(f, lambda_adv.weights(), ideal);
}

BatchSplit stratified_split(std::size_t batch, int mix_clean, int mix_hard, bool have_hard) {
    if (!have_hard || mix_hard == 0) return {batch, 0};
    const double share = static_cast<double>(mix_hard) / (mix_clean + mix_hard);
    const auto hard = static_cast<std::size_t>(std::llround(share * static_cast<double>(batch)));
    return {batch - hard, hard};
}

std::size_t nearest_grid_index(const PreferenceGrid& grid, std::span<const double> lambda) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.prefs.size(); ++i) {
        const auto w = grid.prefs[i].weights();
        if (w.size() != lambda.size()) throw ShapeError("preference length differs from grid");
        double d = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) d += std::abs(w[k] - lambda[k]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::vector<double> estimate_tch(const Policy& policy, std::span<const Instance* const> instances,
                                 std::span<const Preference> prefs, int starts, IdealPoint& ideal) {
    // objectives[i][p][s]
    std::vector<std::vector<std::vector<ObjectiveVector>>> objectives(instances.size());
    parallel_for(instances.size(), [&](std::size_t i) {
        const Instance& inst = *instances[i];
        tape::Tape t;
        const BoundPolicy net = bind(t, policy);
        const NodeEncoding nodes = encode_nodes(net, inst, t.constant(inst.features));
        const std::size_t mark = t.size();
        const int M = starts > 0 ? starts : static_cast<int>(inst.size());
        for (const auto& pref : prefs) {
            objectives[i].push_back(rollout(net, condition(net, nodes, pref), M, DecodeMode::Greedy, 0).objectives);
            t.truncate(mark);
        }
    });
    for (const auto& per_inst : objectives)
        for (const auto& per_pref : per_inst)
            for (const auto& f : per_pref) ideal.observe(f);

    std::vector<double> tch(prefs.size(), 0.0);
    for (std::size_t p = 0; p < prefs.size(); ++p) {
        for (std::size_t i = 0; i < instances.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& f : objectives[i][p]) best = std::min(best, recalibrated_loss(f, prefs[p], ideal.value()));
            tch[p] += best;
        }
        tch[p] /= static_cast<double>(instances.size());
    }
    return tch;
}

DpdEpochMetrics dpd_epoch(Policy& policy, Adam& adam, const DpdConfig& cfg, int epoch, const HardInstanceSet& hard_pool,
                          std::uint64_t& step, const StepCallback& on_step) {
    cfg.validate();
    const TrainConfig& tc = cfg.train;
    const PreferenceGrid grid = tc.grid();
    const EpochPlan plan = plan_epoch(tc, epoch);

    std::vector<std::vector<std::size_t>> groups(grid.prefs.size());
    for (std::size_t r = 0; r < hard_pool.records.size(); ++r)
        groups[nearest_grid_index(grid, hard_pool.records[r].lambda)].push_back(r);
    std::vector<std::size_t> all_hard(hard_pool.records.size());
    std::iota(all_hard.begin(), all_hard.end(), 0);

    DpdEpochMetrics metrics;
    metrics.hard_pool = hard_pool.records.size();
    IdealPoint ideal;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double loss_sum = 0.0, tch_sum = 0.0;
    std::size_t tch_count = 0;

    for (std::size_t b = 0; b < plan.batches.size(); ++b) {
        const std::size_t li = plan.pref_index[b];
        const Preference& lambda = grid.prefs[li];
        const BatchSplit split = stratified_split(tc.batch, cfg.mix_clean, cfg.mix_hard, !all_hard.empty());

        std::vector<const Instance*> batch;
        for (std::size_t i = 0; i < split.clean; ++i) batch.push_back(&plan.clean[plan.batches[b][i]]);
        if (split.hard > 0) {
            std::vector<std::size_t> source = groups[li].empty() ? all_hard : groups[li];
            Rng rng(tc.seed, "dpd-hard", static_cast<std::uint64_t>(epoch), b);
            std::shuffle(source.begin(), source.end(), rng.engine());
            for (std::size_t k = 0; k < split.hard; ++k)
                batch.push_back(&hard_pool.records[source[k % source.size()]].instance);
        }
        metrics.clean_used += split.clean;
        metrics.hard_used += split.hard;

        Preference train_pref = lambda;
        if (cfg.augment) {
            const auto perturbed =
                perturb_preferences(lambda, cfg.n_perturb, cfg.eps,
                                    stream_seed(tc.seed, "dpd-perturb", static_cast<std::uint64_t>(epoch), b));
            const auto tch = estimate_tch(policy, batch, perturbed, tc.rollouts, ideal);
            const std::size_t sel = select_adversarial(relevance_scores(tch));
            train_pref = perturbed[sel];
            tch_sum += tch[sel];
            ++tch_count;
        }

        std::vector<StepSample> samples;
        for (std::size_t i = 0; i < batch.size(); ++i)
            samples.push_back({batch[i], train_pref, rollout_seed(tc.seed, epoch, b, i)});
        const LossOptions loss{cfg.loss, &ideal, 0.0};
        const StepMetrics m = reinforce_step(policy, adam, samples, tc.rollouts, loss);
        ++step;
        ++metrics.steps;
        loss_sum += m.mean_loss;
        if (on_step) on_step(step, policy, m);
        metrics.log.push_back({step, m.mean_loss, m.grad_norm, nan});
    }
    metrics.mean_loss = metrics.steps ? loss_sum / static_cast<double>(metrics.steps) : 0.0;
    metrics.mean_selected_tch = tch_count ? tch_sum / static_cast<double>(tch_count) : nan;
    return metrics;
}

DpdResult dpd_train(const DpdConfig& cfg, Policy init, const HardInstanceSet* imported, const StepCallback& on_step) {
    cfg.validate();
    if (init.config().kind != cfg.train.kind) throw ConfigError("policy kind differs from the defense config");
    DpdResult result{std::move(init), {}, {}};
    Adam adam(result.policy.params(), cfg.train.adam);
    const PreferenceGrid grid = cfg.train.grid();
    std::uint64_t step = 0;
    for (int e = 0; e < cfg.train.epochs; ++e) {
        HardInstanceSet pool;
        if (imported) pool = *imported;
        if (cfg.attack) {
            const EpochPlan plan = plan_epoch(cfg.train, e);
            std::vector<std::pair<std::size_t, std::size_t>> pairs;
            for (std::size_t li = 0; li < grid.prefs.size(); ++li)
                for (std::size_t k = 0; k < cfg.hard_per_pref; ++k)
                    pairs.emplace_back((li * cfg.hard_per_pref + k) % plan.clean.size(), li);
            AttackConfig ac = cfg.attack_cfg;
            ac.seed = stream_seed(cfg.train.seed, "dpd-attack", static_cast<std::uint64_t>(e));
            HardInstanceSet attacked =
                paa_attack_pairs(result.policy, "epoch-" + std::to_string(e), plan.clean, grid, pairs, ac);
            for (auto& r : attacked.records) pool.records.push_back(std::move(r));
        }
        DpdEpochMetrics m = dpd_epoch(result.policy, adam, cfg, e, pool, step, on_step);
        result.log.insert(result.log.end(), m.log.begin(), m.log.end());
        result.epochs.push_back(std::move(m));
    }
    return result;
}

HardInstanceSet import_hard_set(const std::filesystem::path& path) { return read_hard_set(path); }

}  // namespace mocoguard
