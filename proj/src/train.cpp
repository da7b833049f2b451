#include "mocoguard/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>

#include "mocoguard/errors.hpp"
#include "mocoguard/eval.hpp"
#include "mocoguard/parallel.hpp"
#include "mocoguard/pareto.hpp"
#include "mocoguard/rng.hpp"

namespace mocoguard {

Adam::Adam(const tape::ParamSet& like, AdamConfig cfg) : cfg_(cfg), m_(like.zeros_like()), v_(like.zeros_like()) {
    if (!(cfg_.lr > 0.0) || !(cfg_.eps > 0.0) || cfg_.beta1 < 0.0 || cfg_.beta1 >= 1.0 || cfg_.beta2 < 0.0 ||
        cfg_.beta2 >= 1.0)
        throw ConfigError("invalid Adam hyperparameters");
}

void Adam::step(tape::ParamSet& params, const tape::ParamSet& grads) {
    if (params.names != grads.names || params.names != m_.names) throw ShapeError("Adam parameter layout mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.values.size(); ++k) {
        auto& p = params.values[k].data;
        const auto& g = grads.values[k].data;
        auto& m = m_.values[k].data;
        auto& v = v_.values[k].data;
        if (g.size() != p.size()) throw ShapeError("gradient shape mismatch for " + params.names[k]);
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            p[i] -= cfg_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.eps);
        }
    }
}

std::vector<double> advantages(std::span<const double> losses) {
    std::vector<double> adv(losses.begin(), losses.end());
    if (adv.empty()) return adv;
    const double b = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(adv.size());
    for (auto& a : adv) a -= b;
    return adv;
}

double grad_norm(const tape::ParamSet& grads) {
    double s = 0.0;
    for (const auto& g : grads.values)
        for (double v : g.data) s += v * v;
    return std::sqrt(s);
}

PolicyGradient policy_gradient(const Policy& policy, std::span<const StepSample> samples, int M,
                               const LossOptions& loss) {
    if (samples.empty()) throw ConfigError("training batch is empty");
    if (M < 1) throw ConfigError("rollout count must be >= 1");
    if (loss.scalarization == Scalarization::Tchebycheff && !loss.ideal)
        throw ConfigError("Tchebycheff loss needs an ideal point");

    struct Work {
        std::unique_ptr<tape::Tape> tape;
        BoundPolicy net;
        RolloutBatch batch;
        tape::ParamSet grads;
    };
    std::vector<Work> work(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        Work& w = work[i];
        w.tape = std::make_unique<tape::Tape>();
        w.net = bind(*w.tape, policy);
        const Instance& inst = *samples[i].instance;
        const Encoded enc = encode(w.net, inst, w.tape->constant(inst.features), samples[i].preference);
        w.batch = rollout(w.net, enc, M, DecodeMode::Sample, samples[i].seed);
    });

    if (loss.ideal)
        for (const auto& w : work)
            for (const auto& f : w.batch.objectives) loss.ideal->observe(f);
    const std::vector<double> no_ideal;
    const std::span<const double> z = loss.ideal && !loss.ideal->empty() ? std::span<const double>(loss.ideal->value())
                                                                          : std::span<const double>(no_ideal);

    PolicyGradient out;
    const double scale = 1.0 / (static_cast<double>(samples.size()) * M);
    std::vector<std::vector<double>> coeffs(samples.size());
    double loss_sum = 0.0, adv_sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        score(work[i].batch, loss.scalarization, samples[i].preference, z);
        for (auto& l : work[i].batch.losses) {
            l += loss.loss_offset;
            if (!std::isfinite(l)) throw NumericError("non-finite rollout loss");
            loss_sum += l;
        }
        coeffs[i] = advantages(work[i].batch.losses);
        for (auto& c : coeffs[i]) {
            adv_sum += std::abs(c);
            c *= scale;
        }
    }

    parallel_for(samples.size(), [&](std::size_t i) {
        Work& w = work[i];
        const tape::Var obj = combine_log_probs(w.batch, coeffs[i]);
        w.tape->backward(obj);
        w.grads = policy.params().zeros_like();
        tape::accumulate_grads(*w.tape, w.net.all, w.grads);
        w.tape.reset();
    });

    out.grads = policy.params().zeros_like();
    for (const auto& w : work)
        for (std::size_t k = 0; k < out.grads.values.size(); ++k) {
            auto& dst = out.grads.values[k].data;
            const auto& src = w.grads.values[k].data;
            for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += src[e];
        }
    const double count = static_cast<double>(samples.size()) * M;
    out.metrics.mean_loss = loss_sum / count;
    out.metrics.mean_abs_advantage = adv_sum / count;
    out.metrics.grad_norm = grad_norm(out.grads);
    return out;
}

StepMetrics reinforce_step(Policy& policy, Adam& adam, std::span<const StepSample> samples, int M,
                           const LossOptions& loss) {
    PolicyGradient g = policy_gradient(policy, samples, M, loss);
    if (!g.grads.all_finite() || !std::isfinite(g.metrics.grad_norm))
        throw NumericError("non-finite policy gradient; step aborted");
    adam.step(policy.params(), g.grads);
    return g.metrics;
}

int default_grid_resolution(ProblemKind kind) { return objective_count(kind) == 3 ? 13 : 100; }

PreferenceGrid TrainConfig::grid() const {
    return preference_grid(objective_count(kind), grid_h > 0 ? grid_h : default_grid_resolution(kind));
}

void TrainConfig::validate() const {
    if (n < 4) throw ConfigError("n must be >= 4");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch < 1) throw ConfigError("batch must be >= 1");
    if (epochs > 0 && epoch_size < batch) throw ConfigError("epoch_size must be >= batch");
    if (rollouts < 2) throw ConfigError("rollouts must be >= 2");
    if (grid_h < 0 || val_grid_h < 1) throw ConfigError("grid resolution must be positive");
    if (val_instances < 1) throw ConfigError("val_instances must be >= 1");
    if (val_every < 0) throw ConfigError("val_every must be >= 0");
    if (policy.kind != kind) throw ConfigError("policy kind differs from the training kind");
}

nlohmann::json TrainConfig::to_json() const {
    return {{"kind", to_string(kind)},
            {"n", n},
            {"epochs", epochs},
            {"epoch_size", epoch_size},
            {"batch", batch},
            {"rollouts", rollouts},
            {"grid_h", grid_h},
            {"scalarization", to_string(scalarization)},
            {"lr", adam.lr},
            {"beta1", adam.beta1},
            {"beta2", adam.beta2},
            {"adam_eps", adam.eps},
            {"seed", seed},
            {"policy", policy.to_json()},
            {"kp_capacity", gen.kp_capacity},
            {"cvrp_capacity", gen.cvrp_capacity},
            {"val_instances", val_instances},
            {"val_grid_h", val_grid_h},
            {"val_every", val_every}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("training config must be a JSON object");
    TrainConfig c;
    nlohmann::json merged = c.to_json();
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!merged.contains(it.key())) throw ConfigError("unknown training config key '" + it.key() + "'");
        if (it.key() == "policy") {
            if (!it.value().is_object()) throw ConfigError("policy must be an object");
            merged["policy"].update(it.value());
        } else {
            merged[it.key()] = it.value();
        }
    }
    try {
        c.kind = problem_kind_from_string(merged.at("kind").get<std::string>());
        c.n = merged.at("n").get<std::size_t>();
        c.epochs = merged.at("epochs").get<int>();
        c.epoch_size = merged.at("epoch_size").get<std::size_t>();
        c.batch = merged.at("batch").get<std::size_t>();
        c.rollouts = merged.at("rollouts").get<int>();
        c.grid_h = merged.at("grid_h").get<int>();
        c.scalarization = scalarization_from_string(merged.at("scalarization").get<std::string>());
        c.adam.lr = merged.at("lr").get<double>();
        c.adam.beta1 = merged.at("beta1").get<double>();
        c.adam.beta2 = merged.at("beta2").get<double>();
        c.adam.eps = merged.at("adam_eps").get<double>();
        c.seed = merged.at("seed").get<std::uint64_t>();
        merged["policy"]["kind"] = to_string(c.kind);
        c.policy = PolicyConfig::from_json(merged.at("policy"));
        c.gen.kp_capacity = merged.at("kp_capacity").get<double>();
        c.gen.cvrp_capacity = merged.at("cvrp_capacity").get<double>();
        c.val_instances = merged.at("val_instances").get<std::size_t>();
        c.val_grid_h = merged.at("val_grid_h").get<int>();
        c.val_every = merged.at("val_every").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad training config: ") + e.what());
    } catch (const SchemaError& e) {
        throw ConfigError(e.what());
    }
    return c;
}

EpochPlan plan_epoch(const TrainConfig& cfg, int epoch) {
    EpochPlan plan;
    plan.clean = gen_uniform(cfg.kind, cfg.n, cfg.epoch_size, stream_seed(cfg.seed, "epoch-clean", epoch), cfg.gen);
    std::vector<std::size_t> perm(cfg.epoch_size);
    std::iota(perm.begin(), perm.end(), 0);
    Rng shuffle(cfg.seed, "epoch-perm", static_cast<std::uint64_t>(epoch));
    std::shuffle(perm.begin(), perm.end(), shuffle.engine());
    const std::size_t grid_size = cfg.grid().prefs.size();
    for (std::size_t b = 0; b < cfg.batches_per_epoch(); ++b) {
        plan.batches.emplace_back(perm.begin() + static_cast<long>(b * cfg.batch),
                                  perm.begin() + static_cast<long>((b + 1) * cfg.batch));
        Rng pick(cfg.seed, "batch-pref", static_cast<std::uint64_t>(epoch), b);
        plan.pref_index.push_back(pick.index(grid_size));
    }
    return plan;
}

std::uint64_t rollout_seed(std::uint64_t seed, int epoch, std::size_t batch, std::size_t i) {
    return stream_seed(seed, "rollout", (static_cast<std::uint64_t>(epoch) << 32) ^ batch, i);
}

void write_train_log(const std::filesystem::path& path, std::span<const TrainLogRow> rows) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    auto cell = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
    out << "step,mean_loss,grad_norm,val_hv\n";
    for (const auto& r : rows)
        out << r.step << ',' << cell(r.mean_loss) << ',' << cell(r.grad_norm) << ',' << cell(r.val_hv) << '\n';
}

Validator Validator::make(const TrainConfig& cfg, const Policy& initial) {
    Validator v;
    v.instances = gen_uniform(cfg.kind, cfg.n, cfg.val_instances, stream_seed(cfg.seed, "validation"), cfg.gen);
    v.grid = preference_grid(objective_count(cfg.kind), cfg.val_grid_h);
    const auto fronts = model_fronts(initial, v.instances, v.grid);
    v.reference = reference_point(fronts);
    return v;
}

double Validator::mean_hv(const Policy& policy) const {
    const auto fronts = model_fronts(policy, instances, grid);
    return mean(hypervolumes(fronts, reference));
}

TrainResult train_clean(const TrainConfig& cfg, std::optional<Policy> init, const StepCallback& on_step) {
    cfg.validate();
    Policy policy = init ? std::move(*init) : Policy::init(cfg.policy, stream_seed(cfg.seed, "policy-init"));
    if (policy.config().kind != cfg.kind) throw ConfigError("initial policy kind differs from the training kind");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (cfg.epochs == 0) return {policy, policy, nan, {}, {}};

    const Validator val = Validator::make(cfg, policy);
    TrainResult result{policy, policy, val.mean_hv(policy), {}, val.reference};
    result.log.push_back({0, nan, nan, result.best_val_hv});

    const PreferenceGrid grid = cfg.grid();
    Adam adam(policy.params(), cfg.adam);
    IdealPoint ideal;
    LossOptions loss{cfg.scalarization, &ideal, 0.0};
    std::uint64_t step = 0;
    const std::uint64_t total = static_cast<std::uint64_t>(cfg.epochs) * cfg.batches_per_epoch();
    for (int e = 0; e < cfg.epochs; ++e) {
        ideal.reset();
        const EpochPlan plan = plan_epoch(cfg, e);
        for (std::size_t b = 0; b < plan.batches.size(); ++b) {
            std::vector<StepSample> samples;
            for (std::size_t i = 0; i < plan.batches[b].size(); ++i)
                samples.push_back({&plan.clean[plan.batches[b][i]], grid.prefs[plan.pref_index[b]],
                                   rollout_seed(cfg.seed, e, b, i)});
            const StepMetrics m = reinforce_step(policy, adam, samples, cfg.rollouts, loss);
            ++step;
            if (on_step) on_step(step, policy, m);
            TrainLogRow row{step, m.mean_loss, m.grad_norm, nan};
            const bool epoch_end = b + 1 == plan.batches.size();
            const bool due = cfg.val_every > 0 ? step % static_cast<std::uint64_t>(cfg.val_every) == 0 : epoch_end;
            if (due || step == total) {
                row.val_hv = val.mean_hv(policy);
                if (row.val_hv > result.best_val_hv) {
                    result.best_val_hv = row.val_hv;
                    result.best = policy;
                }
            }
            result.log.push_back(row);
        }
    }
    result.last = policy;
    return result;
}

}  // namespace mocoguard
