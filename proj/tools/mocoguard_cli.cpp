// mocoguard: generate instances, train, attack, defend and evaluate
// preference-conditioned policies. Every subcommand takes --config FILE
// (JSON); flags given on the command line override the file.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "mocoguard/attack.hpp"
#include "mocoguard/defend.hpp"
#include "mocoguard/errors.hpp"
#include "mocoguard/harness.hpp"
#include "mocoguard/instance_gen.hpp"
#include "mocoguard/instance_io.hpp"
#include "mocoguard/pareto.hpp"
#include "mocoguard/train.hpp"

using namespace mocoguard;
using nlohmann::json;

namespace {

json read_json(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("bad config " + path + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

template <class T>
void put(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

std::pair<int, int> parse_mix(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ConfigError("mix must look like clean:hard, got " + s);
    return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
}

std::vector<Instance> load_set(const std::string& path) {
    if (!std::filesystem::exists(path)) throw IoError("missing instance file " + path);
    return read_instances(path);
}

// --- gen ------------------------------------------------------------------

struct GenArgs {
    std::string config, kind = "BiTSP", dist = "uniform", out;
    std::size_t n = 20, count = 100, clusters = 3;
    double c_dist = 10.0, kp_capacity = 0.0, cvrp_capacity = 0.0;
    std::uint64_t seed = 1;
};

void add_gen(CLI::App& app) {
    auto a = std::make_shared<GenArgs>();
    auto* sub = app.add_subcommand("gen", "Generate an instance set (JSONL)");
    sub->add_option("--config", a->config);
    sub->add_option("--kind", a->kind, "BiTSP | TriTSP | BiCVRP | BiKP");
    sub->add_option("--n", a->n);
    sub->add_option("--count", a->count);
    sub->add_option("--dist", a->dist, "uniform | gmm | lognormal | beta | gamma");
    sub->add_option("--c-dist", a->c_dist);
    sub->add_option("--clusters", a->clusters);
    sub->add_option("--kp-capacity", a->kp_capacity);
    sub->add_option("--cvrp-capacity", a->cvrp_capacity);
    sub->add_option("--seed", a->seed);
    sub->add_option("--out", a->out)->required();
    sub->callback([a, sub] {
        json cfg = read_json(a->config);
        auto pick = [&](const char* flag, const char* key, auto& field) {
            if (sub->count(flag) == 0 && cfg.contains(key)) field = cfg[key].get<std::decay_t<decltype(field)>>();
        };
        pick("--kind", "kind", a->kind);
        pick("--n", "n", a->n);
        pick("--count", "count", a->count);
        pick("--dist", "dist", a->dist);
        pick("--c-dist", "c_dist", a->c_dist);
        pick("--clusters", "clusters", a->clusters);
        pick("--seed", "seed", a->seed);
        pick("--kp-capacity", "kp_capacity", a->kp_capacity);
        pick("--cvrp-capacity", "cvrp_capacity", a->cvrp_capacity);
        const auto kind = problem_kind_from_string(a->kind);
        GenOptions opts{a->kp_capacity, a->cvrp_capacity};
        std::vector<Instance> set;
        if (a->dist == "uniform")
            set = gen_uniform(kind, a->n, a->count, a->seed, opts);
        else if (a->dist == "gmm")
            set = gen_gmm(kind, a->n, a->count, a->c_dist, a->clusters, a->seed, opts);
        else
            set = gen_heavytail(kind, a->n, a->count, heavy_tail_from_string(a->dist), a->seed, opts);
        write_instances(a->out, set);
        std::printf("wrote %zu %s instances to %s\n", set.size(), a->kind.c_str(), a->out.c_str());
    });
}

// --- train ----------------------------------------------------------------

struct TrainArgs {
    std::string config, out, log, init;
    std::optional<std::string> kind, scalarization;
    std::optional<std::size_t> n, epoch_size, batch;
    std::optional<int> epochs, rollouts, grid_h, val_every;
    std::optional<double> lr;
    std::optional<std::uint64_t> seed;
};

void add_train_flags(CLI::App* sub, TrainArgs& a) {
    sub->add_option("--kind", a.kind);
    sub->add_option("--n", a.n);
    sub->add_option("--epochs", a.epochs);
    sub->add_option("--epoch-size", a.epoch_size);
    sub->add_option("--batch", a.batch);
    sub->add_option("--rollouts", a.rollouts);
    sub->add_option("--grid-h", a.grid_h);
    sub->add_option("--lr", a.lr);
    sub->add_option("--scalarization", a.scalarization, "ws | tch");
    sub->add_option("--val-every", a.val_every);
    sub->add_option("--seed", a.seed);
}

json train_patch(const TrainArgs& a) {
    json j = json::object();
    put(j, "kind", a.kind);
    put(j, "n", a.n);
    put(j, "epochs", a.epochs);
    put(j, "epoch_size", a.epoch_size);
    put(j, "batch", a.batch);
    put(j, "rollouts", a.rollouts);
    put(j, "grid_h", a.grid_h);
    put(j, "lr", a.lr);
    put(j, "scalarization", a.scalarization);
    put(j, "val_every", a.val_every);
    put(j, "seed", a.seed);
    return j;
}

std::string sibling(const std::string& path, const std::string& suffix) {
    std::filesystem::path p(path);
    return (p.parent_path() / (p.stem().string() + suffix)).string();
}

void add_train(CLI::App& app) {
    auto a = std::make_shared<TrainArgs>();
    auto* sub = app.add_subcommand("train", "Clean REINFORCE training");
    sub->add_option("--config", a->config);
    add_train_flags(sub, *a);
    sub->add_option("--init", a->init, "start from this checkpoint");
    sub->add_option("--out", a->out, "best checkpoint")->required();
    sub->add_option("--log", a->log, "training log CSV (default <out>_log.csv)");
    sub->callback([a] {
        json j = read_json(a->config);
        j.merge_patch(train_patch(*a));
        const TrainConfig cfg = TrainConfig::from_json(j);
        std::optional<Policy> init;
        if (!a->init.empty()) init = Policy::load(a->init);
        auto res = train_clean(cfg, init, [&](std::uint64_t step, const Policy&, const StepMetrics& m) {
            if (step % 50 == 0) std::fprintf(stderr, "step %llu loss %.5g |g| %.3g\n", (unsigned long long)step, m.mean_loss,
                                             m.grad_norm);
        });
        const json meta = {{"config", cfg.to_json()}, {"val_reference", res.val_reference}, {"best_val_hv", res.best_val_hv}};
        res.best.save(a->out, meta);
        res.last.save(sibling(a->out, "_last.bin"), meta);
        write_train_log(a->log.empty() ? sibling(a->out, "_log.csv") : a->log, res.log);
        write_json(sibling(a->out, "_config.json"), cfg.to_json());
        std::printf("best validation HV %.6g; checkpoint %s (%s)\n", res.best_val_hv, a->out.c_str(),
                    tape::file_hash(a->out).c_str());
    });
}

// --- attack ---------------------------------------------------------------

struct AttackArgs {
    std::string config, ckpt, in, out;
    std::optional<double> alpha;
    std::optional<int> steps, rollouts, grid_h;
    std::optional<std::string> scalarization;
    std::optional<std::uint64_t> seed;
};

void add_attack_flags(CLI::App* sub, AttackArgs& a) {
    sub->add_option("--alpha", a.alpha);
    sub->add_option("--steps", a.steps);
    sub->add_option("--attack-rollouts", a.rollouts);
    sub->add_option("--grid-h", a.grid_h);
    sub->add_option("--attack-scalarization", a.scalarization, "ws | tch");
    sub->add_option("--seed", a.seed);
}

AttackConfig attack_config(const json& base, const AttackArgs& a) {
    json j = base;
    put(j, "alpha", a.alpha);
    put(j, "steps", a.steps);
    put(j, "rollouts", a.rollouts);
    put(j, "grid_h", a.grid_h);
    put(j, "scalarization", a.scalarization);
    put(j, "seed", a.seed);
    return AttackConfig::from_json(j);
}

void add_attack(CLI::App& app) {
    auto a = std::make_shared<AttackArgs>();
    auto* sub = app.add_subcommand("attack", "PAA hard-set generation over the preference grid");
    sub->add_option("--config", a->config);
    sub->add_option("--ckpt", a->ckpt)->required();
    sub->add_option("--in", a->in, "clean instances (JSONL)")->required();
    sub->add_option("--out", a->out, "hard set (JSONL)")->required();
    add_attack_flags(sub, *a);
    sub->callback([a] {
        const auto cfg = attack_config(read_json(a->config), *a);
        const auto policy = load_named(a->ckpt);
        const auto clean = load_set(a->in);
        const auto kind = policy.policy.config().kind;
        const auto grid = preference_grid(objective_count(kind), cfg.grid_h > 0 ? cfg.grid_h : default_grid_resolution(kind));
        const auto set = paa_attack(policy.policy, policy.hash, clean, grid, cfg);
        write_hard_set(a->out, set);
        write_json(sibling(a->out, "_config.json"), {{"attack", cfg.to_json()}, {"checkpoint", policy.hash}});
        std::printf("wrote %zu hard instances (%zu clean x %zu preferences) to %s\n", set.size(), clean.size(),
                    grid.size(), a->out.c_str());
    });
}

// --- defend ---------------------------------------------------------------

struct DefendArgs {
    std::string config, ckpt, out, hard, log;
    TrainArgs train;
    AttackArgs attack;
    std::optional<double> eps;
    std::optional<int> n_perturb;
    std::optional<std::string> mix, loss;
    std::optional<std::size_t> hard_per_pref;
    bool no_attack = false, no_augment = false;
};

void add_defend(CLI::App& app) {
    auto a = std::make_shared<DefendArgs>();
    auto* sub = app.add_subcommand("defend", "DPD adversarial fine-tuning");
    sub->add_option("--config", a->config);
    sub->add_option("--ckpt", a->ckpt, "starting checkpoint")->required();
    sub->add_option("--out", a->out)->required();
    sub->add_option("--hard", a->hard, "imported hard set (JSONL)");
    sub->add_option("--log", a->log);
    add_train_flags(sub, a->train);
    sub->add_option("--alpha", a->attack.alpha);
    sub->add_option("--steps", a->attack.steps);
    sub->add_option("--eps", a->eps);
    sub->add_option("--n-perturb", a->n_perturb);
    sub->add_option("--mix", a->mix, "clean:hard");
    sub->add_option("--loss", a->loss, "tch | ws");
    sub->add_option("--hard-per-pref", a->hard_per_pref);
    sub->add_flag("--no-attack", a->no_attack, "do not regenerate hard instances each epoch");
    sub->add_flag("--no-augment", a->no_augment, "train on the mini-batch preference");
    sub->callback([a] {
        json j = read_json(a->config);
        json tp = train_patch(a->train);
        if (!j.contains("train")) j["train"] = json::object();
        j["train"].merge_patch(tp);
        json ap = json::object();
        put(ap, "alpha", a->attack.alpha);
        put(ap, "steps", a->attack.steps);
        if (a->train.seed) ap["seed"] = *a->train.seed;
        if (!ap.empty()) {
            if (!j.contains("attack_config")) j["attack_config"] = json::object();
            j["attack_config"].merge_patch(ap);
        }
        put(j, "eps", a->eps);
        put(j, "n_perturb", a->n_perturb);
        put(j, "loss", a->loss);
        put(j, "hard_per_pref", a->hard_per_pref);
        if (a->mix) {
            parse_mix(*a->mix);
            j["mix"] = *a->mix;
        }
        if (a->no_attack) j["attack"] = false;
        if (a->no_augment) j["augment"] = false;
        const DpdConfig cfg = DpdConfig::from_json(j);
        const auto start = load_named(a->ckpt);
        HardInstanceSet imported;
        if (!a->hard.empty()) imported = import_hard_set(a->hard);
        const auto res = dpd_train(cfg, start.policy, a->hard.empty() ? nullptr : &imported);
        for (std::size_t e = 0; e < res.epochs.size(); ++e)
            std::fprintf(stderr, "epoch %zu loss %.5g selected tch %.5g hard %zu/%zu\n", e, res.epochs[e].mean_loss,
                         res.epochs[e].mean_selected_tch, res.epochs[e].hard_used, res.epochs[e].hard_pool);
        res.policy.save(a->out, {{"config", cfg.to_json()}, {"start", start.hash}});
        write_train_log(a->log.empty() ? sibling(a->out, "_log.csv") : a->log, res.log);
        write_json(sibling(a->out, "_config.json"), cfg.to_json());
        std::printf("wrote %s (%s)\n", a->out.c_str(), tape::file_hash(a->out).c_str());
    });
}

// --- import-hard ----------------------------------------------------------

void add_import(CLI::App& app) {
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto* sub = app.add_subcommand("import-hard", "Validate an external hard set");
    sub->add_option("--in", *in)->required();
    sub->add_option("--out", *out, "canonical copy");
    sub->callback([in, out] {
        const auto set = import_hard_set(*in);
        std::size_t imported = 0;
        for (const auto& r : set.records) imported += r.instance.provenance == Provenance::Imported;
        std::printf("%zu records (%zu imported, %zu paa) over %zu preferences\n", set.size(), imported,
                    set.size() - imported, set.by_preference().size());
        if (!out->empty()) write_hard_set(*out, set);
    });
}

// --- eval -----------------------------------------------------------------

struct EvalArgs {
    std::string config, out, attack_in;
    std::vector<std::string> ckpts, sets;
    std::optional<int> grid_h, starts, oracle_restarts;
    AttackArgs attack;
};

EvalOptions eval_options(const json& base, const std::optional<int>& grid_h, const std::optional<int>& starts,
                         const std::optional<int>& restarts) {
    EvalOptions e;
    e.grid_h = base.value("grid_h", 0);
    e.starts = base.value("starts", 0);
    e.oracle.restarts = base.value("oracle_restarts", e.oracle.restarts);
    if (grid_h) e.grid_h = *grid_h;
    if (starts) e.starts = *starts;
    if (restarts) e.oracle.restarts = *restarts;
    return e;
}

void add_eval(CLI::App& app) {
    auto a = std::make_shared<EvalArgs>();
    auto* sub = app.add_subcommand("eval", "HV and gap of checkpoints against the oracle");
    sub->add_option("--config", a->config);
    sub->add_option("--ckpt", a->ckpts, "checkpoint, optionally name=path")->required();
    sub->add_option("--set", a->sets, "instance set, name=path.jsonl");
    sub->add_option("--attack-in", a->attack_in, "clean set: evaluate the first checkpoint before and after PAA");
    sub->add_option("--grid-h", a->grid_h);
    sub->add_option("--starts", a->starts);
    sub->add_option("--oracle-restarts", a->oracle_restarts);
    sub->add_option("--alpha", a->attack.alpha);
    sub->add_option("--steps", a->attack.steps);
    sub->add_option("--seed", a->attack.seed);
    sub->add_option("--out", a->out, "report CSV")->required();
    sub->callback([a] {
        const json cfg = read_json(a->config);
        const auto eval = eval_options(cfg.value("eval", json::object()), a->grid_h, a->starts, a->oracle_restarts);
        std::vector<NamedPolicy> policies;
        for (const auto& spec : a->ckpts) {
            const auto eq = spec.find('=');
            policies.push_back(eq == std::string::npos ? load_named(spec)
                                                       : load_named(spec.substr(eq + 1), spec.substr(0, eq)));
        }
        Report rep;
        if (!a->attack_in.empty()) {
            AttackEvalConfig ac;
            ac.attack = attack_config(cfg.value("attack", json::object()), a->attack);
            ac.eval = eval;
            rep = run_attack_eval(policies.front(), load_set(a->attack_in), ac).report;
        } else {
            if (a->sets.empty()) throw ConfigError("eval needs --set or --attack-in");
            std::vector<std::pair<std::string, std::vector<Instance>>> sets;
            for (const auto& spec : a->sets) {
                const auto eq = spec.find('=');
                if (eq == std::string::npos) throw ConfigError("--set expects name=path");
                const std::string path = spec.substr(eq + 1);
                std::vector<Instance> inst;
                try {
                    inst = load_set(path);
                } catch (const SchemaError&) {
                    inst = read_hard_set(path).instances();  // hard sets carry extra fields
                }
                sets.emplace_back(spec.substr(0, eq), std::move(inst));
            }
            rep = run_defense_eval(policies, sets, eval);
        }
        write_report(a->out, rep);
        std::cout << report_csv(rep);
    });
}

// --- probe ----------------------------------------------------------------

void add_probe(CLI::App& app) {
    struct Args {
        std::string config, ckpt, out;
        std::optional<std::size_t> n, count;
        std::optional<std::vector<double>> c_dists;
        std::optional<std::uint64_t> seed;
        std::optional<int> grid_h, starts, clusters;
    };
    auto a = std::make_shared<Args>();
    auto* sub = app.add_subcommand("probe", "Gap against the oracle across GMM cluster spreads");
    sub->add_option("--config", a->config);
    sub->add_option("--ckpt", a->ckpt)->required();
    sub->add_option("--n", a->n);
    sub->add_option("--count", a->count);
    sub->add_option("--c-dist", a->c_dists)->delimiter(',');
    sub->add_option("--clusters", a->clusters);
    sub->add_option("--seed", a->seed);
    sub->add_option("--grid-h", a->grid_h);
    sub->add_option("--starts", a->starts);
    sub->add_option("--out", a->out)->required();
    sub->callback([a] {
        const json j = read_json(a->config);
        const auto policy = load_named(a->ckpt);
        ProbeConfig cfg;
        cfg.kind = policy.policy.config().kind;
        cfg.n = a->n.value_or(j.value("n", cfg.n));
        cfg.count = a->count.value_or(j.value("count", cfg.count));
        cfg.c_dists = a->c_dists.value_or(j.value("c_dists", cfg.c_dists));
        cfg.clusters = a->clusters.value_or(j.value("clusters", cfg.clusters));
        cfg.seed = a->seed.value_or(j.value("seed", cfg.seed));
        cfg.eval = eval_options(j.value("eval", json::object()), a->grid_h, a->starts, std::nullopt);
        const auto rep = run_probe(policy, cfg);
        write_report(a->out, rep);
        std::cout << report_csv(rep);
    });
}

// --- sweep ----------------------------------------------------------------

void add_sweep(CLI::App& app) {
    struct Args {
        std::string config, ckpt, in, out, param;
        std::vector<double> values;
        std::optional<int> grid_h, starts, epochs;
        AttackArgs attack;
    };
    auto a = std::make_shared<Args>();
    auto* sub = app.add_subcommand("sweep", "One evaluation per value of t, alpha, eps or n_perturb");
    sub->add_option("--config", a->config);
    sub->add_option("--ckpt", a->ckpt)->required();
    sub->add_option("--in", a->in, "clean instances")->required();
    sub->add_option("--param", a->param, "t | alpha | eps | n_perturb")->required();
    sub->add_option("--values", a->values)->delimiter(',')->required();
    sub->add_option("--grid-h", a->grid_h);
    sub->add_option("--starts", a->starts);
    sub->add_option("--epochs", a->epochs, "DPD epochs for eps / n_perturb sweeps");
    sub->add_option("--alpha", a->attack.alpha);
    sub->add_option("--steps", a->attack.steps);
    sub->add_option("--seed", a->attack.seed);
    sub->add_option("--out", a->out)->required();
    sub->callback([a] {
        const json j = read_json(a->config);
        SweepConfig cfg;
        cfg.param = sweep_param_from_string(a->param);
        cfg.values = a->values;
        cfg.attack_eval.attack = attack_config(j.value("attack", json::object()), a->attack);
        cfg.attack_eval.eval = eval_options(j.value("eval", json::object()), a->grid_h, a->starts, std::nullopt);
        json dj = j.value("dpd", json::object());
        if (a->epochs) dj["train"]["epochs"] = *a->epochs;
        cfg.dpd = DpdConfig::from_json(dj);
        const auto policy = load_named(a->ckpt);
        cfg.dpd.train.kind = policy.policy.config().kind;
        cfg.dpd.train.policy = policy.policy.config();
        const auto clean = load_set(a->in);
        // Train at the size of the evaluated set unless the config pins it.
        if (!clean.empty() && !(dj.contains("train") && dj["train"].contains("n"))) cfg.dpd.train.n = clean[0].size();
        const auto rep = run_sweep(policy, clean, cfg);
        write_report(a->out, rep);
        std::cout << report_csv(rep);
    });
}

// --- report ---------------------------------------------------------------

void add_report(CLI::App& app) {
    auto in = std::make_shared<std::vector<std::string>>();
    auto* sub = app.add_subcommand("report", "Print report tables with their metadata");
    sub->add_option("--in", *in)->required();
    sub->callback([in] {
        for (const auto& path : *in) {
            const auto rep = read_report(path);
            std::printf("== %s (%s)\n", path.c_str(), rep.meta.value("command", std::string("?")).c_str());
            if (rep.meta.contains("checkpoint")) std::printf("checkpoint %s\n", rep.meta["checkpoint"].dump().c_str());
            if (rep.meta.contains("reference")) std::printf("reference  %s\n", rep.meta["reference"].dump().c_str());
            std::vector<std::size_t> width(rep.columns.size());
            for (std::size_t c = 0; c < rep.columns.size(); ++c) {
                width[c] = rep.columns[c].size();
                for (const auto& row : rep.rows) width[c] = std::max(width[c], row[c].size());
            }
            auto line = [&](const std::vector<std::string>& cells) {
                for (std::size_t c = 0; c < cells.size(); ++c) std::printf("%-*s  ", (int)width[c], cells[c].c_str());
                std::printf("\n");
            };
            line(rep.columns);
            for (const auto& row : rep.rows) line(row);
        }
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mocoguard: adversarial robustness for multi-objective neural solvers"};
    app.require_subcommand(1);
    add_gen(app);
    add_train(app);
    add_attack(app);
    add_defend(app);
    add_import(app);
    add_eval(app);
    add_probe(app);
    add_sweep(app);
    add_report(app);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const mocoguard::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
