// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   mocoguard_acceptance [--out DIR] [--only 1,2,...] [--ckpt FILE]
//
// --ckpt skips training and uses an existing clean checkpoint for 8-11
// (criterion 8 then only evaluates it).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "mocoguard/attack.hpp"
#include "mocoguard/defend.hpp"
#include "mocoguard/harness.hpp"
#include "mocoguard/instance_gen.hpp"
#include "mocoguard/oracles.hpp"
#include "mocoguard/pareto.hpp"
#include "mocoguard/train.hpp"

using namespace mocoguard;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmtd(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

double now() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

// ---------------------------------------------------------------- 1, 2

Outcome gap_arithmetic() {
    const double a = hv_gap(0.5118, 0.5042), b = hv_gap(0.8873, 0.8779);
    return {std::abs(a - 1.48) <= 0.01 && std::abs(b - 1.06) <= 0.01,
            "hv_gap(0.5118,0.5042)=" + fmtd(a) + " hv_gap(0.8873,0.8779)=" + fmtd(b)};
}

Outcome grid_counts() {
    const auto bi = preference_grid(2, 100).size(), tri = preference_grid(3, 13).size();
    return {bi == 101 && tri == 105, "bi=" + std::to_string(bi) + " tri=" + std::to_string(tri)};
}

// ---------------------------------------------------------------- 3

Outcome hv_correctness() {
    Rng rng(kSeed, "acc-hv");
    double worst = 0.0;
    for (int c = 0; c < 1000; ++c) {
        const std::size_t m = 2 + c % 2, k = 1 + rng.index(8);
        std::vector<ObjectiveVector> pts(k, ObjectiveVector(m));
        for (auto& p : pts)
            for (auto& v : p) v = rng.uniform();
        const ObjectiveVector r(m, 1.0);
        worst = std::max(worst, std::abs(hypervolume(pts, r) - testutil::hv_inclusion_exclusion(pts, r)));
    }
    int mc_ok = 0;
    double worst_z = 0.0;
    for (int c = 0; c < 20; ++c) {
        std::vector<ObjectiveVector> pts(1 + rng.index(8), ObjectiveVector(3));
        for (auto& p : pts)
            for (auto& v : p) v = rng.uniform();
        const ObjectiveVector r(3, 1.0);
        const auto est = mc_hypervolume(pts, r, 1000000, stream_seed(kSeed, "acc-mc", c));
        const double diff = std::abs(est.value - hypervolume(pts, r));
        // A single point fills its own sampling box: zero variance, exact value.
        const double z = est.stderr_ > 0.0 ? diff / est.stderr_ : (diff <= 1e-12 ? 0.0 : INFINITY);
        worst_z = std::max(worst_z, z);
        mc_ok += z <= 3.0;
    }
    return {worst <= 1e-12 && mc_ok == 20, "max |exact-union|=" + fmtd(worst * 1e15, 3) + "e-15 over 1000; MC within 3se " +
                                               std::to_string(mc_ok) + "/20 (max " + fmtd(worst_z, 2) + " se)"};
}

// ---------------------------------------------------------------- 4

// Relative error with a floor on the denominator: central differences in
// double cannot resolve entries far below the function's roundoff.
constexpr double kFdStep = 1e-6;
constexpr double kRelFloor = 1e-4;

double rel_err(double g, double fd) { return std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), kRelFloor}); }

enum class GradFn { LogProb, AttackObjective };

struct GradEval {
    double value = 0.0;
    Matrix gx;
    tape::ParamSet gtheta;
};

GradEval eval_fn(GradFn fn, const Policy& p, const Instance& base, const Matrix& x, const Preference& pref,
                 const std::vector<std::vector<int>>& actions, std::uint64_t seed, bool want_grad) {
    Instance inst = base;
    inst.features = x;
    tape::Tape t;
    const auto net = bind(t, p);
    const auto xv = t.input(x);
    tape::Var out;
    if (fn == GradFn::LogProb) {
        const auto enc = encode(net, inst, xv, pref);
        const auto batch = rollout(net, enc, static_cast<int>(actions.size()), DecodeMode::Replay, 0, &actions);
        out = tape::sum(batch.log_prob);
    } else {
        out = attack_objective(net, inst, xv, pref, 4, seed, Scalarization::WeightedSum);
    }
    GradEval g;
    g.value = out.scalar();
    if (want_grad) {
        t.backward(out);
        g.gx = t.grad(xv);
        g.gtheta = p.params().zeros_like();
        tape::accumulate_grads(t, net.all, g.gtheta);
    }
    return g;
}

Outcome gradient_fidelity() {
    PolicyConfig pc;  // default architecture
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::uint64_t c = 0; c < 20; ++c) {
        const Policy p = Policy::init(pc, stream_seed(kSeed, "acc-grad-policy", c));
        const Instance inst = gen_uniform(ProblemKind::BiTSP, 6, 1, stream_seed(kSeed, "acc-grad-inst", c))[0];
        Rng rng(kSeed, "acc-grad", c);
        const double a = rng.uniform(0.05, 0.95);
        const Preference pref({a, 1.0 - a});
        std::vector<std::vector<int>> actions;
        {
            tape::Tape t;
            const auto net = bind(t, p);
            actions = rollout(net, encode(net, inst, t.constant(inst.features), pref), 4, DecodeMode::Sample, c).actions;
        }
        for (GradFn fn : {GradFn::LogProb, GradFn::AttackObjective}) {
            const auto g = eval_fn(fn, p, inst, inst.features, pref, actions, c, true);
            for (std::size_t i = 0; i < inst.features.data.size(); ++i) {
                Matrix xp = inst.features, xm = inst.features;
                xp.data[i] += kFdStep;
                xm.data[i] -= kFdStep;
                const double fd = (eval_fn(fn, p, inst, xp, pref, actions, c, false).value -
                                   eval_fn(fn, p, inst, xm, pref, actions, c, false).value) /
                                  (2 * kFdStep);
                worst = std::max(worst, rel_err(g.gx.data[i], fd));
                ++checked;
            }
            for (int s = 0; s < 24; ++s) {
                const std::size_t k = rng.index(p.params().values.size());
                const std::size_t e = rng.index(p.params().values[k].data.size());
                Policy pp = p, pm = p;
                pp.params().values[k].data[e] += kFdStep;
                pm.params().values[k].data[e] -= kFdStep;
                const double fd = (eval_fn(fn, pp, inst, inst.features, pref, actions, c, false).value -
                                   eval_fn(fn, pm, inst, inst.features, pref, actions, c, false).value) /
                                  (2 * kFdStep);
                worst = std::max(worst, rel_err(g.gtheta.values[k].data[e], fd));
                ++checked;
            }
        }
    }
    return {worst <= 1e-4, "max rel err " + fmtd(worst * 1e6, 3) + "e-6 over " + std::to_string(checked) +
                               " coordinates (log p and attack objective; x and theta; 20 cases, n=6)"};
}

// ---------------------------------------------------------------- 5, 6, 7

Outcome filter_correctness() {
    Rng rng(kSeed, "acc-filter");
    int ok = 0;
    for (int c = 0; c < 1000; ++c) {
        const std::size_t m = 2 + c % 2, k = 1 + rng.index(40);
        std::vector<ObjectiveVector> pts(k, ObjectiveVector(m));
        for (auto& p : pts)
            for (auto& v : p) v = c % 3 == 0 ? static_cast<double>(rng.index(6)) : rng.uniform();
        ok += nondominated_filter(pts) == testutil::filter_naive(pts);
    }
    return {ok == 1000, std::to_string(ok) + "/1000 sets equal to the pairwise oracle"};
}

Outcome selection_identity() {
    Rng rng(kSeed, "acc-select");
    int ok = 0;
    for (int c = 0; c < 1000; ++c) {
        std::vector<double> tch(1 + rng.index(16));
        // Half the draws are coarse so that ties occur.
        for (auto& v : tch) v = c % 2 ? rng.uniform(0, 5) : 0.5 * static_cast<double>(rng.index(6));
        const auto want = static_cast<std::size_t>(std::max_element(tch.begin(), tch.end()) - tch.begin());
        ok += select_adversarial(relevance_scores(tch)) == want;
    }
    return {ok == 1000, std::to_string(ok) + "/1000 draws select argmax Tch (lowest index on ties)"};
}

Outcome simplex_contract() {
    std::size_t total = 0, bad = 0, clamped = 0;
    const std::vector<std::vector<double>> lambdas{{0.0, 1.0}, {0.02, 0.98}, {0.5, 0.5}, {0.0, 0.0, 1.0}, {0.1, 0.3, 0.6}};
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        const Preference lambda(lambdas[li]);
        for (double eps : {0.1, 0.5}) {
            const auto draws = perturb_preferences(lambda, 10000, eps, stream_seed(kSeed, "acc-simplex", li));
            for (const auto& p : draws) {
                double s = 0.0;
                bool neg = false, hit_zero = false;
                for (double w : p.weights()) {
                    s += w;
                    neg |= w < 0.0;
                    hit_zero |= w == 0.0;
                }
                bad += neg || std::abs(s - 1.0) > 1e-9;
                clamped += hit_zero;
                ++total;
            }
        }
    }
    return {bad == 0 && total == 100000,
            std::to_string(total - bad) + "/" + std::to_string(total) + " on simplex, " + std::to_string(clamped) +
                " with a clamped coordinate"};
}

// ---------------------------------------------------------------- 8-11

TrainConfig desk_config() {
    TrainConfig cfg;
    cfg.kind = ProblemKind::BiTSP;
    cfg.n = 10;
    cfg.epochs = 320;  // 16 steps per epoch, 5120 steps
    cfg.seed = kSeed;
    return cfg;
}

struct Shared {
    std::filesystem::path dir;
    std::optional<NamedPolicy> clean;
    std::string ckpt_arg;
};

const NamedPolicy& clean_policy(Shared& sh, std::string& note) {
    if (sh.clean) return *sh.clean;
    std::filesystem::path path = sh.dir / "clean.bin";
    if (!sh.ckpt_arg.empty()) {
        path = sh.ckpt_arg;
        note = "loaded " + path.string();
    } else {
        const double t0 = now();
        const auto res = train_clean(desk_config());
        res.best.save(path, {{"config", desk_config().to_json()}});
        write_train_log(sh.dir / "clean_log.csv", res.log);
        note = std::to_string(res.log.back().step) + " steps in " + fmtd(now() - t0, 0) + " s";
    }
    sh.clean = load_named(path, "clean");
    return *sh.clean;
}

Outcome training_sanity(Shared& sh) {
    std::string note;
    const auto& trained = clean_policy(sh, note);
    const auto test = gen_uniform(ProblemKind::BiTSP, 10, 20, stream_seed(kSeed, "acc-heldout"));
    const auto grid = preference_grid(2, 100);
    const auto oracle = oracle_fronts(test, grid);
    const auto m_trained = model_fronts(trained.policy, test, grid);
    const auto m_init = model_fronts(Policy::init(desk_config().policy, desk_config().seed), test, grid);
    std::vector<std::vector<ObjectiveVector>> all = oracle;
    all.insert(all.end(), m_trained.begin(), m_trained.end());
    all.insert(all.end(), m_init.begin(), m_init.end());
    const auto r = reference_point(all);
    const auto ct = compare_fronts(m_trained, oracle, r), c0 = compare_fronts(m_init, oracle, r);
    return {ct.gap <= 15.0 && c0.gap > ct.gap,
            "gap trained " + fmtd(ct.gap, 2) + "% untrained " + fmtd(c0.gap, 2) + "% vs brute force, 20 instances (" +
                note + ")"};
}

double sign_test_p(int positive, int n) {
    // One-sided P(X >= positive), X ~ Bin(n, 1/2).
    double p = 0.0;
    for (int k = positive; k <= n; ++k) p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
    return p;
}

Outcome attack_effectiveness(Shared& sh) {
    std::string note;
    const auto& ck = clean_policy(sh, note);
    const auto clean = gen_uniform(ProblemKind::BiTSP, 10, 50, stream_seed(kSeed, "acc-attack"));
    AttackEvalConfig cfg;
    cfg.attack.seed = kSeed;
    const auto res = run_attack_eval(ck, clean, cfg);
    write_report(sh.dir / "attack_eval.csv", res.report);
    int pos = 0, n = 0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        if (res.hv_clean[i] == res.hv_attacked[i]) continue;
        ++n;
        pos += res.hv_clean[i] > res.hv_attacked[i];
    }
    const double p = sign_test_p(pos, n);
    const double mc = mean(res.hv_clean), ma = mean(res.hv_attacked);

    // Control: the projection alone, no gradient step.
    std::vector<Instance> projected = clean;
    for (auto& x : projected) project_instance(x);
    const auto grid = eval_grid(ProblemKind::BiTSP, cfg.eval);
    const double mp = mean(hypervolumes(model_fronts(ck.policy, projected, grid), res.reference));
    return {ma < mc && mc - ma > 0.0 && p < 0.05,
            "mean HV clean " + fmtd(mc) + " paa " + fmtd(ma) + ", " + std::to_string(pos) + "/" + std::to_string(n) +
                " pairs drop, sign p=" + fmtd(p, 6) + "; gap clean " + res.report.rows[0][3].substr(0, 6) + "% paa " +
                res.report.rows[1][3].substr(0, 6) + "%; projection-only control HV " + fmtd(mp)};
}

Outcome defense_effectiveness(Shared& sh) {
    std::string note;
    const auto& ck = clean_policy(sh, note);
    DpdConfig dc;
    dc.train = desk_config();
    dc.train.epochs = 10;
    dc.train.seed = stream_seed(kSeed, "acc-dpd");
    dc.train.policy = ck.policy.config();
    dc.attack_cfg.seed = dc.train.seed;
    const double t0 = now();
    const auto res = dpd_train(dc, ck.policy);
    const double secs = now() - t0;
    const auto path = sh.dir / "dpd.bin";
    res.policy.save(path, {{"config", dc.to_json()}, {"start", ck.hash}});
    const auto dpd = load_named(path, "dpd");

    const auto sources = gen_uniform(ProblemKind::BiTSP, 10, 50, stream_seed(kSeed, "acc-defense"));
    AttackEvalConfig ac;
    ac.attack.seed = stream_seed(kSeed, "acc-defense-attack");
    const auto grid = eval_grid(ProblemKind::BiTSP, ac.eval);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < sources.size(); ++i)
        pairs.emplace_back(i, attack_eval_preference(ac.attack.seed, i, grid.size()));
    const auto hard = paa_attack_pairs(ck.policy, ck.hash, sources, grid, pairs, ac.attack).instances();
    const auto rep = run_defense_eval({ck, dpd}, {{"clean", sources}, {"paa", hard}}, ac.eval);
    write_report(sh.dir / "defense_eval.csv", rep);
    const double clean_ck = rep.number(0, "hv_model"), clean_dpd = rep.number(1, "hv_model");
    const double hard_ck = rep.number(2, "hv_model"), hard_dpd = rep.number(3, "hv_model");
    const double degrade = 100.0 * (clean_ck - clean_dpd) / clean_ck;
    return {hard_dpd >= hard_ck && degrade < 2.0,
            "held-out PAA HV clean-ckpt " + fmtd(hard_ck) + " dpd " + fmtd(hard_dpd) + "; clean HV " + fmtd(clean_ck) +
                " -> " + fmtd(clean_dpd) + " (" + fmtd(degrade, 3) + "% degradation); 10 epochs in " + fmtd(secs, 0) +
                " s"};
}

Outcome probe_trend(Shared& sh) {
    std::string note;
    const auto& ck = clean_policy(sh, note);
    ProbeConfig cfg;
    cfg.c_dists = {1, 10, 30, 50};
    cfg.count = 200;
    cfg.seed = stream_seed(kSeed, "acc-probe");
    const auto rep = run_probe(ck, cfg);
    write_report(sh.dir / "probe.csv", rep);
    std::vector<double> gaps;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) gaps.push_back(rep.number(i, "gap"));
    int inversions = 0;
    double worst = 0.0;
    for (std::size_t i = 1; i < gaps.size(); ++i)
        if (gaps[i] < gaps[i - 1]) {
            ++inversions;
            worst = std::max(worst, gaps[i - 1] - gaps[i]);
        }
    std::string g;
    for (std::size_t i = 0; i < gaps.size(); ++i) g += (i ? ", " : "") + fmtd(gaps[i], 3);
    return {inversions == 0 || (inversions == 1 && worst <= 0.2),
            "gap by c_dist {1,10,30,50}: " + g + " %; " + std::to_string(inversions) + " inversion(s)"};
}

// ---------------------------------------------------------------- 12

Outcome degenerate_equivalence() {
    DpdConfig dc;
    dc.train = desk_config();
    dc.train.epochs = 2;
    dc.train.epoch_size = 128;
    dc.attack = false;
    dc.augment = false;
    dc.loss = Scalarization::WeightedSum;
    dc.mix_clean = 1;
    dc.mix_hard = 0;
    const Policy init = Policy::init(dc.train.policy, 11);
    std::vector<tape::ParamSet> a, b;
    train_clean(dc.train, init, [&](std::uint64_t, const Policy& p, const StepMetrics&) { a.push_back(p.params()); });
    dpd_train(dc, init, nullptr, [&](std::uint64_t, const Policy& p, const StepMetrics&) { b.push_back(p.params()); });
    std::size_t same = 0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) same += a[i] == b[i];
    return {a.size() == b.size() && same == a.size() && !a.empty(),
            std::to_string(same) + "/" + std::to_string(a.size()) + " steps bitwise identical"};
}

// ---------------------------------------------------------------- 13

Outcome oracle_soundness() {
    int dp_ok = 0;
    for (std::uint64_t c = 0; c < 100; ++c) {
        const std::size_t n = 15;
        Rng rng(kSeed, "acc-kp", c);
        Instance inst;
        inst.kind = ProblemKind::BiKP;
        inst.features = Matrix(n, 3);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            inst.features(i, 0) = static_cast<double>(1 + rng.index(kKnapsackWeightScale)) / kKnapsackWeightScale;
            inst.features(i, 1) = rng.uniform();
            inst.features(i, 2) = rng.uniform();
            total += inst.features(i, 0);
        }
        inst.capacity = std::floor(total * 0.35 * kKnapsackWeightScale) / kKnapsackWeightScale;
        const double a = rng.uniform();
        const std::vector<double> lambda{a, 1.0 - a};
        std::vector<double> score(n);
        for (std::size_t i = 0; i < n; ++i) score[i] = lambda[0] * inst.features(i, 1) + lambda[1] * inst.features(i, 2);
        double best = 0.0;
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            double w = 0.0, v = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (mask >> i & 1) {
                    w += inst.features(i, 0);
                    v += score[i];
                }
            if (w <= inst.capacity + 1e-12) best = std::max(best, v);
        }
        const auto dp = ws_dp_knapsack(inst, lambda);
        const double got = -weighted_sum(evaluate_objectives(inst, dp), lambda);
        dp_ok += std::abs(got - best) <= 1e-12 * std::max(1.0, best);
    }

    const auto grid = preference_grid(2, 10);
    double worst_mean = 0.0, worst_pair = 0.0;
    int ls_ok = 0;
    for (std::uint64_t c = 0; c < 100; ++c) {
        const auto inst = gen_uniform(ProblemKind::BiTSP, 9, 1, stream_seed(kSeed, "acc-2opt", c))[0];
        std::vector<ObjectiveVector> all;
        for (const auto& t : testutil::all_tours(9)) all.push_back(evaluate_objectives(inst, Tour{t}));
        double excess = 0.0;
        for (const auto& pref : grid.prefs) {
            double best = 1e300;
            for (const auto& f : all) best = std::min(best, weighted_sum(f, pref.weights()));
            const double got =
                weighted_sum(evaluate_objectives(inst, ws_local_search_tsp(inst, pref.weights(), 10)), pref.weights());
            excess += got / best - 1.0;
            worst_pair = std::max(worst_pair, got / best - 1.0);
        }
        excess /= static_cast<double>(grid.size());
        worst_mean = std::max(worst_mean, excess);
        ls_ok += excess <= 0.02;
    }
    return {dp_ok == 100 && ls_ok == 100,
            "knapsack DP exact " + std::to_string(dp_ok) + "/100 (n=15); 2-opt sweep mean excess <= 2% on " +
                std::to_string(ls_ok) + "/100 (n=9, worst instance " + fmtd(100 * worst_mean, 3) + "%, worst single lambda " +
                fmtd(100 * worst_pair, 2) + "%)"};
}

}  // namespace

int main(int argc, char** argv) {
    Shared sh;
    sh.dir = "acceptance_out";
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--out") && i + 1 < argc) {
            sh.dir = argv[++i];
        } else if (!std::strcmp(argv[i], "--ckpt") && i + 1 < argc) {
            sh.ckpt_arg = argv[++i];
        } else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string tok;
            while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
        } else {
            std::fprintf(stderr, "usage: %s [--out DIR] [--only 1,2,...] [--ckpt FILE]\n", argv[0]);
            return 2;
        }
    }
    std::filesystem::create_directories(sh.dir);

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"gap arithmetic", gap_arithmetic},
        {"preference grid counts", grid_counts},
        {"hypervolume correctness", hv_correctness},
        {"gradient fidelity", gradient_fidelity},
        {"dominance filtering", filter_correctness},
        {"selection identity", selection_identity},
        {"simplex contract", simplex_contract},
        {"training sanity", [&] { return training_sanity(sh); }},
        {"attack effectiveness", [&] { return attack_effectiveness(sh); }},
        {"defense effectiveness", [&] { return defense_effectiveness(sh); }},
        {"probe trend", [&] { return probe_trend(sh); }},
        {"degenerate-config equivalence", degenerate_equivalence},
        {"oracle soundness", oracle_soundness},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const double t0 = now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%-4s %2d %-30s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(),
                    now() - t0);
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
