#include "mocoguard/harness.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "mocoguard/errors.hpp"
#include "mocoguard/pareto.hpp"
#include "mocoguard/rng.hpp"

namespace mocoguard {

namespace {

using Fronts = std::vector<std::vector<ObjectiveVector>>;

class Stopwatch {
  public:
    double seconds() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  private:
    using Clock = std::chrono::steady_clock;
    Clock::time_point start_ = Clock::now();
};

Fronts concat(std::initializer_list<const Fronts*> parts) {
    Fronts out;
    for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
    return out;
}

nlohmann::json reference_json(const ObjectiveVector& r) { return r; }

}  // namespace

void Report::add_row(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw ShapeError("report row has " + std::to_string(row.size()) + " cells");
    rows.push_back(std::move(row));
}

std::size_t Report::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw ConfigError("report has no column " + name);
}

double Report::number(std::size_t row, const std::string& name) const { return std::stod(rows.at(row).at(column(name))); }

std::string report_csv(const Report& r) {
    std::ostringstream out;
    for (const auto& [key, value] : r.meta.items()) out << "# " << key << "=" << value.dump() << "\n";
    for (std::size_t i = 0; i < r.columns.size(); ++i) out << (i ? "," : "") << r.columns[i];
    out << "\n";
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    return out.str();
}

void write_report(const std::filesystem::path& path, const Report& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << report_csv(r);
    if (!out) throw IoError("write failed: " + path.string());
}

Report read_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    Report r;
    std::string line;
    bool header = false;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!s.empty() && s.back() == ',') cells.emplace_back();
        return cells;
    };
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw SchemaError("bad report metadata line");
            try {
                r.meta[line.substr(2, eq - 2)] = nlohmann::json::parse(line.substr(eq + 1));
            } catch (const nlohmann::json::exception& e) {
                throw SchemaError(std::string("bad report metadata: ") + e.what());
            }
        } else if (!header) {
            r.columns = split(line);
            header = true;
        } else if (!line.empty()) {
            auto cells = split(line);
            if (cells.size() != r.columns.size()) throw SchemaError("report row width differs from header");
            r.rows.push_back(std::move(cells));
        }
    }
    if (!header) throw SchemaError("report has no header");
    return r;
}

NamedPolicy load_named(const std::filesystem::path& path, std::string name) {
    if (!std::filesystem::exists(path)) throw IoError("missing checkpoint " + path.string());
    return {name.empty() ? path.stem().string() : std::move(name), Policy::load(path), tape::file_hash(path)};
}

nlohmann::json EvalOptions::to_json() const {
    return {{"grid_h", grid_h},
            {"starts", starts},
            {"oracle_restarts", oracle.restarts},
            {"oracle_seed", oracle.seed},
            {"brute_force_max", oracle.brute_force_max}};
}

PreferenceGrid eval_grid(ProblemKind kind, const EvalOptions& opts) {
    return preference_grid(objective_count(kind), opts.grid_h > 0 ? opts.grid_h : default_grid_resolution(kind));
}

nlohmann::json ProbeConfig::to_json() const {
    return {{"kind", to_string(kind)}, {"n", n},       {"count", count},         {"c_dists", c_dists},
            {"clusters", clusters},    {"seed", seed}, {"eval", eval.to_json()}};
}

Report run_probe(const NamedPolicy& policy, const ProbeConfig& cfg) {
    if (policy.policy.config().kind != cfg.kind) throw ConfigError("checkpoint kind differs from probe kind");
    if (cfg.c_dists.empty()) throw ConfigError("probe needs at least one c_dist");
    Report rep;
    rep.columns = {"c_dist", "hv_model", "hv_oracle", "gap", "wall_s"};
    rep.meta["command"] = "probe";
    rep.meta["config"] = cfg.to_json();
    rep.meta["checkpoint"] = {{"name", policy.name}, {"hash", policy.hash}};
    const auto grid = eval_grid(cfg.kind, cfg.eval);
    nlohmann::json refs = nlohmann::json::object();
    for (std::size_t k = 0; k < cfg.c_dists.size(); ++k) {
        const Stopwatch watch;
        const double c = cfg.c_dists[k];
        const auto set = gen_gmm(cfg.kind, cfg.n, cfg.count, c, cfg.clusters, stream_seed(cfg.seed, "probe", k));
        const auto model = model_fronts(policy.policy, set, grid, cfg.eval.starts);
        const auto oracle = oracle_fronts(set, grid, cfg.eval.oracle);
        const auto cmp = compare_fronts(model, oracle);
        refs[format_double(c)] = reference_json(cmp.reference);
        rep.add_row({format_double(c), format_double(cmp.mean_hv_model), format_double(cmp.mean_hv_oracle),
                     format_double(cmp.gap), format_double(watch.seconds())});
    }
    rep.meta["reference"] = refs;
    return rep;
}

nlohmann::json AttackEvalConfig::to_json() const { return {{"attack", attack.to_json()}, {"eval", eval.to_json()}}; }

std::size_t attack_eval_preference(std::uint64_t seed, std::size_t i, std::size_t grid_size) {
    return Rng(seed, "attack-eval-pref", i).index(grid_size);
}

AttackEvalResult run_attack_eval(const NamedPolicy& policy, const std::vector<Instance>& clean,
                                 const AttackEvalConfig& cfg) {
    if (clean.empty()) throw ConfigError("attack evaluation needs clean instances");
    const ProblemKind kind = policy.policy.config().kind;
    for (const auto& x : clean)
        if (x.kind != kind) throw SchemaError("instance kind differs from the checkpoint");
    cfg.attack.validate();

    AttackEvalResult res;
    Report& rep = res.report;
    rep.columns = {"set", "hv_model", "hv_oracle", "gap", "wall_s"};
    rep.meta["command"] = "attack-eval";
    rep.meta["config"] = cfg.to_json();
    rep.meta["checkpoint"] = {{"name", policy.name}, {"hash", policy.hash}};

    const auto attack_grid = preference_grid(objective_count(kind), cfg.attack.grid_h > 0
                                                                        ? cfg.attack.grid_h
                                                                        : default_grid_resolution(kind));
    const auto grid = eval_grid(kind, cfg.eval);

    const Stopwatch clean_watch;
    const auto m_clean = model_fronts(policy.policy, clean, grid, cfg.eval.starts);
    const auto o_clean = oracle_fronts(clean, grid, cfg.eval.oracle);
    const double clean_s = clean_watch.seconds();

    const Stopwatch paa_watch;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < clean.size(); ++i)
        pairs.emplace_back(i, attack_eval_preference(cfg.attack.seed, i, attack_grid.size()));
    const auto hard = paa_attack_pairs(policy.policy, policy.hash, clean, attack_grid, pairs, cfg.attack);
    res.attacked = hard.instances();
    const auto m_paa = model_fronts(policy.policy, res.attacked, grid, cfg.eval.starts);
    const auto o_paa = oracle_fronts(res.attacked, grid, cfg.eval.oracle);
    const double paa_s = paa_watch.seconds();

    res.reference = reference_point(concat({&m_clean, &o_clean, &m_paa, &o_paa}));
    const auto c_clean = compare_fronts(m_clean, o_clean, res.reference);
    const auto c_paa = compare_fronts(m_paa, o_paa, res.reference);
    res.hv_clean = c_clean.hv_model;
    res.hv_attacked = c_paa.hv_model;
    rep.meta["reference"] = reference_json(res.reference);
    rep.meta["attacked_preferences"] = [&] {
        std::vector<std::size_t> li;
        for (const auto& p : pairs) li.push_back(p.second);
        return li;
    }();
    rep.add_row({"clean", format_double(c_clean.mean_hv_model), format_double(c_clean.mean_hv_oracle),
                 format_double(c_clean.gap), format_double(clean_s)});
    rep.add_row({"paa", format_double(c_paa.mean_hv_model), format_double(c_paa.mean_hv_oracle),
                 format_double(c_paa.gap), format_double(paa_s)});
    return res;
}

Report run_defense_eval(const std::vector<NamedPolicy>& policies,
                        const std::vector<std::pair<std::string, std::vector<Instance>>>& sets,
                        const EvalOptions& eval) {
    if (policies.empty() || sets.empty()) throw ConfigError("defense evaluation needs checkpoints and sets");
    const ProblemKind kind = policies.front().policy.config().kind;
    for (const auto& p : policies)
        if (p.policy.config().kind != kind) throw ConfigError("checkpoints disagree on the problem kind");
    Report rep;
    rep.columns = {"checkpoint", "set", "hv_model", "hv_oracle", "gap", "wall_s"};
    rep.meta["command"] = "defense-eval";
    rep.meta["config"] = {{"eval", eval.to_json()}};
    nlohmann::json ck = nlohmann::json::array();
    for (const auto& p : policies) ck.push_back({{"name", p.name}, {"hash", p.hash}});
    rep.meta["checkpoints"] = ck;
    const auto grid = eval_grid(kind, eval);
    nlohmann::json refs = nlohmann::json::object();
    for (const auto& [set_name, instances] : sets) {
        for (const auto& x : instances)
            if (x.kind != kind) throw SchemaError("set " + set_name + " holds instances of another kind");
        const Stopwatch oracle_watch;
        const auto oracle = oracle_fronts(instances, grid, eval.oracle);
        const double oracle_s = oracle_watch.seconds();
        std::vector<Fronts> model;
        std::vector<double> secs;
        for (const auto& p : policies) {
            const Stopwatch w;
            model.push_back(model_fronts(p.policy, instances, grid, eval.starts));
            secs.push_back(w.seconds() + oracle_s);
        }
        Fronts all = oracle;
        for (const auto& m : model) all.insert(all.end(), m.begin(), m.end());
        const auto r = reference_point(all);
        refs[set_name] = reference_json(r);
        for (std::size_t k = 0; k < policies.size(); ++k) {
            const auto c = compare_fronts(model[k], oracle, r);
            rep.add_row({policies[k].name, set_name, format_double(c.mean_hv_model), format_double(c.mean_hv_oracle),
                         format_double(c.gap), format_double(secs[k])});
        }
    }
    rep.meta["reference"] = refs;
    return rep;
}

SweepParam sweep_param_from_string(const std::string& name) {
    if (name == "t" || name == "steps") return SweepParam::Steps;
    if (name == "alpha") return SweepParam::Alpha;
    if (name == "eps") return SweepParam::Eps;
    if (name == "n_perturb" || name == "n-perturb") return SweepParam::NPerturb;
    throw ConfigError("unknown sweep parameter " + name);
}

std::string to_string(SweepParam p) {
    switch (p) {
        case SweepParam::Steps: return "t";
        case SweepParam::Alpha: return "alpha";
        case SweepParam::Eps: return "eps";
        case SweepParam::NPerturb: return "n_perturb";
    }
    return "?";
}

Report run_sweep(const NamedPolicy& policy, const std::vector<Instance>& clean, const SweepConfig& cfg) {
    if (cfg.values.empty()) throw ConfigError("sweep needs at least one value");
    Report rep;
    rep.columns = {"param", "value", "hv_clean", "hv_paa", "gap_clean", "gap_paa", "wall_s"};
    rep.meta["command"] = "sweep";
    rep.meta["checkpoint"] = {{"name", policy.name}, {"hash", policy.hash}};
    nlohmann::json refs = nlohmann::json::array();
    const std::string pname = to_string(cfg.param);

    if (cfg.param == SweepParam::Steps || cfg.param == SweepParam::Alpha) {
        rep.meta["config"] = {{"param", pname}, {"values", cfg.values}, {"attack_eval", cfg.attack_eval.to_json()}};
        for (double v : cfg.values) {
            const Stopwatch watch;
            AttackEvalConfig ac = cfg.attack_eval;
            if (cfg.param == SweepParam::Steps) {
                if (v < 1 || v != std::floor(v)) throw ConfigError("t must be a positive integer");
                ac.attack.steps = static_cast<int>(v);
            } else {
                ac.attack.alpha = v;
            }
            const auto res = run_attack_eval(policy, clean, ac);
            refs.push_back(reference_json(res.reference));
            const auto& r = res.report;
            rep.add_row({pname, format_double(v), r.rows[0][1], r.rows[1][1], r.rows[0][3], r.rows[1][3],
                         format_double(watch.seconds())});
        }
        rep.meta["reference"] = refs;
        return rep;
    }

    rep.meta["config"] = {{"param", pname},
                          {"values", cfg.values},
                          {"attack_eval", cfg.attack_eval.to_json()},
                          {"dpd", cfg.dpd.to_json()}};
    // The PAA set is built once against the starting checkpoint.
    const auto base = run_attack_eval(policy, clean, cfg.attack_eval);
    const auto grid = eval_grid(policy.policy.config().kind, cfg.attack_eval.eval);
    const auto o_clean = oracle_fronts(clean, grid, cfg.attack_eval.eval.oracle);
    const auto o_paa = oracle_fronts(base.attacked, grid, cfg.attack_eval.eval.oracle);
    for (double v : cfg.values) {
        const Stopwatch watch;
        DpdConfig dc = cfg.dpd;
        if (cfg.param == SweepParam::Eps) {
            dc.eps = v;
        } else {
            if (v < 1 || v != std::floor(v)) throw ConfigError("n_perturb must be a positive integer");
            dc.n_perturb = static_cast<int>(v);
        }
        const auto trained = dpd_train(dc, policy.policy);
        const auto m_clean = model_fronts(trained.policy, clean, grid, cfg.attack_eval.eval.starts);
        const auto m_paa = model_fronts(trained.policy, base.attacked, grid, cfg.attack_eval.eval.starts);
        const auto r = reference_point(concat({&m_clean, &o_clean, &m_paa, &o_paa}));
        refs.push_back(reference_json(r));
        const auto c_clean = compare_fronts(m_clean, o_clean, r);
        const auto c_paa = compare_fronts(m_paa, o_paa, r);
        rep.add_row({pname, format_double(v), format_double(c_clean.mean_hv_model), format_double(c_paa.mean_hv_model),
                     format_double(c_clean.gap), format_double(c_paa.gap), format_double(watch.seconds())});
    }
    rep.meta["reference"] = refs;
    return rep;
}

}  // namespace mocoguard
