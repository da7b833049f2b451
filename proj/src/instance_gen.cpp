#include "mocoguard/instance_gen.hpp"

#include <algorithm>
#include <cmath>

#include "mocoguard/errors.hpp"
#include "mocoguard/rng.hpp"

namespace mocoguard {

double default_kp_capacity(std::size_t n) { return static_cast<double>(n) / 8.0; }

double default_cvrp_capacity(std::size_t n) { return n <= 20 ? 3.0 : n <= 50 ? 4.0 : 5.0; }

std::string to_string(HeavyTail d) {
    switch (d) {
        case HeavyTail::LogNormal: return "lognormal";
        case HeavyTail::Beta: return "beta";
        case HeavyTail::Gamma: return "gamma";
    }
    return "?";
}

HeavyTail heavy_tail_from_string(const std::string& name) {
    if (name == "lognormal") return HeavyTail::LogNormal;
    if (name == "beta") return HeavyTail::Beta;
    if (name == "gamma") return HeavyTail::Gamma;
    throw ConfigError("unknown distribution '" + name + "'");
}

double sample_heavy_tail(HeavyTail d, Rng& rng) {
    switch (d) {
        case HeavyTail::LogNormal: return rng.lognormal(0.0, 1.0);
        case HeavyTail::Beta: return rng.beta(2.0, 5.0);
        case HeavyTail::Gamma: return rng.gamma(2.0, 0.5);
    }
    throw ConfigError("unknown distribution");
}

void minmax_project_rows(Matrix& f, std::size_t row_begin) {
    if (row_begin >= f.rows) return;
    for (std::size_t c = 0; c < f.cols; ++c) {
        double lo = f(row_begin, c), hi = lo;
        for (std::size_t r = row_begin; r < f.rows; ++r) {
            lo = std::min(lo, f(r, c));
            hi = std::max(hi, f(r, c));
        }
        const double span = hi - lo;
        for (std::size_t r = row_begin; r < f.rows; ++r)
            f(r, c) = span > 0.0 ? std::clamp((f(r, c) - lo) / span, 0.0, 1.0) : 0.5;
    }
}

Matrix minmax_project(const Matrix& features) {
    Matrix out = features;
    minmax_project_rows(out, 0);
    return out;
}

void project_instance(Instance& inst) {
    minmax_project_rows(inst.features, inst.kind == ProblemKind::BiCVRP ? 1 : 0);
}

namespace {

std::size_t feature_cols(ProblemKind kind) {
    return is_tsp(kind) ? 2 * objective_count(kind) : kind == ProblemKind::BiCVRP ? 2 : 3;
}

std::size_t feature_rows(ProblemKind kind, std::size_t n) { return kind == ProblemKind::BiCVRP ? n + 1 : n; }

void check_size(std::size_t n) {
    if (n < 4) throw ConfigError("instance size must be at least 4");
}

/// Fills demands / capacity and, for knapsack, guarantees a binding capacity.
void finish_instance(Instance& inst, Rng& rng, const GenOptions& opts) {
    const std::size_t n = inst.size();
    if (inst.kind == ProblemKind::BiCVRP) {
        inst.capacity = opts.cvrp_capacity > 0.0 ? opts.cvrp_capacity : default_cvrp_capacity(n);
        inst.demands.resize(n);
        for (auto& d : inst.demands) d = static_cast<double>(1 + rng.index(9)) / 10.0;
    } else if (inst.kind == ProblemKind::BiKP) {
        inst.capacity = opts.kp_capacity > 0.0 ? opts.kp_capacity : default_kp_capacity(n);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += inst.features(i, 0);
        if (!(inst.capacity < total))
            throw ConfigError("knapsack capacity " + std::to_string(inst.capacity) + " admits every item");
    }
}

Instance blank(ProblemKind kind, std::size_t n, std::string id, Provenance prov) {
    Instance inst;
    inst.kind = kind;
    inst.id = std::move(id);
    inst.provenance = prov;
    inst.features = Matrix(feature_rows(kind, n), feature_cols(kind));
    return inst;
}

std::string make_id(const char* prefix, std::uint64_t seed, std::size_t i) {
    return std::string(prefix) + "-" + std::to_string(seed) + "-" + std::to_string(i);
}

}  // namespace

std::vector<Instance> gen_uniform(ProblemKind kind, std::size_t n, std::size_t count, std::uint64_t seed,
                                  const GenOptions& opts) {
    check_size(n);
    std::vector<Instance> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(seed, "gen-uniform", i);
        Instance inst = blank(kind, n, make_id("uniform", seed, i), Provenance::Clean);
        for (auto& v : inst.features.data) v = rng.uniform();
        if (kind == ProblemKind::BiKP)
            for (std::size_t r = 0; r < n; ++r) inst.features(r, 0) = 1.0 - rng.uniform();  // weights in (0,1]
        finish_instance(inst, rng, opts);
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<Instance> gen_gmm(ProblemKind kind, std::size_t n, std::size_t count, double c_dist,
                              std::size_t k_clusters, std::uint64_t seed, const GenOptions& opts) {
    check_size(n);
    if (c_dist < 1.0) throw ConfigError("c_dist must be >= 1");
    if (k_clusters < 1) throw ConfigError("k_clusters must be >= 1");
    std::vector<Instance> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(seed, "gen-gmm", i);
        Instance inst = blank(kind, n, make_id("gmm", seed, i), Provenance::Gmm);
        auto& f = inst.features;
        // Coordinates come in (x, y) pairs; knapsack columns are independent 1D mixtures.
        const std::size_t group = kind == ProblemKind::BiKP ? 1 : 2;
        for (std::size_t c0 = 0; c0 < f.cols; c0 += group) {
            std::vector<double> centers(k_clusters * group);
            for (auto& c : centers) c = rng.uniform(0.0, c_dist);
            for (std::size_t r = 0; r < f.rows; ++r) {
                const std::size_t k = r % k_clusters;
                for (std::size_t g = 0; g < group; ++g) f(r, c0 + g) = rng.normal(centers[k * group + g], 1.0);
            }
        }
        minmax_project_rows(f, 0);
        finish_instance(inst, rng, opts);
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<Instance> gen_heavytail(ProblemKind kind, std::size_t n, std::size_t count, HeavyTail dist,
                                    std::uint64_t seed, const GenOptions& opts) {
    check_size(n);
    std::vector<Instance> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(seed, "gen-heavytail", static_cast<std::uint64_t>(dist), i);
        Instance inst = blank(kind, n, make_id(to_string(dist).c_str(), seed, i), Provenance::HeavyTail);
        for (auto& v : inst.features.data) v = sample_heavy_tail(dist, rng);
        minmax_project_rows(inst.features, 0);
        finish_instance(inst, rng, opts);
        out.push_back(std::move(inst));
    }
    return out;
}

}  // namespace mocoguard
