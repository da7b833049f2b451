#include "mocoguard/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mocoguard/errors.hpp"

namespace mocoguard {

int objective_count(ProblemKind kind) { return kind == ProblemKind::TriTSP ? 3 : 2; }

bool is_tsp(ProblemKind kind) { return kind == ProblemKind::BiTSP || kind == ProblemKind::TriTSP; }

std::string to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::BiTSP: return "BiTSP";
        case ProblemKind::TriTSP: return "TriTSP";
        case ProblemKind::BiCVRP: return "BiCVRP";
        case ProblemKind::BiKP: return "BiKP";
    }
    return "?";
}

ProblemKind problem_kind_from_string(const std::string& name) {
    if (name == "BiTSP" || name == "bitsp" || name == "tsp2") return ProblemKind::BiTSP;
    if (name == "TriTSP" || name == "tritsp" || name == "tsp3") return ProblemKind::TriTSP;
    if (name == "BiCVRP" || name == "bicvrp" || name == "cvrp") return ProblemKind::BiCVRP;
    if (name == "BiKP" || name == "bikp" || name == "kp") return ProblemKind::BiKP;
    throw ConfigError("unknown problem kind '" + name + "'");
}

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::Clean: return "clean";
        case Provenance::Gmm: return "gmm";
        case Provenance::HeavyTail: return "heavytail";
        case Provenance::Paa: return "paa";
        case Provenance::Imported: return "imported";
    }
    return "?";
}

Provenance provenance_from_string(const std::string& name) {
    if (name == "clean") return Provenance::Clean;
    if (name == "gmm") return Provenance::Gmm;
    if (name == "heavytail") return Provenance::HeavyTail;
    if (name == "paa") return Provenance::Paa;
    if (name == "imported") return Provenance::Imported;
    throw SchemaError("unknown provenance '" + name + "'");
}

std::size_t Instance::size() const {
    return kind == ProblemKind::BiCVRP ? (features.rows == 0 ? 0 : features.rows - 1) : features.rows;
}

void validate_instance(const Instance& inst) {
    const auto fail = [&](const std::string& what) { throw SchemaError("instance '" + inst.id + "': " + what); };
    const std::size_t expected_cols = is_tsp(inst.kind) ? 2 * objective_count(inst.kind)
                                      : inst.kind == ProblemKind::BiCVRP ? 2
                                                                         : 3;
    if (inst.features.cols != expected_cols) fail("expected " + std::to_string(expected_cols) + " feature columns");
    if (inst.features.data.size() != inst.features.rows * inst.features.cols) fail("feature buffer size mismatch");
    if (inst.size() < 1) fail("empty instance");
    for (double v : inst.features.data) {
        if (!std::isfinite(v)) fail("non-finite feature");
        if (v < 0.0 || v > 1.0) fail("feature outside [0,1]");
    }
    if (inst.kind == ProblemKind::BiCVRP) {
        if (inst.demands.size() != inst.size()) fail("demand count must equal customer count");
        if (!(inst.capacity > 0.0) || !std::isfinite(inst.capacity)) fail("capacity must be positive");
        for (double d : inst.demands)
            if (!(d > 0.0 && d <= 1.0 && d <= inst.capacity)) fail("demand outside (0, min(1, Q)]");
    } else if (inst.kind == ProblemKind::BiKP) {
        if (!(inst.capacity > 0.0) || !std::isfinite(inst.capacity)) fail("capacity must be positive");
        double total = 0.0;
        for (std::size_t i = 0; i < inst.features.rows; ++i) total += inst.features(i, 0);
        if (!(inst.capacity < total)) fail("capacity admits every item");
        if (!inst.demands.empty()) fail("knapsack instances carry no demands");
    } else if (!inst.demands.empty()) {
        fail("TSP instances carry no demands");
    }
}

std::string to_string(Violation v) {
    switch (v) {
        case Violation::None: return "none";
        case Violation::WrongSolutionType: return "wrong-solution-type";
        case Violation::OutOfRange: return "out-of-range";
        case Violation::Duplicate: return "duplicate";
        case Violation::Missing: return "missing";
        case Violation::EmptyRoute: return "empty-route";
        case Violation::Capacity: return "capacity";
    }
    return "?";
}

namespace {

FeasibilityReport violation(Violation v, std::string detail) { return {v, std::move(detail)}; }

FeasibilityReport check_tour(const Instance& inst, const Tour& tour) {
    const std::size_t n = inst.size();
    if (tour.order.size() != n) {
        if (tour.order.size() > n) return violation(Violation::Duplicate, "tour longer than node count");
        return violation(Violation::Missing, "tour shorter than node count");
    }
    std::vector<char> seen(n, 0);
    for (int v : tour.order) {
        if (v < 0 || static_cast<std::size_t>(v) >= n)
            return violation(Violation::OutOfRange, "node " + std::to_string(v));
        if (seen[v]) return violation(Violation::Duplicate, "node " + std::to_string(v));
        seen[v] = 1;
    }
    return {};
}

FeasibilityReport check_routes(const Instance& inst, const Routes& sol) {
    const std::size_t n = inst.size();
    std::vector<char> seen(n + 1, 0);
    std::size_t visited = 0;
    for (std::size_t r = 0; r < sol.routes.size(); ++r) {
        const auto& route = sol.routes[r];
        if (route.empty()) return violation(Violation::EmptyRoute, "route " + std::to_string(r));
        double load = 0.0;
        for (int c : route) {
            if (c < 1 || static_cast<std::size_t>(c) > n)
                return violation(Violation::OutOfRange, "customer " + std::to_string(c));
            if (seen[c]) return violation(Violation::Duplicate, "customer " + std::to_string(c));
            seen[c] = 1;
            ++visited;
            load += inst.demands[c - 1];
        }
        if (load > inst.capacity + 1e-12)
            return violation(Violation::Capacity, "route " + std::to_string(r) + " load " + std::to_string(load));
    }
    if (visited != n) return violation(Violation::Missing, std::to_string(n - visited) + " customers unvisited");
    return {};
}

FeasibilityReport check_items(const Instance& inst, const ItemSet& sol) {
    const std::size_t n = inst.size();
    std::vector<char> seen(n, 0);
    double weight = 0.0;
    for (int i : sol.items) {
        if (i < 0 || static_cast<std::size_t>(i) >= n)
            return violation(Violation::OutOfRange, "item " + std::to_string(i));
        if (seen[i]) return violation(Violation::Duplicate, "item " + std::to_string(i));
        seen[i] = 1;
        weight += inst.features(i, 0);
    }
    if (weight > inst.capacity + 1e-12)
        return violation(Violation::Capacity, "weight " + std::to_string(weight));
    return {};
}

double dist(const Matrix& f, int a, int b, std::size_t block) {
    const double dx = f(a, 2 * block) - f(b, 2 * block);
    const double dy = f(a, 2 * block + 1) - f(b, 2 * block + 1);
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

FeasibilityReport check_feasible(const Instance& inst, const Solution& sol) {
    if (is_tsp(inst.kind)) {
        if (const auto* t = std::get_if<Tour>(&sol)) return check_tour(inst, *t);
    } else if (inst.kind == ProblemKind::BiCVRP) {
        if (const auto* r = std::get_if<Routes>(&sol)) return check_routes(inst, *r);
    } else if (const auto* s = std::get_if<ItemSet>(&sol)) {
        return check_items(inst, *s);
    }
    return violation(Violation::WrongSolutionType, "solution type does not match " + to_string(inst.kind));
}

double tour_length(const Matrix& features, std::span<const int> order, std::size_t block) {
    double total = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i)
        total += dist(features, order[i], order[(i + 1) % order.size()], block);
    return total;
}

ObjectiveVector evaluate_objectives(const Instance& inst, const Solution& sol) {
    if (const auto report = check_feasible(inst, sol); !report.ok())
        throw FeasibilityError("infeasible solution (" + to_string(report.violation) + "): " + report.detail);

    const int m = objective_count(inst.kind);
    ObjectiveVector f(m, 0.0);
    if (is_tsp(inst.kind)) {
        const auto& order = std::get<Tour>(sol).order;
        for (int i = 0; i < m; ++i) f[i] = tour_length(inst.features, order, i);
    } else if (inst.kind == ProblemKind::BiCVRP) {
        for (const auto& route : std::get<Routes>(sol).routes) {
            double len = dist(inst.features, 0, route.front(), 0) + dist(inst.features, route.back(), 0, 0);
            for (std::size_t k = 1; k < route.size(); ++k) len += dist(inst.features, route[k - 1], route[k], 0);
            f[0] += len;
            f[1] = std::max(f[1], len);
        }
    } else {
        for (int i : std::get<ItemSet>(sol).items) {
            f[0] -= inst.features(i, 1);
            f[1] -= inst.features(i, 2);
        }
    }
    return f;
}

bool on_simplex(std::span<const double> w, double tol) {
    double sum = 0.0;
    for (double x : w) {
        if (!(x >= 0.0) || !std::isfinite(x)) return false;
        sum += x;
    }
    return !w.empty() && std::abs(sum - 1.0) <= tol;
}

Preference::Preference(std::vector<double> weights) : weights_(std::move(weights)) {
    if (!on_simplex(weights_)) throw ConfigError("preference is not on the simplex");
}

PreferenceGrid preference_grid(int objectives, int resolution) {
    if (resolution < 1) throw ConfigError("preference grid resolution must be >= 1");
    PreferenceGrid grid{objectives, resolution, {}};
    const double h = resolution;
    if (objectives == 2) {
        for (int k = 0; k <= resolution; ++k) grid.prefs.emplace_back(std::vector<double>{k / h, (resolution - k) / h});
    } else if (objectives == 3) {
        for (int a = 0; a <= resolution; ++a)
            for (int b = 0; a + b <= resolution; ++b) {
                const int c = resolution - a - b;
                grid.prefs.emplace_back(std::vector<double>{a / h, b / h, c / h});
            }
    } else {
        throw ConfigError("preference grid supports 2 or 3 objectives");
    }
    return grid;
}

}  // namespace mocoguard
