#include "mocoguard/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mocoguard/errors.hpp"
#include "mocoguard/pareto.hpp"
#include "mocoguard/rng.hpp"
#include "mocoguard/scalarize.hpp"

namespace mocoguard {

namespace {

using DistMatrix = std::vector<double>;  // n x n, row-major

DistMatrix block_distances(const Matrix& f, std::size_t rows, std::size_t block) {
    DistMatrix d(rows * rows, 0.0);
    for (std::size_t a = 0; a < rows; ++a)
        for (std::size_t b = 0; b < rows; ++b) {
            const double dx = f(a, 2 * block) - f(b, 2 * block);
            const double dy = f(a, 2 * block + 1) - f(b, 2 * block + 1);
            d[a * rows + b] = std::sqrt(dx * dx + dy * dy);
        }
    return d;
}

DistMatrix weighted_distances(const Instance& inst, std::span<const double> lambda) {
    const std::size_t n = inst.size();
    const int m = objective_count(inst.kind);
    if (lambda.size() != static_cast<std::size_t>(m)) throw ShapeError("preference length differs from objective count");
    if (!on_simplex(lambda)) throw ConfigError("preference is not on the simplex");
    DistMatrix w(n * n, 0.0);
    for (int i = 0; i < m; ++i) {
        if (lambda[i] == 0.0) continue;
        const DistMatrix d = block_distances(inst.features, n, i);
        for (std::size_t k = 0; k < w.size(); ++k) w[k] += lambda[i] * d[k];
    }
    return w;
}

double cycle_cost(const DistMatrix& d, std::size_t n, const std::vector<int>& t) {
    double c = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) c += d[t[i] * n + t[(i + 1) % t.size()]];
    return c;
}

std::vector<int> nn_tour(const DistMatrix& d, std::size_t n, int start) {
    std::vector<int> tour{start};
    std::vector<char> used(n, 0);
    used[start] = 1;
    while (tour.size() < n) {
        const int cur = tour.back();
        int best = -1;
        for (std::size_t v = 0; v < n; ++v)
            if (!used[v] && (best < 0 || d[cur * n + v] < d[cur * n + best])) best = static_cast<int>(v);
        used[best] = 1;
        tour.push_back(best);
    }
    return tour;
}

void two_opt(std::vector<int>& t, const DistMatrix& d, std::size_t n) {
    const std::size_t len = t.size();
    if (len < 4) return;
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i + 2 < len && !improved; ++i) {
            for (std::size_t j = i + 2; j < len && !improved; ++j) {
                if (i == 0 && j == len - 1) continue;
                const int a = t[i], b = t[i + 1], c = t[j], e = t[(j + 1) % len];
                const double delta = d[a * n + c] + d[b * n + e] - d[a * n + b] - d[c * n + e];
                if (delta < -1e-12) {
                    std::reverse(t.begin() + static_cast<long>(i) + 1, t.begin() + static_cast<long>(j) + 1);
                    improved = true;
                }
            }
        }
    }
}

std::vector<int> start_tour(const DistMatrix& d, std::size_t n, int restart, std::uint64_t seed) {
    if (static_cast<std::size_t>(restart) < n) return nn_tour(d, n, restart);
    std::vector<int> t(n);
    std::iota(t.begin(), t.end(), 0);
    Rng rng(seed, "ls-restart", static_cast<std::uint64_t>(restart));
    std::shuffle(t.begin(), t.end(), rng.engine());
    return t;
}

}  // namespace

std::uint64_t tour_count(std::size_t n) {
    if (n < 3) return 1;
    std::uint64_t c = 1;
    for (std::size_t k = 3; k < n; ++k) c *= k;
    return c;
}

std::vector<ObjectiveVector> brute_pareto_tsp(const Instance& inst) {
    if (!is_tsp(inst.kind)) throw ConfigError("brute-force enumeration supports TSP only");
    const std::size_t n = inst.size();
    if (n > kBruteForceMaxNodes)
        throw ConfigError("brute-force enumeration supports n <= " + std::to_string(kBruteForceMaxNodes));
    const int m = objective_count(inst.kind);
    std::vector<DistMatrix> d;
    for (int i = 0; i < m; ++i) d.push_back(block_distances(inst.features, n, i));

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<ObjectiveVector> points;
    points.reserve(tour_count(n));
    if (n < 3) {
        points.push_back(evaluate_objectives(inst, Tour{perm}));
        return nondominated_filter(std::move(points));
    }
    // Node 0 fixed first; each undirected tour appears once with perm[1] < perm[n-1].
    do {
        if (perm[1] > perm[n - 1]) continue;
        ObjectiveVector f(m, 0.0);
        for (int i = 0; i < m; ++i) f[i] = cycle_cost(d[i], n, perm);
        points.push_back(std::move(f));
    } while (std::next_permutation(perm.begin() + 1, perm.end()));
    return nondominated_filter(std::move(points));
}

ItemSet ws_dp_knapsack(const Instance& inst, std::span<const double> lambda) {
    if (inst.kind != ProblemKind::BiKP) throw ConfigError("knapsack DP requires a BiKP instance");
    if (lambda.size() != 2 || !on_simplex(lambda)) throw ConfigError("preference is not on the 2-simplex");
    const std::size_t n = inst.size();
    const long cap = static_cast<long>(std::floor(inst.capacity * kKnapsackWeightScale + 1e-9));
    std::vector<long> w(n);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::max(0L, static_cast<long>(std::ceil(inst.features(i, 0) * kKnapsackWeightScale - 1e-9)));
        v[i] = lambda[0] * inst.features(i, 1) + lambda[1] * inst.features(i, 2);
    }
    const std::size_t width = static_cast<std::size_t>(cap) + 1;
    // best[i][c]: best value using items [0, i) within capacity c.
    std::vector<double> best((n + 1) * width, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* prev = best.data() + i * width;
        double* cur = best.data() + (i + 1) * width;
        for (std::size_t c = 0; c < width; ++c) {
            cur[c] = prev[c];
            if (w[i] <= static_cast<long>(c)) cur[c] = std::max(cur[c], prev[c - w[i]] + v[i]);
        }
    }
    ItemSet s;
    std::size_t c = width - 1;
    for (std::size_t i = n; i-- > 0;) {
        if (best[(i + 1) * width + c] != best[i * width + c]) {
            s.items.push_back(static_cast<int>(i));
            c -= static_cast<std::size_t>(w[i]);
        }
    }
    std::reverse(s.items.begin(), s.items.end());
    return s;
}

Tour nearest_neighbour_tsp(const Instance& inst, std::span<const double> lambda, int start) {
    if (!is_tsp(inst.kind)) throw ConfigError("nearest neighbour requires a TSP instance");
    const std::size_t n = inst.size();
    if (start < 0 || static_cast<std::size_t>(start) >= n) throw ConfigError("start node out of range");
    return Tour{nn_tour(weighted_distances(inst, lambda), n, start)};
}

Tour ws_local_search_tsp(const Instance& inst, std::span<const double> lambda, int restarts, std::uint64_t seed) {
    if (!is_tsp(inst.kind)) throw ConfigError("2-opt search requires a TSP instance");
    if (restarts < 1) throw ConfigError("restarts must be >= 1");
    const std::size_t n = inst.size();
    const DistMatrix d = weighted_distances(inst, lambda);
    std::vector<int> best;
    double best_cost = 0.0;
    for (int r = 0; r < restarts; ++r) {
        std::vector<int> t = start_tour(d, n, r, seed);
        two_opt(t, d, n);
        const double c = cycle_cost(d, n, t);
        if (best.empty() || c < best_cost) {
            best = std::move(t);
            best_cost = c;
        }
    }
    return Tour{best};
}

Routes ws_split_cvrp(const Instance& inst, std::span<const double> lambda, int restarts, std::uint64_t seed) {
    if (inst.kind != ProblemKind::BiCVRP) throw ConfigError("split heuristic requires a BiCVRP instance");
    if (lambda.size() != 2 || !on_simplex(lambda)) throw ConfigError("preference is not on the 2-simplex");
    if (restarts < 1) throw ConfigError("restarts must be >= 1");
    const std::size_t nodes = inst.features.rows;
    const DistMatrix d = block_distances(inst.features, nodes, 0);

    Routes best;
    double best_cost = 0.0;
    bool have = false;
    for (int r = 0; r < restarts; ++r) {
        std::vector<int> giant = start_tour(d, nodes, r, seed);
        two_opt(giant, d, nodes);
        std::rotate(giant.begin(), std::find(giant.begin(), giant.end(), 0), giant.end());
        std::vector<int> order(giant.begin() + 1, giant.end());
        for (int dir = 0; dir < 2; ++dir) {
            if (dir == 1) std::reverse(order.begin(), order.end());
            for (int k = 2; k <= 10; ++k) {
                const double limit = inst.capacity * k / 10.0;
                Routes sol;
                std::vector<int> cur;
                double load = 0.0;
                for (int c : order) {
                    const double dem = inst.demands[c - 1];
                    if (!cur.empty() && (load + dem > limit + 1e-12 || load + dem > inst.capacity + 1e-12)) {
                        sol.routes.push_back(std::move(cur));
                        cur.clear();
                        load = 0.0;
                    }
                    cur.push_back(c);
                    load += dem;
                }
                if (!cur.empty()) sol.routes.push_back(std::move(cur));
                const double cost = weighted_sum(evaluate_objectives(inst, sol), lambda);
                if (!have || cost < best_cost) {
                    best = std::move(sol);
                    best_cost = cost;
                    have = true;
                }
            }
        }
    }
    return best;
}

bool oracle_is_exact(const Instance& inst, const OracleOptions& opts) {
    return is_tsp(inst.kind) && inst.size() <= std::min(opts.brute_force_max, kBruteForceMaxNodes);
}

std::vector<ObjectiveVector> oracle_front(const Instance& inst, const PreferenceGrid& grid, const OracleOptions& opts) {
    if (oracle_is_exact(inst, opts)) return brute_pareto_tsp(inst);
    std::vector<ObjectiveVector> points;
    for (const auto& pref : grid.prefs) {
        const auto w = pref.weights();
        Solution sol;
        if (is_tsp(inst.kind))
            sol = ws_local_search_tsp(inst, w, opts.restarts, opts.seed);
        else if (inst.kind == ProblemKind::BiKP)
            sol = ws_dp_knapsack(inst, w);
        else
            sol = ws_split_cvrp(inst, w, std::max(1, opts.restarts / 2), opts.seed);
        points.push_back(evaluate_objectives(inst, sol));
    }
    return nondominated_filter(std::move(points));
}

McEstimate mc_hypervolume(std::span<const ObjectiveVector> front, std::span<const double> reference,
                          std::size_t samples, std::uint64_t seed) {
    if (samples < 10000) throw ConfigError("Monte Carlo hypervolume needs at least 10^4 samples");
    if (front.empty()) return {};
    const std::size_t m = reference.size();
    std::vector<double> lo(reference.begin(), reference.end());
    for (const auto& p : front) {
        if (p.size() != m) throw ShapeError("front point length differs from reference");
        for (std::size_t i = 0; i < m; ++i) lo[i] = std::min(lo[i], p[i]);
    }
    double volume = 1.0;
    for (std::size_t i = 0; i < m; ++i) volume *= reference[i] - lo[i];
    if (!(volume > 0.0) || !std::isfinite(volume)) throw ConfigError("degenerate Monte Carlo sampling box");

    Rng rng(seed, "mc-hv");
    std::vector<double> x(m);
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t i = 0; i < m; ++i) x[i] = rng.uniform(lo[i], reference[i]);
        for (const auto& p : front) {
            bool covered = true;
            for (std::size_t i = 0; i < m && covered; ++i) covered = p[i] <= x[i];
            if (covered) {
                ++hits;
                break;
            }
        }
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(samples);
    return {volume * frac, volume * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples))};
}

}  // namespace mocoguard
