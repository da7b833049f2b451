#pragma once

/// Ground-truth and strong-baseline solvers for desk-scale verification.

#include <cstdint>
#include <span>
#include <vector>

#include "mocoguard/core.hpp"

namespace mocoguard {

/// Largest TSP size accepted by brute_pareto_tsp.
inline constexpr std::size_t kBruteForceMaxNodes = 10;

/// Exact Pareto front of a (Bi/Tri-)TSP instance by enumerating the
/// (n-1)!/2 distinct tours. Throws ConfigError above kBruteForceMaxNodes.
std::vector<ObjectiveVector> brute_pareto_tsp(const Instance& inst);

/// Number of distinct undirected tours on n nodes, (n-1)!/2 (1 for n < 3).
std::uint64_t tour_count(std::size_t n);

/// Weight grid used by the knapsack DP.
inline constexpr int kKnapsackWeightScale = 1000;

/// Exact maximizer of the lambda-weighted value under capacity, with
/// weights rounded up and the capacity rounded down to multiples of
/// 1/kKnapsackWeightScale (every DP solution is feasible for the real
/// weights). Ties resolve toward the lexicographically smallest item set.
ItemSet ws_dp_knapsack(const Instance& inst, std::span<const double> lambda);

/// Nearest-neighbour construction followed by first-improvement 2-opt on
/// the lambda-weighted distances; best of `restarts` starts (start node 0
/// first, then random starts).
Tour ws_local_search_tsp(const Instance& inst, std::span<const double> lambda, int restarts = 10,
                         std::uint64_t seed = 0);

/// Nearest-neighbour tour before any 2-opt move (start node 0).
Tour nearest_neighbour_tsp(const Instance& inst, std::span<const double> lambda, int start = 0);

/// Giant tour (2-opt over depot and customers) split greedily into routes
/// under several load limits; the best split under the weighted sum of
/// (total length, longest route) is returned. Not exact.
Routes ws_split_cvrp(const Instance& inst, std::span<const double> lambda, int restarts = 4, std::uint64_t seed = 0);

struct OracleOptions {
    int restarts = 10;
    std::uint64_t seed = 0;
    /// TSP instances up to this size use exhaustive enumeration.
    std::size_t brute_force_max = kBruteForceMaxNodes;
};

/// Reference front for any problem kind: exhaustive for small TSP, else the
/// nondominated union of the per-preference oracle solutions.
std::vector<ObjectiveVector> oracle_front(const Instance& inst, const PreferenceGrid& grid,
                                          const OracleOptions& opts = {});

/// True when oracle_front is exact for the instance.
bool oracle_is_exact(const Instance& inst, const OracleOptions& opts = {});

struct McEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

/// Monte Carlo hypervolume: uniform samples in the box spanned by the
/// componentwise minimum of the front and r. Requires samples >= 10^4;
/// throws ConfigError for a degenerate box.
McEstimate mc_hypervolume(std::span<const ObjectiveVector> front, std::span<const double> reference,
                          std::size_t samples, std::uint64_t seed);

}  // namespace mocoguard
