#pragma once

/// Clean and distribution-shifted instance generators plus the min-max
/// feasibility projection. Every generator is a pure function of its
/// arguments; instance i draws from its own substream (seed, tag, i), so
/// generating a prefix of a set reproduces the prefix of a larger set.

#include <cstdint>
#include <string>
#include <vector>

#include "mocoguard/core.hpp"
#include "mocoguard/rng.hpp"

namespace mocoguard {

struct GenOptions {
    /// Knapsack capacity; <= 0 selects the default n/8.
    double kp_capacity = 0.0;
    /// CVRP capacity; <= 0 selects the default by size (3 / 4 / 5 for
    /// n <= 20 / 50 / larger, with demands k/10, k in 1..9).
    double cvrp_capacity = 0.0;
};

std::vector<Instance> gen_uniform(ProblemKind kind, std::size_t n, std::size_t count, std::uint64_t seed,
                                  const GenOptions& opts = {});

std::vector<Instance> gen_gmm(ProblemKind kind, std::size_t n, std::size_t count, double c_dist,
                              std::size_t k_clusters, std::uint64_t seed, const GenOptions& opts = {});

enum class HeavyTail { LogNormal, Beta, Gamma };

std::string to_string(HeavyTail d);
HeavyTail heavy_tail_from_string(const std::string& name);

/// Draw one sample: lognormal(0,1), beta(2,5) or gamma(shape 2, scale 0.5).
double sample_heavy_tail(HeavyTail d, Rng& rng);

std::vector<Instance> gen_heavytail(ProblemKind kind, std::size_t n, std::size_t count, HeavyTail dist,
                                    std::uint64_t seed, const GenOptions& opts = {});

/// Affinely maps every column to [0,1]; constant columns map to 0.5.
Matrix minmax_project(const Matrix& features);

/// Min-max projection restricted to the rows [row_begin, rows) of each column.
void minmax_project_rows(Matrix& features, std::size_t row_begin);

/// Projects the perturbable features of an instance: TSP coordinates,
/// CVRP customer coordinates (depot frozen), KP weights and values.
/// Demands and capacities are never touched.
void project_instance(Instance& inst);

/// Default capacities used by the generators.
double default_kp_capacity(std::size_t n);
double default_cvrp_capacity(std::size_t n);

}  // namespace mocoguard
