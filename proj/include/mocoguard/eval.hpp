#pragma once

/// Greedy model fronts and HV comparison against oracle fronts.

#include <span>
#include <vector>

#include "mocoguard/core.hpp"
#include "mocoguard/oracles.hpp"
#include "mocoguard/policy.hpp"

namespace mocoguard {

/// Greedy multi-start decode under every grid preference; per preference the
/// start with the lowest weighted sum is kept. `starts` <= 0 means one start
/// per node / customer / item. Result i belongs to grid.prefs[i].
std::vector<ObjectiveVector> greedy_solutions(const Policy& policy, const Instance& inst, const PreferenceGrid& grid,
                                              int starts = 0);

/// Nondominated union of greedy_solutions.
std::vector<ObjectiveVector> model_front(const Policy& policy, const Instance& inst, const PreferenceGrid& grid,
                                         int starts = 0);

/// model_front over a set, parallel across instances.
std::vector<std::vector<ObjectiveVector>> model_fronts(const Policy& policy, std::span<const Instance> instances,
                                                       const PreferenceGrid& grid, int starts = 0);

/// oracle_front over a set, parallel across instances.
std::vector<std::vector<ObjectiveVector>> oracle_fronts(std::span<const Instance> instances, const PreferenceGrid& grid,
                                                        const OracleOptions& opts = {});

/// Per-front hypervolumes against one shared reference point.
std::vector<double> hypervolumes(std::span<const std::vector<ObjectiveVector>> fronts, std::span<const double> r);

double mean(std::span<const double> values);

struct Comparison {
    ObjectiveVector reference;
    std::vector<double> hv_model;
    std::vector<double> hv_oracle;
    double mean_hv_model = 0.0;
    double mean_hv_oracle = 0.0;
    /// hv_gap(mean oracle HV, mean model HV), percent.
    double gap = 0.0;
};

/// HV of model and oracle fronts under one reference point. An empty
/// `reference` derives it from the union of both front sets.
Comparison compare_fronts(std::span<const std::vector<ObjectiveVector>> model,
                          std::span<const std::vector<ObjectiveVector>> oracle, std::span<const double> reference = {});

}  // namespace mocoguard
