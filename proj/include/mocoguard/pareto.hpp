#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "mocoguard/core.hpp"

namespace mocoguard {

/// Pareto dominance for minimization: u <= v everywhere and u < v somewhere.
/// Throws ShapeError on a length mismatch.
bool dominates(std::span<const double> u, std::span<const double> v);

/// Maximal mutually nondominated subset, duplicates collapsed. The result is
/// sorted lexicographically.
std::vector<ObjectiveVector> nondominated_filter(std::vector<ObjectiveVector> points);

/// Exact hypervolume of the union of boxes [p, r] for m = 2 or 3.
///
/// Points that exceed r in some coordinate are dropped; their count is
/// written to `dropped` when non-null. A point touching r contributes zero.
/// Throws ConfigError for any other dimension.
double hypervolume(std::span<const ObjectiveVector> points, std::span<const double> reference,
                   std::size_t* dropped = nullptr);

/// Signed relative HV shortfall of `hv_model` against `hv_ref`, in percent.
/// Negative when the model exceeds the reference. Requires hv_ref > 0.
double hv_gap(double hv_ref, double hv_model);

/// Reference point for an experiment: the componentwise nadir of every
/// compared front pushed outward by 10% of its magnitude.
ObjectiveVector reference_point(std::span<const std::vector<ObjectiveVector>> fronts);

struct Front {
    std::vector<ObjectiveVector> points;
    ObjectiveVector reference;
};

/// CSV with a header `tag,f1,..,fm`, one `ref` row holding r, then one
/// `point` row per objective vector.
void write_front_csv(const std::filesystem::path& path, const Front& front);
Front read_front_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace mocoguard
