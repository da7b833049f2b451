#pragma once

/// Problem definitions for the four supported multi-objective problems:
/// bi-objective TSP, tri-objective TSP, bi-objective CVRP and bi-objective
/// knapsack. Every objective is minimized; knapsack values are negated on
/// evaluation.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mocoguard/matrix.hpp"

namespace mocoguard {

enum class ProblemKind { BiTSP, TriTSP, BiCVRP, BiKP };

int objective_count(ProblemKind kind);
bool is_tsp(ProblemKind kind);
std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

enum class Provenance { Clean, Gmm, HeavyTail, Paa, Imported };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& name);

/// One problem datum.
///
/// Feature layout by kind:
///  - TSP: n rows x 2m columns; objective i uses columns (2i, 2i+1).
///  - CVRP: n+1 rows x 2 columns; row 0 is the depot. `demands` holds the
///    n customer demands, `capacity` the vehicle capacity.
///  - KP: n rows x 3 columns (weight, value 1, value 2); `capacity` is C.
struct Instance {
    ProblemKind kind = ProblemKind::BiTSP;
    std::string id;
    Provenance provenance = Provenance::Clean;
    Matrix features;
    std::vector<double> demands;
    double capacity = 0.0;

    /// Node / item count n (customers for CVRP).
    std::size_t size() const;

    bool operator==(const Instance&) const = default;
};

/// Throws SchemaError when the instance violates a structural invariant
/// (shape, finiteness, demand bounds, non-trivial knapsack capacity).
void validate_instance(const Instance& inst);

struct Tour {
    std::vector<int> order;
    bool operator==(const Tour&) const = default;
};
/// Customer indices 1..n, each route implicitly starts and ends at the depot.
struct Routes {
    std::vector<std::vector<int>> routes;
    bool operator==(const Routes&) const = default;
};
struct ItemSet {
    std::vector<int> items;
    bool operator==(const ItemSet&) const = default;
};
using Solution = std::variant<Tour, Routes, ItemSet>;

using ObjectiveVector = std::vector<double>;

enum class Violation { None, WrongSolutionType, OutOfRange, Duplicate, Missing, EmptyRoute, Capacity };

std::string to_string(Violation v);

struct FeasibilityReport {
    Violation violation = Violation::None;
    std::string detail;
    bool ok() const { return violation == Violation::None; }
};

FeasibilityReport check_feasible(const Instance& inst, const Solution& sol);

/// Objective vector F(solution). Throws FeasibilityError on an infeasible
/// solution, naming the violated constraint.
ObjectiveVector evaluate_objectives(const Instance& inst, const Solution& sol);

/// Cyclic Euclidean tour length in coordinate block `block` of a TSP instance.
double tour_length(const Matrix& features, std::span<const int> order, std::size_t block);

/// A weight vector on the probability simplex.
class Preference {
  public:
    static constexpr double kTolerance = 1e-9;

    /// Throws ConfigError unless every weight is >= 0 and they sum to 1.
    explicit Preference(std::vector<double> weights);

    std::size_t size() const { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    std::span<const double> weights() const { return weights_; }

    bool operator==(const Preference&) const = default;

  private:
    std::vector<double> weights_;
};

bool on_simplex(std::span<const double> w, double tol = Preference::kTolerance);

struct PreferenceGrid {
    int objectives = 2;
    int resolution = 1;
    std::vector<Preference> prefs;

    std::size_t size() const { return prefs.size(); }
    const Preference& operator[](std::size_t i) const { return prefs[i]; }
};

/// Uniform simplex lattice with step 1/resolution: resolution+1 points for
/// m = 2, (H+1)(H+2)/2 points for m = 3.
PreferenceGrid preference_grid(int objectives, int resolution);

}  // namespace mocoguard
