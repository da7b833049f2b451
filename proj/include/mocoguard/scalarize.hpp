#pragma once

#include <optional>
#include <span>
#include <string>

#include "mocoguard/core.hpp"

namespace mocoguard {

enum class Scalarization { WeightedSum, Tchebycheff };

std::string to_string(Scalarization s);
Scalarization scalarization_from_string(const std::string& name);

/// sum_i w_i f_i. Throws ConfigError if `weights` is off the simplex.
double weighted_sum(std::span<const double> f, std::span<const double> weights);

/// max_i w_i |f_i - z_i|. Zero weights contribute zero.
double tchebycheff(std::span<const double> f, std::span<const double> weights, std::span<const double> ideal);

/// Componentwise minimum of the ideal estimate and an observed objective vector.
ObjectiveVector update_ideal(std::span<const double> ideal, std::span<const double> f);

/// Running componentwise minimum over observed objective vectors. Starts
/// empty; the first observation initializes it.
class IdealPoint {
  public:
    void reset() { z_.reset(); }
    void observe(std::span<const double> f);
    /// Merge-by-min with another tracker (parallel reduction).
    void merge(const IdealPoint& other);
    bool empty() const { return !z_.has_value(); }
    const ObjectiveVector& value() const;

  private:
    std::optional<ObjectiveVector> z_;
};

/// Dispatches on the scalarization tag. `ideal` is ignored for WS.
double scalarize(Scalarization s, std::span<const double> f, std::span<const double> weights,
                 std::span<const double> ideal);

}  // namespace mocoguard
