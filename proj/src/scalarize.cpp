#include "mocoguard/scalarize.hpp"

#include <algorithm>
#include <cmath>

#include "mocoguard/errors.hpp"

namespace mocoguard {

std::string to_string(Scalarization s) { return s == Scalarization::WeightedSum ? "ws" : "tch"; }

Scalarization scalarization_from_string(const std::string& name) {
    if (name == "ws") return Scalarization::WeightedSum;
    if (name == "tch") return Scalarization::Tchebycheff;
    throw ConfigError("unknown scalarization '" + name + "' (expected ws or tch)");
}

namespace {

void require_simplex(std::span<const double> f, std::span<const double> w) {
    if (f.size() != w.size()) throw ShapeError("objective/preference length mismatch");
    if (!on_simplex(w)) throw ConfigError("preference is not on the simplex");
}

}  // namespace

double weighted_sum(std::span<const double> f, std::span<const double> weights) {
    require_simplex(f, weights);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += weights[i] * f[i];
    return s;
}

double tchebycheff(std::span<const double> f, std::span<const double> weights, std::span<const double> ideal) {
    require_simplex(f, weights);
    if (ideal.size() != f.size()) throw ShapeError("ideal point length mismatch");
    double best = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) best = std::max(best, weights[i] * std::abs(f[i] - ideal[i]));
    return best;
}

ObjectiveVector update_ideal(std::span<const double> ideal, std::span<const double> f) {
    if (ideal.size() != f.size()) throw ShapeError("ideal point length mismatch");
    ObjectiveVector z(ideal.begin(), ideal.end());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::min(z[i], f[i]);
    return z;
}

void IdealPoint::observe(std::span<const double> f) {
    if (!z_)
        z_ = ObjectiveVector(f.begin(), f.end());
    else
        z_ = update_ideal(*z_, f);
}

void IdealPoint::merge(const IdealPoint& other) {
    if (other.z_) observe(*other.z_);
}

const ObjectiveVector& IdealPoint::value() const {
    if (!z_) throw ConfigError("ideal point has no observations");
    return *z_;
}

double scalarize(Scalarization s, std::span<const double> f, std::span<const double> weights,
                 std::span<const double> ideal) {
    return s == Scalarization::WeightedSum ? weighted_sum(f, weights) : tchebycheff(f, weights, ideal);
}

}  // namespace mocoguard
