#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mocoguard/core.hpp"
#include "mocoguard/rng.hpp"

namespace testutil {

using mocoguard::Instance;
using mocoguard::Matrix;
using mocoguard::ObjectiveVector;
using mocoguard::ProblemKind;

inline Instance tsp_instance(std::vector<std::vector<double>> rows, ProblemKind kind = ProblemKind::BiTSP) {
    Instance inst;
    inst.kind = kind;
    inst.id = "t";
    inst.features = Matrix::from_rows(rows);
    return inst;
}

/// Pairwise dominance oracle.
inline bool dominates_naive(const ObjectiveVector& u, const ObjectiveVector& v) {
    bool strict = false;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] > v[i]) return false;
        if (u[i] < v[i]) strict = true;
    }
    return strict;
}

inline std::vector<ObjectiveVector> filter_naive(const std::vector<ObjectiveVector>& pts) {
    std::vector<ObjectiveVector> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j) dominated = dominates_naive(pts[j], pts[i]);
        if (!dominated && std::find(out.begin(), out.end(), pts[i]) == out.end()) out.push_back(pts[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Hypervolume by inclusion-exclusion over the union of boxes [p, r]
/// (the rectangle-union oracle); exponential, for small fronts only.
inline double hv_inclusion_exclusion(const std::vector<ObjectiveVector>& pts, const ObjectiveVector& r) {
    std::vector<ObjectiveVector> p;
    for (const auto& x : pts) {
        bool inside = true;
        for (std::size_t i = 0; i < r.size(); ++i) inside &= x[i] <= r[i];
        if (inside) p.push_back(x);
    }
    const std::size_t k = p.size();
    double total = 0.0;
    for (std::size_t mask = 1; mask < (std::size_t{1} << k); ++mask) {
        ObjectiveVector corner(r.size(), -1e300);
        int bits = 0;
        for (std::size_t i = 0; i < k; ++i)
            if (mask >> i & 1) {
                ++bits;
                for (std::size_t d = 0; d < r.size(); ++d) corner[d] = std::max(corner[d], p[i][d]);
            }
        double vol = 1.0;
        for (std::size_t d = 0; d < r.size(); ++d) vol *= std::max(0.0, r[d] - corner[d]);
        total += (bits % 2 ? 1.0 : -1.0) * vol;
    }
    return total;
}

/// Hypervolume on the grid induced by the point coordinates: sums the cells
/// covered by at least one box. Exact and independent of the sweep.
inline double hv_grid(const std::vector<ObjectiveVector>& pts, const ObjectiveVector& r) {
    const std::size_t m = r.size();
    std::vector<std::vector<double>> axes(m);
    for (std::size_t d = 0; d < m; ++d) {
        for (const auto& x : pts)
            if (x[d] < r[d]) axes[d].push_back(x[d]);
        axes[d].push_back(r[d]);
        std::sort(axes[d].begin(), axes[d].end());
        axes[d].erase(std::unique(axes[d].begin(), axes[d].end()), axes[d].end());
    }
    std::vector<std::size_t> idx(m, 0);
    double total = 0.0;
    while (true) {
        bool valid = true;
        for (std::size_t d = 0; d < m; ++d) valid &= idx[d] + 1 < axes[d].size();
        if (valid) {
            bool covered = false;
            for (const auto& x : pts) {
                bool c = true;
                for (std::size_t d = 0; d < m && c; ++d) c = x[d] <= axes[d][idx[d]];
                if (c) {
                    covered = true;
                    break;
                }
            }
            if (covered) {
                double vol = 1.0;
                for (std::size_t d = 0; d < m; ++d) vol *= axes[d][idx[d] + 1] - axes[d][idx[d]];
                total += vol;
            }
        }
        std::size_t d = 0;
        while (d < m && ++idx[d] >= axes[d].size()) idx[d++] = 0;
        if (d == m) break;
    }
    return total;
}

/// All (n-1)!/2 tours of a TSP instance, node 0 first.
inline std::vector<std::vector<int>> all_tours(std::size_t n) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<int>> out;
    do {
        if (n < 3 || p[1] < p[n - 1]) out.push_back(p);
    } while (std::next_permutation(p.begin() + 1, p.end()));
    return out;
}

}  // namespace testutil
