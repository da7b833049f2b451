#include "mocoguard/eval.hpp"

#include <numeric>

#include "mocoguard/errors.hpp"
#include "mocoguard/parallel.hpp"
#include "mocoguard/pareto.hpp"

namespace mocoguard {

std::vector<ObjectiveVector> greedy_solutions(const Policy& policy, const Instance& inst, const PreferenceGrid& grid,
                                              int starts) {
    const int M = starts > 0 ? starts : static_cast<int>(inst.size());
    tape::Tape t;
    const BoundPolicy net = bind(t, policy);
    const NodeEncoding nodes = encode_nodes(net, inst, t.constant(inst.features));
    const std::size_t mark = t.size();
    std::vector<ObjectiveVector> out;
    out.reserve(grid.prefs.size());
    for (const auto& pref : grid.prefs) {
        const Encoded enc = condition(net, nodes, pref);
        RolloutBatch batch = rollout(net, enc, M, DecodeMode::Greedy, 0);
        score(batch, Scalarization::WeightedSum, pref);
        out.push_back(batch.objectives[best_rollout(batch)]);
        t.truncate(mark);
    }
    return out;
}

std::vector<ObjectiveVector> model_front(const Policy& policy, const Instance& inst, const PreferenceGrid& grid,
                                         int starts) {
    return nondominated_filter(greedy_solutions(policy, inst, grid, starts));
}

std::vector<std::vector<ObjectiveVector>> model_fronts(const Policy& policy, std::span<const Instance> instances,
                                                       const PreferenceGrid& grid, int starts) {
    std::vector<std::vector<ObjectiveVector>> out(instances.size());
    parallel_for(instances.size(), [&](std::size_t i) { out[i] = model_front(policy, instances[i], grid, starts); });
    return out;
}

std::vector<std::vector<ObjectiveVector>> oracle_fronts(std::span<const Instance> instances, const PreferenceGrid& grid,
                                                        const OracleOptions& opts) {
    std::vector<std::vector<ObjectiveVector>> out(instances.size());
    parallel_for(instances.size(), [&](std::size_t i) { out[i] = oracle_front(instances[i], grid, opts); });
    return out;
}

std::vector<double> hypervolumes(std::span<const std::vector<ObjectiveVector>> fronts, std::span<const double> r) {
    std::vector<double> hv;
    hv.reserve(fronts.size());
    for (const auto& f : fronts) hv.push_back(hypervolume(f, r));
    return hv;
}

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

Comparison compare_fronts(std::span<const std::vector<ObjectiveVector>> model,
                          std::span<const std::vector<ObjectiveVector>> oracle, std::span<const double> reference) {
    if (model.size() != oracle.size()) throw ShapeError("model and oracle front counts differ");
    Comparison c;
    if (reference.empty()) {
        std::vector<std::vector<ObjectiveVector>> all(model.begin(), model.end());
        all.insert(all.end(), oracle.begin(), oracle.end());
        c.reference = reference_point(all);
    } else {
        c.reference.assign(reference.begin(), reference.end());
    }
    c.hv_model = hypervolumes(model, c.reference);
    c.hv_oracle = hypervolumes(oracle, c.reference);
    c.mean_hv_model = mean(c.hv_model);
    c.mean_hv_oracle = mean(c.hv_oracle);
    c.gap = hv_gap(c.mean_hv_oracle, c.mean_hv_model);
    return c;
}

}  // namespace mocoguard
