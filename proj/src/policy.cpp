#include "mocoguard/policy.hpp"

#include <algorithm>
#include <cmath>

#include "mocoguard/errors.hpp"
#include "mocoguard/rng.hpp"

namespace mocoguard {

using tape::Var;

nlohmann::json PolicyConfig::to_json() const {
    return {{"kind", to_string(kind)}, {"hidden", hidden},         {"heads", heads},
            {"layers", layers},        {"ff_hidden", ff_hidden},   {"logit_clip", logit_clip}};
}

PolicyConfig PolicyConfig::from_json(const nlohmann::json& j) {
    PolicyConfig c;
    try {
        c.kind = problem_kind_from_string(j.at("kind").get<std::string>());
        c.hidden = j.at("hidden").get<int>();
        c.heads = j.at("heads").get<int>();
        c.layers = j.at("layers").get<int>();
        c.ff_hidden = j.at("ff_hidden").get<int>();
        c.logit_clip = j.at("logit_clip").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("bad policy manifest: ") + e.what());
    }
    c.validate();
    return c;
}

void PolicyConfig::validate() const {
    if (hidden < 1 || heads < 1 || layers < 0 || ff_hidden < 1) throw ConfigError("policy sizes must be positive");
    if (hidden % heads != 0) throw ConfigError("hidden width must be divisible by the head count");
    if (!(logit_clip > 0.0)) throw ConfigError("logit clip must be positive");
}

namespace {

struct Slot {
    std::string name;
    std::size_t rows, cols;
    bool bias;
};

std::size_t input_dim(ProblemKind kind) {
    if (is_tsp(kind)) return 2 * static_cast<std::size_t>(objective_count(kind));
    return kind == ProblemKind::BiCVRP ? 4 : 3;
}

std::vector<Slot> layout(const PolicyConfig& c) {
    c.validate();
    const std::size_t d = c.hidden, dk = c.hidden / c.heads, ff = c.ff_hidden;
    const std::size_t m = objective_count(c.kind);
    std::vector<Slot> s;
    s.push_back({"embed.w", input_dim(c.kind), d, false});
    s.push_back({"embed.b", 1, d, true});
    for (int l = 0; l < c.layers; ++l) {
        const std::string p = "enc" + std::to_string(l) + ".";
        for (int h = 0; h < c.heads; ++h) {
            const std::string ph = p + "h" + std::to_string(h) + ".";
            s.push_back({ph + "wq", d, dk, false});
            s.push_back({ph + "wk", d, dk, false});
            s.push_back({ph + "wv", d, dk, false});
            s.push_back({ph + "wo", dk, d, false});
        }
        s.push_back({p + "bo", 1, d, true});
        s.push_back({p + "ff1.w", d, ff, false});
        s.push_back({p + "ff1.b", 1, ff, true});
        s.push_back({p + "ff2.w", ff, d, false});
        s.push_back({p + "ff2.b", 1, d, true});
    }
    s.push_back({"pref.w", m, d, false});
    s.push_back({"pref.b", 1, d, true});
    s.push_back({"ctx.w", 2 * d, d, false});
    s.push_back({"dec.first", d, d, false});
    s.push_back({"dec.cap", 1, d, false});
    for (std::size_t i = 0; i < m; ++i) s.push_back({"dec.last" + std::to_string(i), d, d, false});
    for (std::size_t i = 0; i < m; ++i) s.push_back({"dec.key" + std::to_string(i), d, d, false});
    s.push_back({"dec.glimpse_k", d, d, false});
    s.push_back({"dec.glimpse_v", d, d, false});
    s.push_back({"dec.glimpse_out", d, d, false});
    return s;
}

}  // namespace

Policy::Policy(PolicyConfig cfg, tape::ParamSet params) : cfg_(cfg), params_(std::move(params)) {
    const auto slots = layout(cfg_);
    if (slots.size() != params_.names.size()) throw SchemaError("parameter set does not match policy layout");
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].name != params_.names[i] || slots[i].rows != params_.values[i].rows ||
            slots[i].cols != params_.values[i].cols)
            throw SchemaError("parameter " + params_.names[i] + " does not match policy layout");
    }
}

Policy Policy::init(const PolicyConfig& cfg, std::uint64_t seed) {
    tape::ParamSet params;
    Rng rng(seed, "policy-init");
    for (const auto& slot : layout(cfg)) {
        Matrix w(slot.rows, slot.cols, 0.0);
        if (!slot.bias) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(slot.rows));
            for (auto& v : w.data) v = rng.uniform(-bound, bound);
        }
        params.add(slot.name, std::move(w));
    }
    return Policy(cfg, std::move(params));
}

void Policy::save(const std::filesystem::path& path, const nlohmann::json& extra_meta) const {
    nlohmann::json meta = extra_meta.is_object() ? extra_meta : nlohmann::json::object();
    meta["policy"] = cfg_.to_json();
    tape::save_checkpoint(path, params_, meta);
}

Policy Policy::load(const std::filesystem::path& path) {
    auto ck = tape::load_checkpoint(path);
    if (!ck.meta.contains("policy")) throw SchemaError("checkpoint lacks a policy manifest");
    return Policy(PolicyConfig::from_json(ck.meta.at("policy")), std::move(ck.params));
}

BoundPolicy bind(tape::Tape& t, const Policy& policy) {
    BoundPolicy b;
    b.cfg = &policy.config();
    b.all = tape::register_params(t, policy.params());
    std::size_t k = 0;
    auto next = [&] { return b.all[k++]; };
    const auto& c = policy.config();
    b.w_in = next();
    b.b_in = next();
    for (int l = 0; l < c.layers; ++l) {
        BoundPolicy::Layer layer;
        for (int h = 0; h < c.heads; ++h) {
            layer.wq.push_back(next());
            layer.wk.push_back(next());
            layer.wv.push_back(next());
            layer.wo.push_back(next());
        }
        layer.bo = next();
        layer.w1 = next();
        layer.b1 = next();
        layer.w2 = next();
        layer.b2 = next();
        b.layers.push_back(std::move(layer));
    }
    b.w_pref = next();
    b.b_pref = next();
    b.w_ctx = next();
    b.w_first = next();
    b.w_cap = next();
    const int m = objective_count(c.kind);
    for (int i = 0; i < m; ++i) b.w_last.push_back(next());
    for (int i = 0; i < m; ++i) b.w_key.push_back(next());
    b.w_glimpse_k = next();
    b.w_glimpse_v = next();
    b.w_glimpse_out = next();
    return b;
}

NodeEncoding encode_nodes(const BoundPolicy& net, const Instance& inst, Var features) {
    const PolicyConfig& c = *net.cfg;
    if (inst.kind != c.kind) throw ConfigError("instance kind does not match the policy");
    tape::Tape& t = *features.tape;
    const Matrix& fv = features.value();
    if (!fv.same_shape(inst.features)) throw ShapeError("feature node shape differs from the instance");

    Var input = features;
    if (inst.kind == ProblemKind::BiCVRP) {
        Matrix extra(fv.rows, 2, 0.0);
        extra(0, 1) = 1.0;
        for (std::size_t i = 1; i < fv.rows; ++i) extra(i, 0) = inst.demands[i - 1] / inst.capacity;
        input = tape::concat_cols(features, t.constant(std::move(extra)));
    }

    Var h = tape::add(tape::matmul(input, net.w_in), net.b_in);
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(c.hidden / c.heads));
    for (const auto& layer : net.layers) {
        std::optional<Var> attn;
        for (std::size_t k = 0; k < layer.wq.size(); ++k) {
            const Var q = tape::matmul(h, layer.wq[k]);
            const Var kk = tape::matmul(h, layer.wk[k]);
            const Var v = tape::matmul(h, layer.wv[k]);
            const Var w = tape::softmax_rows(tape::scale(tape::matmul_nt(q, kk), inv_sqrt_dk));
            const Var head = tape::matmul(tape::matmul(w, v), layer.wo[k]);
            attn = attn ? tape::add(*attn, head) : head;
        }
        h = tape::add(h, tape::add(*attn, layer.bo));
        const Var ff = tape::relu(tape::add(tape::matmul(h, layer.w1), layer.b1));
        h = tape::add(h, tape::add(tape::matmul(ff, layer.w2), layer.b2));
    }
    return {&inst, features, h, tape::mean_rows(h)};
}

namespace {

/// sum_i w_i * mats[i], skipping zero weights.
Var mix(std::span<const Var> mats, std::span<const double> w) {
    std::optional<Var> acc;
    for (std::size_t i = 0; i < mats.size(); ++i) {
        if (w[i] == 0.0) continue;
        const Var term = tape::scale(mats[i], w[i]);
        acc = acc ? tape::add(*acc, term) : term;
    }
    if (!acc) throw ConfigError("preference has no positive weight");
    return *acc;
}

}  // namespace

Encoded condition(const BoundPolicy& net, const NodeEncoding& nodes, const Preference& pref) {
    const ProblemKind kind = nodes.instance->kind;
    if (pref.size() != static_cast<std::size_t>(objective_count(kind)))
        throw ShapeError("preference length differs from objective count");
    tape::Tape& t = *nodes.embedding.tape;
    Encoded e;
    e.nodes = nodes;
    e.preference.assign(pref.weights().begin(), pref.weights().end());
    const Var lam = t.constant(Matrix::row(pref.weights()));
    const Var pemb = tape::add(tape::matmul(lam, net.w_pref), net.b_pref);
    e.context = tape::concat_cols(nodes.graph_mean, pemb);
    e.query_fixed = tape::matmul(e.context, net.w_ctx);
    const Var h = nodes.embedding;
    if (is_tsp(kind)) e.first_proj = tape::matmul(h, net.w_first);
    if (kind != ProblemKind::BiKP) e.last_proj = tape::matmul(h, mix(net.w_last, pref.weights()));
    e.glimpse_keys = tape::matmul(h, net.w_glimpse_k);
    e.glimpse_values = tape::matmul(h, net.w_glimpse_v);
    e.pointer_keys = tape::matmul(h, mix(net.w_key, pref.weights()));
    return e;
}

Encoded encode(const BoundPolicy& net, const Instance& inst, Var features, const Preference& pref) {
    return condition(net, encode_nodes(net, inst, features), pref);
}

namespace {

/// Mutable construction state of the M rows.
struct DecodeState {
    ProblemKind kind;
    std::size_t n = 0;        // nodes / customers / items
    std::size_t actions = 0;  // action-space width
    std::vector<std::vector<char>> taken;
    std::vector<int> first, last;
    std::vector<double> remaining;
    std::vector<std::size_t> visited;
    std::vector<char> done;
    std::vector<std::vector<int>> seq;
};

double item_weight(const Instance& inst, int i) { return inst.features(i, 0); }

void apply_action(DecodeState& s, const Instance& inst, std::size_t j, int a) {
    s.seq[j].push_back(a);
    switch (s.kind) {
        case ProblemKind::BiTSP:
        case ProblemKind::TriTSP:
            if (s.visited[j] == 0) s.first[j] = a;
            s.taken[j][a] = 1;
            s.last[j] = a;
            ++s.visited[j];
            if (s.visited[j] == s.n) s.done[j] = 1;
            break;
        case ProblemKind::BiCVRP:
            if (a == 0) {
                s.remaining[j] = inst.capacity;
                s.last[j] = 0;
                if (s.visited[j] == s.n) s.done[j] = 1;
            } else {
                s.taken[j][a] = 1;
                s.remaining[j] -= inst.demands[a - 1];
                s.last[j] = a;
                ++s.visited[j];
            }
            break;
        case ProblemKind::BiKP:
            if (static_cast<std::size_t>(a) == s.n) {
                s.done[j] = 1;
            } else {
                s.taken[j][a] = 1;
                s.remaining[j] -= item_weight(inst, a);
                ++s.visited[j];
            }
            break;
    }
}

/// Action mask for one row (1 = infeasible). Returns false when nothing is
/// feasible, which the construction rules exclude.
bool row_mask(const DecodeState& s, const Instance& inst, std::size_t j, char* mask) {
    const std::size_t A = s.actions;
    if (s.done[j]) {
        std::fill(mask, mask + A, 1);
        const std::size_t noop = s.kind == ProblemKind::BiCVRP ? 0 : A - 1;
        mask[noop] = 0;
        return true;
    }
    bool any = false;
    switch (s.kind) {
        case ProblemKind::BiTSP:
        case ProblemKind::TriTSP:
            for (std::size_t a = 0; a < A; ++a) any |= !(mask[a] = s.taken[j][a]);
            break;
        case ProblemKind::BiCVRP: {
            const bool all_visited = s.visited[j] == s.n;
            mask[0] = s.last[j] == 0 ? 1 : 0;
            for (std::size_t c = 1; c < A; ++c)
                mask[c] = all_visited || s.taken[j][c] || inst.demands[c - 1] > s.remaining[j] + 1e-12;
            for (std::size_t a = 0; a < A; ++a) any |= !mask[a];
            break;
        }
        case ProblemKind::BiKP: {
            bool item_fits = false;
            for (std::size_t i = 0; i < s.n; ++i) {
                mask[i] = s.taken[j][i] || item_weight(inst, static_cast<int>(i)) > s.remaining[j] + 1e-12;
                item_fits |= !mask[i];
            }
            mask[s.n] = item_fits ? 1 : 0;
            any = true;
            break;
        }
    }
    return any;
}

int choose(std::span<const double> logp, const char* mask, DecodeMode mode, Rng& rng) {
    int best = -1;
    if (mode == DecodeMode::Greedy) {
        for (std::size_t a = 0; a < logp.size(); ++a)
            if (!mask[a] && (best < 0 || logp[a] > logp[best])) best = static_cast<int>(a);
        return best;
    }
    const double u = rng.uniform();
    double cum = 0.0;
    for (std::size_t a = 0; a < logp.size(); ++a) {
        if (mask[a]) continue;
        best = static_cast<int>(a);
        cum += std::exp(logp[a]);
        if (u < cum) return best;
    }
    return best;
}

Solution to_solution(ProblemKind kind, std::size_t n, const std::vector<int>& seq) {
    if (is_tsp(kind)) return Tour{seq};
    if (kind == ProblemKind::BiCVRP) {
        Routes r;
        std::vector<int> cur;
        for (int a : seq) {
            if (a == 0) {
                if (!cur.empty()) r.routes.push_back(std::move(cur));
                cur.clear();
            } else {
                cur.push_back(a);
            }
        }
        if (!cur.empty()) r.routes.push_back(std::move(cur));
        return r;
    }
    ItemSet s;
    for (int a : seq)
        if (static_cast<std::size_t>(a) != n) s.items.push_back(a);
    return s;
}

}  // namespace

RolloutBatch rollout(const BoundPolicy& net, const Encoded& enc, int M, DecodeMode mode, std::uint64_t seed,
                     const std::vector<std::vector<int>>* replay) {
    if (M < 1) throw ConfigError("rollout count M must be >= 1");
    if (mode == DecodeMode::Replay && (!replay || replay->size() != static_cast<std::size_t>(M)))
        throw ConfigError("replay needs one action sequence per rollout");
    const Instance& inst = *enc.nodes.instance;
    const PolicyConfig& c = *net.cfg;
    tape::Tape& t = *enc.nodes.embedding.tape;
    const std::size_t rows = static_cast<std::size_t>(M);

    DecodeState s;
    s.kind = inst.kind;
    s.n = inst.size();
    s.actions = inst.kind == ProblemKind::BiKP ? s.n + 1 : enc.nodes.embedding.rows();
    s.taken.assign(rows, std::vector<char>(s.actions, 0));
    s.first.assign(rows, 0);
    s.last.assign(rows, 0);
    s.remaining.assign(rows, inst.capacity);
    s.visited.assign(rows, 0);
    s.done.assign(rows, 0);
    s.seq.assign(rows, {});
    std::vector<std::size_t> cursor(rows, 0);

    auto replay_next = [&](std::size_t j) {
        const auto& r = (*replay)[j];
        if (cursor[j] >= r.size()) throw ConfigError("replay sequence ended before the construction finished");
        return r[cursor[j]++];
    };

    // Forced first step.
    for (std::size_t j = 0; j < rows; ++j) {
        const int start = static_cast<int>(j % s.n);
        int forced = -1;
        if (is_tsp(inst.kind))
            forced = start;
        else if (inst.kind == ProblemKind::BiCVRP)
            forced = start + 1;
        else if (item_weight(inst, start) <= inst.capacity)
            forced = start;
        if (forced < 0) continue;
        if (mode == DecodeMode::Replay && replay_next(j) != forced)
            throw ConfigError("replay sequence disagrees with the forced start");
        apply_action(s, inst, j, forced);
    }

    std::vector<Rng> rngs;
    rngs.reserve(rows);
    for (std::size_t j = 0; j < rows; ++j) rngs.emplace_back(seed, "rollout", j);

    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(c.hidden));
    const double cap_scale = inst.capacity > 0.0 ? 1.0 / inst.capacity : 0.0;
    std::optional<Var> log_prob;
    std::vector<char> mask(rows * s.actions);
    std::vector<int> chosen(rows);

    while (std::any_of(s.done.begin(), s.done.end(), [](char d) { return !d; })) {
        // CVRP rows that are back at the depot with everything served finish here.
        for (std::size_t j = 0; j < rows; ++j) {
            if (!s.done[j] && !row_mask(s, inst, j, mask.data() + j * s.actions))
                throw Error("no feasible action during construction");
        }

        std::optional<Var> dyn;
        auto add_term = [&](Var v) { dyn = dyn ? tape::add(*dyn, v) : v; };
        if (is_tsp(inst.kind)) add_term(tape::gather_rows(enc.first_proj, s.first));
        if (inst.kind != ProblemKind::BiKP) add_term(tape::gather_rows(enc.last_proj, s.last));
        if (inst.kind != ProblemKind::TriTSP && inst.kind != ProblemKind::BiTSP) {
            Matrix cap(rows, 1);
            for (std::size_t j = 0; j < rows; ++j) cap.data[j] = s.remaining[j] * cap_scale;
            add_term(tape::matmul(t.constant(std::move(cap)), net.w_cap));
        }
        const Var q = tape::add(*dyn, enc.query_fixed);

        const std::size_t nodes = enc.glimpse_keys.rows();
        std::vector<char> gmask(rows * nodes);
        for (std::size_t j = 0; j < rows; ++j)
            std::copy_n(mask.begin() + j * s.actions, nodes, gmask.begin() + j * nodes);
        const Var compat = tape::masked_fill(tape::scale(tape::matmul_nt(q, enc.glimpse_keys), inv_sqrt_d), gmask);
        const Var glimpse = tape::matmul(tape::softmax_rows(compat), enc.glimpse_values);
        const Var q2 = tape::matmul(glimpse, net.w_glimpse_out);
        Var logits = tape::scale(tape::tanh(tape::scale(tape::matmul_nt(q2, enc.pointer_keys), inv_sqrt_d)),
                                 c.logit_clip);
        if (inst.kind == ProblemKind::BiKP) logits = tape::concat_cols(logits, t.constant(Matrix(rows, 1, 0.0)));
        const Var lp = tape::log_softmax_rows(tape::masked_fill(logits, mask));

        const Matrix& lpv = lp.value();
        for (std::size_t j = 0; j < rows; ++j) {
            const char* mrow = mask.data() + j * s.actions;
            if (s.done[j]) {
                chosen[j] = s.kind == ProblemKind::BiCVRP ? 0 : static_cast<int>(s.actions - 1);
                continue;
            }
            int a = mode == DecodeMode::Replay ? replay_next(j) : choose(lpv.row_span(j), mrow, mode, rngs[j]);
            if (a < 0 || static_cast<std::size_t>(a) >= s.actions || mrow[a])
                throw ConfigError("chosen action is infeasible at step " + std::to_string(s.seq[j].size()));
            chosen[j] = a;
        }
        const Var step_lp = tape::pick(lp, chosen);
        log_prob = log_prob ? tape::add(*log_prob, step_lp) : step_lp;
        for (std::size_t j = 0; j < rows; ++j)
            if (!s.done[j]) apply_action(s, inst, j, chosen[j]);
    }

    RolloutBatch batch;
    batch.log_prob = log_prob ? *log_prob : t.constant(Matrix(rows, 1, 0.0));
    batch.log_probs = batch.log_prob.value().data;
    batch.actions = std::move(s.seq);
    for (const auto& seq : batch.actions) {
        batch.solutions.push_back(to_solution(inst.kind, s.n, seq));
        batch.objectives.push_back(evaluate_objectives(inst, batch.solutions.back()));
    }
    if (mode == DecodeMode::Replay)
        for (std::size_t j = 0; j < rows; ++j)
            if (cursor[j] != (*replay)[j].size()) throw ConfigError("replay sequence longer than the construction");
    return batch;
}

void score(RolloutBatch& batch, Scalarization s, const Preference& pref, std::span<const double> ideal) {
    batch.losses.resize(batch.size());
    for (std::size_t j = 0; j < batch.size(); ++j)
        batch.losses[j] = scalarize(s, batch.objectives[j], pref.weights(), ideal);
}

Var objectives_on_tape(Var features, const Instance& inst, const Solution& sol) {
    tape::Tape& t = *features.tape;
    const int m = objective_count(inst.kind);
    if (is_tsp(inst.kind)) {
        const auto& order = std::get<Tour>(sol).order;
        std::vector<int> next(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) next[i] = order[(i + 1) % order.size()];
        const Var d = tape::sub(tape::gather_rows(features, order), tape::gather_rows(features, next));
        Matrix blocks(2 * m, m, 0.0);
        for (int i = 0; i < m; ++i) blocks(2 * i, i) = blocks(2 * i + 1, i) = 1.0;
        const Var edge = tape::sqrt(tape::matmul(tape::mul(d, d), t.constant(std::move(blocks))));
        return tape::sum_rows(edge);
    }
    if (inst.kind == ProblemKind::BiCVRP) {
        const auto& routes = std::get<Routes>(sol).routes;
        std::vector<int> from, to;
        Matrix segment(routes.size(), 0);
        std::vector<std::size_t> edges_per_route;
        for (const auto& r : routes) {
            int prev = 0;
            for (int cst : r) {
                from.push_back(prev);
                to.push_back(cst);
                prev = cst;
            }
            from.push_back(prev);
            to.push_back(0);
            edges_per_route.push_back(r.size() + 1);
        }
        segment = Matrix(routes.size(), from.size(), 0.0);
        for (std::size_t r = 0, e = 0; r < routes.size(); ++r)
            for (std::size_t k = 0; k < edges_per_route[r]; ++k) segment(r, e++) = 1.0;
        const Var d = tape::sub(tape::gather_rows(features, from), tape::gather_rows(features, to));
        const Var len = tape::sqrt(tape::sum_cols(tape::mul(d, d)));
        const Var total = tape::sum(len);
        const Var longest = tape::max_all(tape::matmul(t.constant(std::move(segment)), len));
        return tape::concat_cols(total, longest);
    }
    const auto& items = std::get<ItemSet>(sol).items;
    Matrix negate(3, 2, 0.0);
    negate(1, 0) = -1.0;
    negate(2, 1) = -1.0;
    const Var picked = tape::gather_rows(features, items);
    return tape::matmul(tape::sum_rows(picked), t.constant(std::move(negate)));
}

Var scalarize_on_tape(Var f, Scalarization s, const Preference& pref, std::span<const double> ideal) {
    tape::Tape& t = *f.tape;
    if (f.cols() != pref.size()) throw ShapeError("objective/preference length mismatch");
    if (s == Scalarization::WeightedSum) return tape::matmul(f, t.constant(Matrix::column(pref.weights())));
    if (ideal.size() != pref.size()) throw ShapeError("ideal point length mismatch");
    const Var dev = tape::abs(tape::sub(f, t.constant(Matrix::row(ideal))));
    return tape::max_all(tape::mul(dev, t.constant(Matrix::row(pref.weights()))));
}

Var combine_log_probs(const RolloutBatch& batch, std::span<const double> coefficients) {
    if (coefficients.size() != batch.size()) throw ShapeError("one coefficient per rollout required");
    for (double c : coefficients)
        if (!std::isfinite(c)) throw NumericError("non-finite rollout coefficient");
    tape::Tape& t = *batch.log_prob.tape;
    return tape::sum(tape::mul(batch.log_prob, t.constant(Matrix::column(coefficients))));
}

std::size_t best_rollout(const RolloutBatch& batch) {
    if (batch.losses.size() != batch.size() || batch.losses.empty()) throw ConfigError("batch has not been scored");
    return static_cast<std::size_t>(std::min_element(batch.losses.begin(), batch.losses.end()) - batch.losses.begin());
}

}  // namespace mocoguard
