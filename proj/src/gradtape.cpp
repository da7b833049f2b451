#include "mocoguard/gradtape.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mocoguard/errors.hpp"

namespace mocoguard::tape {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

const Matrix& Var::value() const { return tape->value(*this); }

double Var::scalar() const {
    const auto& v = value();
    if (v.rows != 1 || v.cols != 1) throw ShapeError("scalar() on a non-1x1 node");
    return v.data[0];
}

Var Tape::leaf(Matrix value, NodeKind kind) {
    Node node;
    node.value = std::move(value);
    node.kind = kind;
    node.requires_grad = kind != NodeKind::Constant;
    nodes_.push_back(std::move(node));
    return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::push(Matrix value, std::initializer_list<Var> parents, BackwardFn fn) {
    Node node;
    node.value = std::move(value);
    node.kind = NodeKind::Op;
    for (const Var& p : parents) {
        if (p.tape != this) throw Error("operands belong to different tapes");
        node.requires_grad = node.requires_grad || nodes_[p.id].requires_grad;
    }
    if (node.requires_grad) node.backward = std::move(fn);
    nodes_.push_back(std::move(node));
    return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Matrix& Tape::grad_buffer(std::uint32_t id) {
    Node& n = nodes_[id];
    if (!n.has_grad) {
        n.grad = Matrix(n.value.rows, n.value.cols, 0.0);
        n.has_grad = true;
    }
    return n.grad;
}

const Matrix* Tape::grad_if_any(std::uint32_t id) const {
    const Node& n = nodes_[id];
    return n.has_grad ? &n.grad : nullptr;
}

Matrix Tape::grad(Var v) const {
    const Node& n = nodes_[v.id];
    if (n.kind == NodeKind::Constant) throw Error("constants carry no gradient");
    if (n.has_grad) return n.grad;
    return Matrix(n.value.rows, n.value.cols, 0.0);
}

void Tape::backward(Var root) {
    if (root.tape != this) throw Error("backward root belongs to a different tape");
    if (backward_done_) throw Error("backward called twice without reset_grads()");
    const Node& r = nodes_[root.id];
    if (r.value.rows != 1 || r.value.cols != 1) throw ShapeError("backward root must be 1x1");
    backward_done_ = true;
    if (!r.requires_grad) return;
    grad_buffer(root.id).data[0] = 1.0;
    for (std::uint32_t id = root.id + 1; id-- > 0;) {
        Node& n = nodes_[id];
        if (n.has_grad && n.backward) n.backward(*this, id);
    }
}

void Tape::truncate(std::size_t size) {
    if (backward_done_) throw Error("truncate during a pending backward pass");
    if (size < nodes_.size()) nodes_.resize(size);
}

void Tape::reset_grads() {
    for (auto& n : nodes_) {
        n.has_grad = false;
        n.grad = Matrix();
    }
    backward_done_ = false;
}

namespace {

enum class Bcast { Same, Row, Scalar };

Bcast broadcast_mode(const Matrix& a, const Matrix& b, const char* op) {
    if (a.same_shape(b)) return Bcast::Same;
    if (b.rows == 1 && b.cols == 1) return Bcast::Scalar;
    if (b.rows == 1 && b.cols == a.cols) return Bcast::Row;
    throw ShapeError(std::string(op) + ": incompatible shapes " + std::to_string(a.rows) + "x" +
                     std::to_string(a.cols) + " and " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
}

inline std::size_t bidx(Bcast mode, std::size_t flat, std::size_t cols) {
    switch (mode) {
        case Bcast::Same: return flat;
        case Bcast::Row: return flat % cols;
        case Bcast::Scalar: return 0;
    }
    return 0;
}

/// Generic broadcasting binary op. `fwd(x, y)` computes the value,
/// `da(x, y, out, g)` and `db(x, y, out, g)` the partial contributions.
template <class Fwd, class DA, class DB>
Var binary(Var a, Var b, const char* name, Fwd fwd, DA da, DB db) {
    Tape& t = *a.tape;
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    const Bcast mode = broadcast_mode(av, bv, name);
    Matrix out(av.rows, av.cols);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = fwd(av.data[i], bv.data[bidx(mode, i, av.cols)]);
    const std::uint32_t ia = a.id, ib = b.id;
    return t.push(std::move(out), {a, b}, [=](Tape& tp, std::uint32_t self) {
        const Matrix& g = *tp.grad_if_any(self);
        const Matrix& x = tp.value_of(ia);
        const Matrix& y = tp.value_of(ib);
        const Matrix& o = tp.value_of(self);
        if (tp.needs_grad(ia)) {
            Matrix& gx = tp.grad_buffer(ia);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const std::size_t j = bidx(mode, i, x.cols);
                gx.data[i] += da(x.data[i], y.data[j], o.data[i], g.data[i]);
            }
        }
        if (tp.needs_grad(ib)) {
            Matrix& gy = tp.grad_buffer(ib);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const std::size_t j = bidx(mode, i, x.cols);
                gy.data[j] += db(x.data[i], y.data[j], o.data[i], g.data[i]);
            }
        }
    });
}

/// Generic elementwise unary op; `d(x, out, g)` returns the input gradient.
template <class Fwd, class D>
Var unary(Var a, Fwd fwd, D d) {
    Tape& t = *a.tape;
    const Matrix& av = a.value();
    Matrix out(av.rows, av.cols);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = fwd(av.data[i]);
    const std::uint32_t ia = a.id;
    return t.push(std::move(out), {a}, [=](Tape& tp, std::uint32_t self) {
        const Matrix& g = *tp.grad_if_any(self);
        const Matrix& x = tp.value_of(ia);
        const Matrix& o = tp.value_of(self);
        Matrix& gx = tp.grad_buffer(ia);
        for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] += d(x.data[i], o.data[i], g.data[i]);
    });
}

void require_finite(const Matrix& m, const char* op) {
    for (double v : m.data)
        if (!std::isfinite(v)) throw NumericError(std::string(op) + ": non-finite input");
}

}  // namespace

Var add(Var a, Var b) {
    return binary(
        a, b, "add", [](double x, double y) { return x + y; }, [](double, double, double, double g) { return g; },
        [](double, double, double, double g) { return g; });
}

Var sub(Var a, Var b) {
    return binary(
        a, b, "sub", [](double x, double y) { return x - y; }, [](double, double, double, double g) { return g; },
        [](double, double, double, double g) { return -g; });
}

Var mul(Var a, Var b) {
    return binary(
        a, b, "mul", [](double x, double y) { return x * y; },
        [](double, double y, double, double g) { return g * y; },
        [](double x, double, double, double g) { return g * x; });
}

Var div(Var a, Var b) {
    return binary(
        a, b, "div", [](double x, double y) { return x / y; },
        [](double, double y, double, double g) { return g / y; },
        [](double, double y, double o, double g) { return -g * o / y; });
}

Var scale(Var a, double s) {
    return unary(a, [s](double x) { return x * s; }, [s](double, double, double g) { return g * s; });
}

Var add_scalar(Var a, double s) {
    return unary(a, [s](double x) { return x + s; }, [](double, double, double g) { return g; });
}

Var neg(Var a) { return scale(a, -1.0); }

Var matmul(Var a, Var b) {
    const Matrix& A = a.value();
    const Matrix& B = b.value();
    if (A.cols != B.rows) throw ShapeError("matmul: inner dimensions differ");
    const std::size_t n = A.rows, k = A.cols, m = B.cols;
    Matrix C(n, m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double* crow = C.data.data() + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = A.data[i * k + p];
            if (av == 0.0) continue;
            const double* brow = B.data.data() + p * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
        }
    }
    const std::uint32_t ia = a.id, ib = b.id;
    return a.tape->push(std::move(C), {a, b}, [=](Tape& tp, std::uint32_t self) {
        const Matrix& G = *tp.grad_if_any(self);
        const Matrix& A = tp.value_of(ia);
        const Matrix& B = tp.value_of(ib);
        if (tp.needs_grad(ia)) {
            Matrix& GA = tp.grad_buffer(ia);  // G B^T
            for (std::size_t i = 0; i < n; ++i) {
                const double* grow = G.data.data() + i * m;
                for (std::size_t p = 0; p < k; ++p) {
                    const double* brow = B.data.data() + p * m;
                    double s = 0.0;
                    for (std::size_t j = 0; j < m; ++j) s += grow[j] * brow[j];
                    GA.data[i * k + p] += s;
                }
            }
        }
        if (tp.needs_grad(ib)) {
            Matrix& GB = tp.grad_buffer(ib);  // A^T G
            for (std::size_t i = 0; i < n; ++i) {
                const double* grow = G.data.data() + i * m;
                for (std::size_t p = 0; p < k; ++p) {
                    const double av = A.data[i * k + p];
                    if (av == 0.0) continue;
                    double* gbrow = GB.data.data() + p * m;
                    for (std::size_t j = 0; j < m; ++j) gbrow[j] += av * grow[j];
                }
            }
        }
    });
}

Var matmul_nt(Var a, Var b) {
    const Matrix& A = a.value();
    const Matrix& B = b.value();
    if (A.cols != B.cols) throw ShapeError("matmul_nt: inner dimensions differ");
    const std::size_t n = A.rows, k = A.cols, m = B.rows;
    Matrix C(n, m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = A.data.data() + i * k;
        for (std::size_t j = 0; j < m; ++j) {
            const double* brow = B.data.data() + j * k;
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
            C.data[i * m + j] = s;
        }
    }
    const std::uint32_t ia = a.id, ib = b.id;
    return a.tape->push(std::move(C), {a, b}, [=](Tape& tp, std::uint32_t self) {
        const Matrix& G = *tp.grad_if_any(self);
        const Matrix& A = tp.value_of(ia);
        const Matrix& B = tp.value_of(ib);
        const bool need_a = tp.needs_grad(ia), need_b = tp.needs_grad(ib);
        Matrix* GA = need_a ? &tp.grad_buffer(ia) : nullptr;
        Matrix* GB = need_b ? &tp.grad_buffer(ib) : nullptr;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                const double g = G.data[i * m + j];
                if (g == 0.0) continue;
                if (GA) {
                    double* garow = GA->data.data() + i * k;
                    const double* brow = B.data.data() + j * k;
                    for (std::size_t p = 0; p < k; ++p) garow[p] += g * brow[p];
                }
                if (GB) {
                    double* gbrow = GB->data.data() + j * k;
                    const double* arow = A.data.data() + i * k;
                    for (std::size_t p = 0; p < k; ++p) gbrow[p] += g * arow[p];
                }
            }
        }
    });
}

Var exp(Var a) {
    return unary(a, [](double x) { return std::exp(x); }, [](double, double o, double g) { return g * o; });
}

Var log(Var a) {
    for (double v : a.value().data)
        if (!(v > 0.0) || !std::isfinite(v)) throw NumericError("log: non-positive or non-finite input");
    return unary(a, [](double x) { return std::log(x); }, [](double x, double, double g) { return g / x; });
}

Var tanh(Var a) {
    return unary(
        a, [](double x) { return std::tanh(x); }, [](double, double o, double g) { return g * (1.0 - o * o); });
}

Var sqrt(Var a) {
    return unary(
        a, [](double x) { return std::sqrt(x); },
        [](double, double o, double g) { return o > 0.0 ? g * 0.5 / o : 0.0; });
}

Var relu(Var a) {
    return unary(
        a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double, double g) { return x > 0.0 ? g : 0.0; });
}

Var abs(Var a) {
    return unary(
        a, [](double x) { return std::abs(x); },
        [](double x, double, double g) { return x > 0.0 ? g : (x < 0.0 ? -g : 0.0); });
}

Var softmax_rows(Var a) {
    const Matrix& x = a.value();
    require_finite(x, "softmax");
    Matrix out(x.rows, x.cols);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const auto in = x.row_span(r);
        auto o = out.row_span(r);
        const double mx = *std::max_element(in.begin(), in.end());
        double s = 0.0;
        for (std::size_t c = 0; c < in.size(); ++c) s += (o[c] = std::exp(in[c] - mx));
        for (auto& v : o) v /= s;
    }
    const std::uint32_t ia = a.id;
    return a.tape->push(std::move(out), {a}, [=](Tape& tp, std::uint32_t self) {
        const Matrix& g = *tp.grad_if_any(self);
        const Matrix& y = tp.value_of(self);
        Matrix& gx = tp.grad_buffer(ia);
        for (std::size_t r = 0; r < y.rows; ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < y.cols; ++c) dot += g(r, c) * y(r, c);
            for (std::size_t c = 0; c < y.cols; ++c) gx(r, c) += y(r, c) * (g(r, c) - dot);
        }
    });
}

Var log_softmax_rows(Var a) {
    const Matrix& x = a.value();
    require_finite(x, "log_softmax");
    Matrix out(x.rows, x.cols);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const auto in = x.row_span(r);
        auto o = out.row_span(r);
        const double mx = *std::max_element(in.begin(), in.end());
        double s = 0.0;
        for (double v : in) s += std::exp(v - mx);
        const double lse = mx + std::log(s);
        for (std::size_t c = 0; c < in.size(); ++c) o[c] = in[c] - lse;
    }
    const std::uint32_t ia = a.id;
    return a.tape->push(std::move(out), {a}, [=](Tape& tp, std::uint32_t self) {
        const Matrix& g = *tp.grad_if_any(self);
        const Matrix& y = tp.value_of(self);
        Matrix& gx = tp.grad_buffer(ia);
        for (std::size_t r = 0; r < y.rows; ++r) {
            double gs = 0.0;
            for (std::size_t c = 0; c < y.cols; ++c) gs += g(r, c);
            for (std::size_t c = 0; c < y.cols; ++c) gx(r, c) += g(r, c) - std::exp(y(r, c)) * gs;
        }
    });
}

Var masked_fill(Var a, std::span<const char> mask, double fill) {
    const Matrix& x = a.value();
    if (mask.size() != x.size()) throw ShapeError("masked_fill: mask size differs from tensor size");
    Matrix out = x;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (mask[i]) out.data[i] = fill;
    std::vector<char> m(mask.begin(), mask.end());
    const std::uint32_t ia = a.id;
    return a.tape->push(std::move(out), {a}, [=, m = std::move(m)](Tape& tp, std::uint32_t self) {
        const Matrix& g = *tp.grad_if_any(self);
        Matrix& gx = tp.grad_buffer(ia);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!m[i]) gx.data[i] += g.data[i];
    });
}

Var gather_rows(Var a, std::span<const int> rows) {
    const Matrix& x = a.value();
    Matrix out(rows.size(), x.cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] < 0 || static_cast<std::size_t>(rows[r]) >= x.rows) throw ShapeError("gather_rows: index out of range");
        std::copy_n(x.data.begin() + rows[r] * x.cols, x.cols, out.data.begin() + r * x.cols);
    }
    std::vector<int> idx(rows.begin(), rows.end());
    const std::uint32_t ia = a.id;
    return a.tape->push(std::move(out), {a}, [=, idx = std::move(idx)](Tape& tp, std::uint32_t self) {
        const Matrix& g = *tp.grad_if_any(self);
        Matrix& gx = tp.grad_buffer(ia);
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t c = 0; c < g.cols; ++c) gx(idx[r], c) += g(r, c);
    });
}

Var pick(Var a, std::span<const int> cols) {
    const Matrix& x = a.value();
    if (cols.size() != x.rows) throw ShapeError("pick: one column index per row required");
    Matrix out(x.rows, 1);
    for (std::size_t r = 0; r < x.rows; ++r) {
        if (cols[r] < 0 || static_cast<std::size_t>(cols[r]) >= x.cols) throw ShapeError("pick: column out of range");
        out.data[r] = x(r, cols[r]);
    }
    std::vector<int> idx(cols.begin(), cols.end());
    const std::uint32_t ia = a.id;
    return a.tape->push(std::move(out), {a}, [=, idx = std::move(idx)](Tape& tp, std::uint32_t self) {
        const Matrix& g = *tp.grad_if_any(self);
        Matrix& gx = tp.grad_buffer(ia);
        for (std::size_t r = 0; r < idx.size(); ++r) gx(r, idx[r]) += g.data[r];
    });
}

Var concat_cols(Var a, Var b) {
    const Matrix& x = a.value();
    const Matrix& y = b.value();
    if (x.rows != y.rows) throw ShapeError("concat_cols: row counts differ");
    Matrix out(x.rows, x.cols + y.cols);
    for (std::size_t r = 0; r < x.rows; ++r) {
        std::copy_n(x.data.begin() + r * x.cols, x.cols, out.data.begin() + r * out.cols);
        std::copy_n(y.data.begin() + r * y.cols, y.cols, out.data.begin() + r * out.cols + x.cols);
    }
    const std::uint32_t ia = a.id, ib = b.id;
    const std::size_t xc = x.cols, yc = y.cols;
    return a.tape->push(std::move(out), {a, b}, [=](Tape& tp, std::uint32_t self) {
        const Matrix& g = *tp.grad_if_any(self);
        if (tp.needs_grad(ia)) {
            Matrix& gx = tp.grad_buffer(ia);
            for (std::size_t r = 0; r < g.rows; ++r)
                for (std::size_t c = 0; c < xc; ++c) gx(r, c) += g(r, c);
        }
        if (tp.needs_grad(ib)) {
            Matrix& gy = tp.grad_buffer(ib);
            for (std::size_t r = 0; r < g.rows; ++r)
                for (std::size_t c = 0; c < yc; ++c) gy(r, c) += g(r, xc + c);
        }
    });
}

namespace {

Var reduce_all(Var a, double factor) {
    const Matrix& x = a.value();
    double s = 0.0;
    for (double v : x.data) s += v;
    const std::uint32_t ia = a.id;
    return a.tape->push(Matrix(1, 1, s * factor), {a}, [=](Tape& tp, std::uint32_t self) {
        const double g = tp.grad_if_any(self)->data[0] * factor;
        for (auto& v : tp.grad_buffer(ia).data) v += g;
    });
}

Var reduce_rows(Var a, double factor) {
    const Matrix& x = a.value();
    Matrix out(1, x.cols, 0.0);
    for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t c = 0; c < x.cols; ++c) out.data[c] += x(r, c);
    for (auto& v : out.data) v *= factor;
    const std::uint32_t ia = a.id;
    return a.tape->push(std::move(out), {a}, [=](Tape& tp, std::uint32_t self) {
        const Matrix& g = *tp.grad_if_any(self);
        Matrix& gx = tp.grad_buffer(ia);
        for (std::size_t r = 0; r < gx.rows; ++r)
            for (std::size_t c = 0; c < gx.cols; ++c) gx(r, c) += g.data[c] * factor;
    });
}

}  // namespace

Var sum(Var a) { return reduce_all(a, 1.0); }

Var mean(Var a) {
    const std::size_t n = a.value().size();
    if (n == 0) throw ShapeError("mean of an empty tensor");
    return reduce_all(a, 1.0 / static_cast<double>(n));
}

Var sum_rows(Var a) { return reduce_rows(a, 1.0); }

Var mean_rows(Var a) {
    if (a.rows() == 0) throw ShapeError("mean_rows of an empty tensor");
    return reduce_rows(a, 1.0 / static_cast<double>(a.rows()));
}

Var sum_cols(Var a) {
    const Matrix& x = a.value();
    Matrix out(x.rows, 1, 0.0);
    for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t c = 0; c < x.cols; ++c) out.data[r] += x(r, c);
    const std::uint32_t ia = a.id;
    return a.tape->push(std::move(out), {a}, [=](Tape& tp, std::uint32_t self) {
        const Matrix& g = *tp.grad_if_any(self);
        Matrix& gx = tp.grad_buffer(ia);
        for (std::size_t r = 0; r < gx.rows; ++r)
            for (std::size_t c = 0; c < gx.cols; ++c) gx(r, c) += g.data[r];
    });
}

Var max_all(Var a) {
    const Matrix& x = a.value();
    if (x.size() == 0) throw ShapeError("max_all of an empty tensor");
    const std::size_t arg = static_cast<std::size_t>(std::max_element(x.data.begin(), x.data.end()) - x.data.begin());
    const std::uint32_t ia = a.id;
    return a.tape->push(Matrix(1, 1, x.data[arg]), {a}, [=](Tape& tp, std::uint32_t self) {
        tp.grad_buffer(ia).data[arg] += tp.grad_if_any(self)->data[0];
    });
}

Var operator+(Var a, Var b) { return add(a, b); }
Var operator-(Var a, Var b) { return sub(a, b); }
Var operator*(Var a, Var b) { return mul(a, b); }

// ---------------------------------------------------------------------------
// Parameters and checkpoints

void ParamSet::add(std::string name, Matrix value) {
    if (std::find(names.begin(), names.end(), name) != names.end()) throw ConfigError("duplicate parameter " + name);
    names.push_back(std::move(name));
    values.push_back(std::move(value));
}

std::size_t ParamSet::count() const {
    std::size_t n = 0;
    for (const auto& v : values) n += v.size();
    return n;
}

std::size_t ParamSet::index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("unknown parameter " + name);
    return static_cast<std::size_t>(it - names.begin());
}

const Matrix& ParamSet::get(const std::string& name) const { return values[index_of(name)]; }

ParamSet ParamSet::zeros_like() const {
    ParamSet z;
    z.names = names;
    for (const auto& v : values) z.values.emplace_back(v.rows, v.cols, 0.0);
    return z;
}

bool ParamSet::all_finite() const {
    for (const auto& v : values)
        for (double x : v.data)
            if (!std::isfinite(x)) return false;
    return true;
}

std::vector<Var> register_params(Tape& tape, const ParamSet& params) {
    std::vector<Var> vars;
    vars.reserve(params.values.size());
    for (const auto& v : params.values) vars.push_back(tape.parameter(v));
    return vars;
}

void accumulate_grads(const Tape& tape, std::span<const Var> vars, ParamSet& into, double s) {
    if (vars.size() != into.values.size()) throw ShapeError("accumulate_grads: layout mismatch");
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const Matrix* g = tape.grad_if_any(vars[i].id);
        if (!g) continue;
        auto& dst = into.values[i].data;
        if (dst.size() != g->size()) throw ShapeError("accumulate_grads: shape mismatch for " + into.names[i]);
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += s * g->data[k];
    }
}

namespace {

constexpr char kMagic[8] = {'M', 'O', 'C', 'O', 'G', 'R', 'D', '\0'};

template <class T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw SchemaError("truncated checkpoint");
    return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params, const nlohmann::json& meta) {
    nlohmann::json manifest;
    manifest["version"] = kCheckpointVersion;
    manifest["meta"] = meta;
    manifest["params"] = nlohmann::json::array();
    for (std::size_t i = 0; i < params.names.size(); ++i)
        manifest["params"].push_back(
            {{"name", params.names[i]}, {"rows", params.values[i].rows}, {"cols", params.values[i].cols}});
    const std::string text = manifest.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write checkpoint " + path.string());
    out.write(kMagic, sizeof kMagic);
    write_pod(out, kCheckpointVersion);
    write_pod(out, static_cast<std::uint64_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    write_pod(out, static_cast<std::uint64_t>(params.count()));
    for (const auto& v : params.values)
        out.write(reinterpret_cast<const char*>(v.data.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!out) throw SchemaError("failed writing checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open checkpoint " + path.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw SchemaError("not a checkpoint: " + path.string());
    const auto version = read_pod<std::uint32_t>(in);
    if (version != kCheckpointVersion) throw SchemaError("unsupported checkpoint version " + std::to_string(version));
    const auto len = read_pod<std::uint64_t>(in);
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (!in) throw SchemaError("truncated checkpoint manifest");
    LoadedCheckpoint ck;
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(text);
        ck.meta = manifest.at("meta");
        for (const auto& p : manifest.at("params"))
            ck.params.add(p.at("name").get<std::string>(),
                          Matrix(p.at("rows").get<std::size_t>(), p.at("cols").get<std::size_t>()));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("bad checkpoint manifest: ") + e.what());
    }
    const auto count = read_pod<std::uint64_t>(in);
    if (count != ck.params.count()) throw SchemaError("checkpoint payload size disagrees with manifest");
    for (auto& v : ck.params.values) {
        in.read(reinterpret_cast<char*>(v.data.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
        if (!in) throw SchemaError("truncated checkpoint payload");
    }
    return ck;
}

std::string file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (in) {
        in.read(buf, sizeof buf);
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

}  // namespace mocoguard::tape
