#pragma once

/// Reverse-mode automatic differentiation over dense double matrices.
///
/// A Tape records every operation as a node holding its value and a
/// backward closure. Nodes are appended in creation order, which is a
/// topological order, so backward() is a single reverse sweep. Gradients
/// are produced for parameter and input leaves; constants never receive one.
///
/// Masking uses the finite constant kMaskValue instead of -inf, and the
/// gradient at masked positions is forced to exactly zero.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mocoguard/matrix.hpp"

namespace mocoguard::tape {

inline constexpr double kMaskValue = -1e9;

enum class NodeKind : std::uint8_t { Parameter, Input, Constant, Op };

class Tape;

/// Handle to a tape node. Cheap to copy; valid while its tape lives.
struct Var {
    Tape* tape = nullptr;
    std::uint32_t id = 0;

    const Matrix& value() const;
    std::size_t rows() const { return value().rows; }
    std::size_t cols() const { return value().cols; }
    /// Value of a 1x1 node.
    double scalar() const;
};

class Tape {
  public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var parameter(Matrix value) { return leaf(std::move(value), NodeKind::Parameter); }
    Var input(Matrix value) { return leaf(std::move(value), NodeKind::Input); }
    Var constant(Matrix value) { return leaf(std::move(value), NodeKind::Constant); }

    const Matrix& value(Var v) const { return nodes_[v.id].value; }
    NodeKind kind(Var v) const { return nodes_[v.id].kind; }
    bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

    /// Gradient of the last backward root w.r.t. a parameter or input leaf
    /// (or any differentiable node). Zero when the root does not depend on
    /// it. Throws Error for constants.
    Matrix grad(Var v) const;

    /// Populates gradients of a 1x1 root. Throws if called again before
    /// reset_grads().
    void backward(Var root);
    void reset_grads();

    std::size_t size() const { return nodes_.size(); }
    /// Drops every node created after the first `size`; handles to them
    /// become invalid. Requires that no backward pass is pending.
    void truncate(std::size_t size);

    // Node construction used by the op functions below.
    using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;
    Var push(Matrix value, std::initializer_list<Var> parents, BackwardFn fn);
    /// Gradient buffer of a node, allocated (zeroed) on first use.
    Matrix& grad_buffer(std::uint32_t id);
    bool needs_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }
    const Matrix& value_of(std::uint32_t id) const { return nodes_[id].value; }
    const Matrix* grad_if_any(std::uint32_t id) const;

  private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool has_grad = false;
        bool requires_grad = false;
        NodeKind kind = NodeKind::Op;
        BackwardFn backward;
    };

    Var leaf(Matrix value, NodeKind kind);

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

// Elementwise binary ops accept equal shapes, or a right operand that is a
// 1 x c row (broadcast over rows) or a 1 x 1 scalar.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var neg(Var a);

Var matmul(Var a, Var b);
/// a * b^T
Var matmul_nt(Var a, Var b);

Var exp(Var a);
/// Throws NumericError on non-positive or non-finite input.
Var log(Var a);
Var tanh(Var a);
Var sqrt(Var a);
Var relu(Var a);
Var abs(Var a);

/// Row-wise softmax. Throws NumericError on non-finite input.
Var softmax_rows(Var a);
/// Row-wise log-softmax. Throws NumericError on non-finite input.
Var log_softmax_rows(Var a);
/// Entries with mask != 0 are replaced by `fill`; their gradient is zero.
Var masked_fill(Var a, std::span<const char> mask, double fill = kMaskValue);

/// Rows of `a` selected by index (repetition allowed).
Var gather_rows(Var a, std::span<const int> rows);
/// out(i, 0) = a(i, cols[i]).
Var pick(Var a, std::span<const int> cols);
Var concat_cols(Var a, Var b);

/// 1x1 total.
Var sum(Var a);
Var mean(Var a);
/// 1 x c column sums / means (reduction over rows).
Var sum_rows(Var a);
Var mean_rows(Var a);
/// r x 1 row sums.
Var sum_cols(Var a);
/// 1x1 maximum; the gradient goes to the first maximal entry.
Var max_all(Var a);

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);

/// Named dense parameters in a fixed order.
struct ParamSet {
    std::vector<std::string> names;
    std::vector<Matrix> values;

    void add(std::string name, Matrix value);
    std::size_t count() const;  // total scalar count
    const Matrix& get(const std::string& name) const;
    std::size_t index_of(const std::string& name) const;
    /// Same names and shapes, zero values.
    ParamSet zeros_like() const;
    bool all_finite() const;
    bool operator==(const ParamSet&) const = default;
};

/// Registers every parameter as a leaf on `tape`, in ParamSet order.
std::vector<Var> register_params(Tape& tape, const ParamSet& params);

/// Accumulates the gradients of `vars` into `into` (same layout), scaled by s.
void accumulate_grads(const Tape& tape, std::span<const Var> vars, ParamSet& into, double s = 1.0);

/// Versioned binary checkpoint: magic, format version, JSON manifest
/// (names, shapes, caller metadata), then the flat little-endian doubles.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params, const nlohmann::json& meta);
struct LoadedCheckpoint {
    ParamSet params;
    nlohmann::json meta;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// FNV-1a 64 of a file's bytes, hex encoded.
std::string file_hash(const std::filesystem::path& path);

}  // namespace mocoguard::tape
