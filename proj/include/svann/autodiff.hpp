// Scalar reverse-mode automatic differentiation over an explicit tape.
//
// A Tape is an append-only list of scalar nodes; operand ids always point
// backwards, so the node order is a topological order by construction.
// forward() fills the primal values, backward() runs one reverse sweep and
// returns the adjoint d(output)/d(node) for every node.
//
// Higher-order derivatives come from derive(), which appends nodes that
// compute d(output)/d(input) symbolically on the same tape. The result is an
// ordinary node, so derive(derive(f, x), x) yields second derivatives for
// PDE residuals without a second tape mechanism.
//
// The engine uses the calculus sigmoid derivative s(1 - s) throughout.

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace svann::ad {

enum class Op : std::uint8_t {
  input,
  constant,
  add,
  sub,
  mul,
  div,
  neg,
  exp,
  log,
  pow_int,
  sin,
  cos,
  sigmoid,
  tanh,
};

inline int op_arity(Op op) {
  switch (op) {
    case Op::input:
    case Op::constant:
      return 0;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
      return 2;
    default:
      return 1;
  }
}

inline const char* op_name(Op op) {
  switch (op) {
    case Op::input: return "input";
    case Op::constant: return "const";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::neg: return "neg";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::pow_int: return "pow";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::sigmoid: return "sigmoid";
    case Op::tanh: return "tanh";
  }
  return "?";
}

struct NodeId {
  std::int32_t index = -1;
  bool valid() const { return index >= 0; }
  bool operator==(const NodeId&) const = default;
};

struct Node {
  Op op = Op::constant;
  NodeId a;          // first operand (unary/binary)
  NodeId b;          // second operand (binary)
  int exponent = 0;  // pow_int only
  double value = 0.0;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// d(output)/d(node id) for every node, from one backward() sweep.
struct GradientRecord {
  std::vector<double> adjoints;
  double at(NodeId id) const { return adjoints.at(static_cast<std::size_t>(id.index)); }
};

class Tape {
 public:
  // -- construction -----------------------------------------------------

  NodeId input() {
    inputs_.push_back(next_id());
    assigned_.push_back(false);
    return push({Op::input, {}, {}, 0, 0.0});
  }

  NodeId input(double value) {
    NodeId id = input();
    set_input(id, value);
    return id;
  }

  NodeId constant(double value) { return push({Op::constant, {}, {}, 0, value}); }

  NodeId add(NodeId a, NodeId b) { return binary(Op::add, a, b); }
  NodeId sub(NodeId a, NodeId b) { return binary(Op::sub, a, b); }
  NodeId mul(NodeId a, NodeId b) { return binary(Op::mul, a, b); }
  NodeId div(NodeId a, NodeId b) { return binary(Op::div, a, b); }
  NodeId neg(NodeId a) { return unary(Op::neg, a); }
  NodeId exp(NodeId a) { return unary(Op::exp, a); }
  NodeId log(NodeId a) { return unary(Op::log, a); }
  NodeId sin(NodeId a) { return unary(Op::sin, a); }
  NodeId cos(NodeId a) { return unary(Op::cos, a); }
  NodeId sigmoid(NodeId a) { return unary(Op::sigmoid, a); }
  NodeId tanh(NodeId a) { return unary(Op::tanh, a); }

  NodeId pow_int(NodeId a, int exponent) {
    check_operand(a, "pow_int");
    return push({Op::pow_int, a, {}, exponent, 0.0});
  }

  /// Generic builder used by the CLI and by random-graph tests. `exponent`
  /// only applies to pow_int.
  NodeId build(Op op, std::span<const NodeId> operands, int exponent = 0) {
    const int arity = op_arity(op);
    if (static_cast<int>(operands.size()) != arity)
      throw std::invalid_argument(std::string("build: ") + op_name(op) + " expects " +
                                  std::to_string(arity) + " operands, got " +
                                  std::to_string(operands.size()));
    switch (arity) {
      case 0:
        return op == Op::input ? input() : constant(0.0);
      case 1:
        return op == Op::pow_int ? pow_int(operands[0], exponent) : unary(op, operands[0]);
      default:
        return binary(op, operands[0], operands[1]);
    }
  }

  // convenience sums over many terms
  NodeId sum(std::span<const NodeId> terms) {
    if (terms.empty()) return constant(0.0);
    NodeId acc = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) acc = add(acc, terms[i]);
    return acc;
  }

  // -- evaluation --------------------------------------------------------

  void set_input(NodeId id, double value) {
    check_operand(id, "set_input");
    Node& n = nodes_[static_cast<std::size_t>(id.index)];
    if (n.op != Op::input) throw std::invalid_argument("set_input: node is not an input");
    n.value = value;
    assigned_[input_slot(id)] = true;
  }

  /// Evaluate every node in tape order. All inputs must be assigned.
  void forward() {
    for (std::size_t s = 0; s < inputs_.size(); ++s)
      if (!assigned_[s])
        throw std::logic_error("forward: input node " + std::to_string(inputs_[s].index) +
                               " is unassigned");
    for (auto& n : nodes_) {
      switch (n.op) {
        case Op::input:
        case Op::constant: break;
        case Op::add: n.value = val(n.a) + val(n.b); break;
        case Op::sub: n.value = val(n.a) - val(n.b); break;
        case Op::mul: n.value = val(n.a) * val(n.b); break;
        case Op::div: n.value = val(n.a) / val(n.b); break;
        case Op::neg: n.value = -val(n.a); break;
        case Op::exp: n.value = std::exp(val(n.a)); break;
        case Op::log: n.value = std::log(val(n.a)); break;
        case Op::pow_int: n.value = int_pow(val(n.a), n.exponent); break;
        case Op::sin: n.value = std::sin(val(n.a)); break;
        case Op::cos: n.value = std::cos(val(n.a)); break;
        case Op::sigmoid: n.value = ad::sigmoid(val(n.a)); break;
        case Op::tanh: n.value = std::tanh(val(n.a)); break;
      }
    }
    forward_done_ = true;
  }

  double value(NodeId id) const {
    check_operand(id, "value");
    return nodes_[static_cast<std::size_t>(id.index)].value;
  }

  /// One reverse sweep from `output`. Requires a prior forward().
  GradientRecord backward(NodeId output) const {
    check_operand(output, "backward");
    if (!forward_done_) throw std::logic_error("backward called before forward");
    GradientRecord rec;
    rec.adjoints.assign(nodes_.size(), 0.0);
    rec.adjoints[static_cast<std::size_t>(output.index)] = 1.0;
    for (std::int32_t i = output.index; i >= 0; --i) {
      const double adj = rec.adjoints[static_cast<std::size_t>(i)];
      if (adj == 0.0) continue;
      const Node& n = nodes_[static_cast<std::size_t>(i)];
      auto bump = [&](NodeId id, double d) {
        rec.adjoints[static_cast<std::size_t>(id.index)] += adj * d;
      };
      switch (n.op) {
        case Op::input:
        case Op::constant: break;
        case Op::add: bump(n.a, 1.0); bump(n.b, 1.0); break;
        case Op::sub: bump(n.a, 1.0); bump(n.b, -1.0); break;
        case Op::mul: bump(n.a, val(n.b)); bump(n.b, val(n.a)); break;
        case Op::div: {
          const double vb = val(n.b);
          bump(n.a, 1.0 / vb);
          bump(n.b, -val(n.a) / (vb * vb));
          break;
        }
        case Op::neg: bump(n.a, -1.0); break;
        case Op::exp: bump(n.a, n.value); break;
        case Op::log: bump(n.a, 1.0 / val(n.a)); break;
        case Op::pow_int:
          if (n.exponent != 0)
            bump(n.a, static_cast<double>(n.exponent) * int_pow(val(n.a), n.exponent - 1));
          break;
        case Op::sin: bump(n.a, std::cos(val(n.a))); break;
        case Op::cos: bump(n.a, -std::sin(val(n.a))); break;
        case Op::sigmoid: bump(n.a, n.value * (1.0 - n.value)); break;
        case Op::tanh: bump(n.a, 1.0 - n.value * n.value); break;
      }
    }
    return rec;
  }

  // -- symbolic differentiation -------------------------------------------

  /// Append nodes computing d(output)/d(wrt) and return the result node.
  /// The new subgraph is itself differentiable, which is how second
  /// derivatives for PDE residuals are built.
  NodeId derive(NodeId output, NodeId wrt) {
    check_operand(output, "derive");
    check_operand(wrt, "derive");
    if (node(wrt).op != Op::input)
      throw std::invalid_argument("derive: wrt must be an input node");

    // Which existing nodes depend on wrt? Only those need adjoint nodes.
    const std::size_t n_existing = static_cast<std::size_t>(output.index) + 1;
    std::vector<char> depends(n_existing, 0);
    depends[static_cast<std::size_t>(wrt.index)] = 1;
    for (std::size_t i = 0; i < n_existing; ++i) {
      const Node& n = nodes_[i];
      if (op_arity(n.op) >= 1 && depends[static_cast<std::size_t>(n.a.index)]) depends[i] = 1;
      if (op_arity(n.op) == 2 && depends[static_cast<std::size_t>(n.b.index)]) depends[i] = 1;
    }
    if (!depends[static_cast<std::size_t>(output.index)]) return constant(0.0);

    std::vector<NodeId> adj(n_existing, NodeId{});
    adj[static_cast<std::size_t>(output.index)] = constant(1.0);
    auto accumulate = [&](NodeId id, NodeId term) {
      if (!depends[static_cast<std::size_t>(id.index)]) return;
      NodeId& slot = adj[static_cast<std::size_t>(id.index)];
      slot = slot.valid() ? add(slot, term) : term;
    };
    for (std::int32_t i = output.index; i >= 0; --i) {
      const NodeId a_bar = adj[static_cast<std::size_t>(i)];
      if (!a_bar.valid()) continue;
      const Node n = node(NodeId{i});  // copy: push may reallocate nodes_
      switch (n.op) {
        case Op::input:
        case Op::constant: break;
        case Op::add:
          accumulate(n.a, a_bar);
          accumulate(n.b, a_bar);
          break;
        case Op::sub:
          accumulate(n.a, a_bar);
          accumulate(n.b, neg(a_bar));
          break;
        case Op::mul:
          accumulate(n.a, mul(a_bar, n.b));
          accumulate(n.b, mul(a_bar, n.a));
          break;
        case Op::div:
          accumulate(n.a, div(a_bar, n.b));
          accumulate(n.b, neg(div(mul(a_bar, NodeId{i}), n.b)));  // -adj * (a/b) / b
          break;
        case Op::neg: accumulate(n.a, neg(a_bar)); break;
        case Op::exp: accumulate(n.a, mul(a_bar, NodeId{i})); break;
        case Op::log: accumulate(n.a, div(a_bar, n.a)); break;
        case Op::pow_int:
          if (n.exponent != 0)
            accumulate(n.a, mul(a_bar, mul(constant(static_cast<double>(n.exponent)),
                                           pow_int(n.a, n.exponent - 1))));
          break;
        case Op::sin: accumulate(n.a, mul(a_bar, cos(n.a))); break;
        case Op::cos: accumulate(n.a, neg(mul(a_bar, sin(n.a)))); break;
        case Op::sigmoid:
          // s' = s. (1 - s), reusing the existing sigmoid node
          accumulate(n.a, mul(a_bar, mul(NodeId{i}, sub(constant(1.0), NodeId{i}))));
          break;
        case Op::tanh:
          accumulate(n.a, mul(a_bar, sub(constant(1.0), mul(NodeId{i}, NodeId{i}))));
          break;
      }
    }
    const NodeId result = adj[static_cast<std::size_t>(wrt.index)];
    return result.valid() ? result : constant(0.0);
  }

  // -- inspection ----------------------------------------------------------

  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id.index)); }
  std::span<const NodeId> inputs() const { return inputs_; }

 private:
  NodeId next_id() const { return {static_cast<std::int32_t>(nodes_.size())}; }

  NodeId push(Node n) {
    nodes_.push_back(n);
    forward_done_ = false;
    return {static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  NodeId unary(Op op, NodeId a) {
    check_operand(a, op_name(op));
    return push({op, a, {}, 0, 0.0});
  }

  NodeId binary(Op op, NodeId a, NodeId b) {
    check_operand(a, op_name(op));
    check_operand(b, op_name(op));
    return push({op, a, b, 0, 0.0});
  }

  void check_operand(NodeId id, const char* who) const {
    if (!id.valid() || static_cast<std::size_t>(id.index) >= nodes_.size())
      throw std::invalid_argument(std::string(who) + ": unknown node id " +
                                  std::to_string(id.index));
  }

  std::size_t input_slot(NodeId id) const {
    for (std::size_t s = 0; s < inputs_.size(); ++s)
      if (inputs_[s] == id) return s;
    throw std::logic_error("not an input node");
  }

  double val(NodeId id) const { return nodes_[static_cast<std::size_t>(id.index)].value; }

  static double int_pow(double x, int k) {
    if (k < 0) return 1.0 / int_pow(x, -k);
    double r = 1.0, base = x;
    for (int e = k; e > 0; e >>= 1) {
      if (e & 1) r *= base;
      base *= base;
    }
    return r;
  }

  std::vector<Node> nodes_;
  std::vector<NodeId> inputs_;
  std::vector<bool> assigned_;  // parallel to inputs_
  bool forward_done_ = false;
};

// ---------------------------------------------------------------------------
// Gradient checking against central finite differences: the correctness
// oracle for everything built on the tape.
// ---------------------------------------------------------------------------

struct GradCheckEntry {
  NodeId input;
  double adjoint = 0.0;
  double finite_difference = 0.0;
  double relative_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_relative_error = 0.0;
  bool passed = false;
};

/// Compare backward() adjoints of the given inputs against
/// (f(x+h) - f(x-h)) / 2h. The error is |fd - ad| / max(|fd|, |ad|, 1), so
/// near-zero gradients are judged on absolute error.
inline GradCheckReport check_gradients(Tape& tape, NodeId output,
                                       std::span<const NodeId> inputs, double h,
                                       double tolerance) {
  if (h <= 0.0) throw std::invalid_argument("check_gradients: h must be positive");
  tape.forward();
  const GradientRecord grads = tape.backward(output);

  GradCheckReport report;
  for (NodeId id : inputs) {
    const double x0 = tape.value(id);
    tape.set_input(id, x0 + h);
    tape.forward();
    const double f_plus = tape.value(output);
    tape.set_input(id, x0 - h);
    tape.forward();
    const double f_minus = tape.value(output);
    tape.set_input(id, x0);

    GradCheckEntry entry;
    entry.input = id;
    entry.adjoint = grads.at(id);
    entry.finite_difference = (f_plus - f_minus) / (2.0 * h);
    const double scale =
        std::max({std::abs(entry.finite_difference), std::abs(entry.adjoint), 1.0});
    entry.relative_error = std::abs(entry.finite_difference - entry.adjoint) / scale;
    report.max_relative_error = std::max(report.max_relative_error, entry.relative_error);
    report.entries.push_back(entry);
  }
  tape.forward();  // restore primal values
  report.passed = report.max_relative_error <= tolerance;
  return report;
}

// ---------------------------------------------------------------------------
// The worked two-hidden-unit example graph. Used by `ad trace` and by the
// golden tests: with all weights 0.5 and x = t = 0.1 the forward column is
// (0.0500, 0.1000, 0.5250, 0.2625, 0.5250).
// ---------------------------------------------------------------------------

struct ToyGraph {
  Tape tape;
  NodeId yhat;
  // (label, node) pairs in the published trace row order
  std::vector<std::pair<std::string, NodeId>> trace_rows;
  NodeId by_name(const std::string& name) const {
    for (const auto& [label, id] : trace_rows)
      if (label == name) return id;
    throw std::out_of_range("toy graph has no node '" + name + "'");
  }
};

/// Two-column trace of any tape: forward value and adjoint of each listed
/// node. Runs forward + one backward sweep from `output`.
struct TraceEntry {
  std::string label;
  Op op;
  double value = 0.0;
  double adjoint = 0.0;
};

inline std::vector<TraceEntry> trace_table(Tape& tape, NodeId output,
                                           std::span<const std::pair<std::string, NodeId>> rows) {
  tape.forward();
  const GradientRecord grads = tape.backward(output);
  std::vector<TraceEntry> out;
  for (const auto& [label, id] : rows)
    out.push_back({label, tape.node(id).op, tape.value(id), grads.at(id)});
  return out;
}

inline ToyGraph make_toy_graph(double weight_init = 0.5, double x_val = 0.1,
                               double t_val = 0.1) {
  ToyGraph g;
  Tape& tp = g.tape;
  NodeId w1 = tp.input(weight_init), x = tp.input(x_val), w2 = tp.input(weight_init);
  NodeId w3 = tp.input(weight_init), t = tp.input(t_val), w4 = tp.input(weight_init);
  NodeId v1 = tp.mul(w1, x);
  NodeId v2 = tp.mul(w2, x);
  NodeId v3 = tp.mul(w3, t);
  NodeId v4 = tp.mul(w4, t);
  NodeId v5 = tp.add(v1, v3);
  NodeId v6 = tp.add(v2, v4);
  NodeId v7 = tp.sigmoid(v5);
  NodeId w5 = tp.input(weight_init);
  NodeId w6 = tp.input(weight_init);
  NodeId v8 = tp.sigmoid(v6);
  NodeId v9 = tp.mul(v7, w5);
  NodeId v10 = tp.mul(v8, w6);
  g.yhat = tp.add(v9, v10);
  g.trace_rows = {{"w1", w1}, {"x", x},   {"w2", w2}, {"w3", w3}, {"t", t},
                  {"w4", w4}, {"v1", v1}, {"v2", v2}, {"v3", v3}, {"v4", v4},
                  {"v5", v5}, {"v6", v6}, {"v7", v7}, {"w5", w5}, {"w6", w6},
                  {"v8", v8}, {"v9", v9}, {"v10", v10}, {"yhat", g.yhat}};
  return g;
}

}  // namespace svann::ad
