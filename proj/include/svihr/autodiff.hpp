#pragma once

// Scalar computation-graph engine: reverse-mode gradients over a recorded
// tape, plus forward tangent propagation whose tangent values are themselves
// tape nodes. Seeding the time input with tangent 1 and the weights with
// tangent 0 makes d(output)/dt available as an ordinary node, so a single
// reverse sweep differentiates expressions containing time derivatives with
// respect to the weights (forward-over-reverse).

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "svihr/errors.hpp"

namespace svihr::ad {

enum class Op : std::uint8_t {
  Constant,
  Leaf,
  Add,
  AddConst,
  Sub,
  Mul,
  Div,
  Tanh,
  Exp,
  Square,
  Scale,
  OneMinusSquare,  // internal, used for tanh tangents
};

inline const char* op_name(Op op) {
  switch (op) {
    case Op::Constant: return "const";
    case Op::Leaf: return "leaf";
    case Op::Add: return "add";
    case Op::AddConst: return "add-const";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Tanh: return "tanh";
    case Op::Exp: return "exp";
    case Op::Square: return "square";
    case Op::Scale: return "scale";
    case Op::OneMinusSquare: return "one-minus-square";
  }
  return "?";
}

class Tape;

// Handle to one tape node. Only combinable with Vars of the same tape.
class Var {
 public:
  Var() = default;

  double value() const;
  bool has_tangent() const;
  // The node carrying d(value)/d(seed direction). Throws if untracked.
  Var tangent() const;
  double tangent_value() const { return tangent().value(); }

  std::int32_t index() const { return index_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::int32_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::int32_t index_ = -1;
};

class Tape {
 public:
  struct Node {
    double value = 0;
    double d1 = 0, d2 = 0;          // local partials w.r.t. parents
    std::int32_t p1 = -1, p2 = -1;  // parent indices, always < own index
    std::int32_t tangent = -1;      // node holding the forward tangent, or -1
    Op op = Op::Constant;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t size() const { return nodes_.size(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }
  const std::vector<Node>& nodes() const { return nodes_; }

  // Drops all nodes but keeps the allocation.
  void clear() {
    nodes_.clear();
    zero_ = one_ = -1;
  }

  // Input node. `tangent` is the seed of the forward sweep: 1 for the
  // variable we differentiate along (time), 0 for everything else.
  Var leaf(double value, double tangent) {
    if (!std::isfinite(value)) throw NumericError("non-finite leaf");
    std::int32_t i = record(Op::Leaf, value);
    nodes_[i].tangent = tangent_constant(tangent);
    return Var(this, i);
  }

  Var constant(double value) {
    if (!std::isfinite(value)) throw NumericError("non-finite leaf");
    std::int32_t i = tangent_constant(value);  // reuses cached 0/1 nodes
    nodes_[i].tangent = zero();
    return Var(this, i);
  }

  Var add(Var a, Var b) {
    check_same(a, b);
    std::int32_t i = record(Op::Add, val(a) + val(b), a.index_, 1.0, b.index_, 1.0);
    set_tangent(i, tan_add(tan(a), tan(b)));
    return Var(this, i);
  }

  Var add_const(Var a, double c) {
    check_mine(a);
    std::int32_t i = record(Op::AddConst, val(a) + c, a.index_, 1.0);
    nodes_[i].tangent = node_tan(a.index_);  // d(x+c) = dx
    return Var(this, i);
  }

  Var sub(Var a, Var b) {
    check_same(a, b);
    std::int32_t i = record(Op::Sub, val(a) - val(b), a.index_, 1.0, b.index_, -1.0);
    set_tangent(i, tan_sub(tan(a), tan(b)));
    return Var(this, i);
  }

  Var mul(Var a, Var b) {
    check_same(a, b);
    std::int32_t i = record(Op::Mul, val(a) * val(b), a.index_, val(b), b.index_, val(a));
    std::int32_t ta = tan(a), tb = tan(b);
    if (ta >= 0 && tb >= 0)
      set_tangent(i, tan_add(tan_mul(ta, b.index_), tan_mul(a.index_, tb)));
    return Var(this, i);
  }

  Var div(Var a, Var b) {
    check_same(a, b);
    if (val(b) == 0.0) throw NumericError("singular division");
    double q = val(a) / val(b);
    std::int32_t i =
        record(Op::Div, q, a.index_, 1.0 / val(b), b.index_, -q / val(b));
    std::int32_t ta = tan(a), tb = tan(b);
    if (ta >= 0 && tb >= 0) {
      // d(a/b) = (da - q*db) / b
      std::int32_t num = tan_sub(ta, tan_mul(i, tb));
      set_tangent(i, num == zero() ? zero() : raw_div(num, b.index_));
    }
    return Var(this, i);
  }

  Var tanh(Var a) {
    check_mine(a);
    double v = std::tanh(val(a));
    std::int32_t i = record(Op::Tanh, v, a.index_, 1.0 - v * v);
    std::int32_t ta = tan(a);
    if (ta >= 0) {
      if (ta == zero()) {
        nodes_[i].tangent = zero();
      } else {
        std::int32_t oms =
            record(Op::OneMinusSquare, 1.0 - v * v, i, -2.0 * v);
        set_tangent(i, tan_mul(ta, oms));
      }
    }
    return Var(this, i);
  }

  Var exp(Var a) {
    check_mine(a);
    double v = std::exp(val(a));
    std::int32_t i = record(Op::Exp, v, a.index_, v);
    std::int32_t ta = tan(a);
    if (ta >= 0) set_tangent(i, tan_mul(ta, i));
    return Var(this, i);
  }

  Var square(Var a) {
    check_mine(a);
    double v = val(a);
    std::int32_t i = record(Op::Square, v * v, a.index_, 2.0 * v);
    std::int32_t ta = tan(a);
    if (ta >= 0) set_tangent(i, tan_scale(tan_mul(a.index_, ta), 2.0));
    return Var(this, i);
  }

  Var scale(Var a, double c) {
    check_mine(a);
    std::int32_t i = record(Op::Scale, c * val(a), a.index_, c);
    std::int32_t ta = tan(a);
    if (ta >= 0) set_tangent(i, tan_scale(ta, c));
    return Var(this, i);
  }

  // Single reverse sweep from `output`; adjoint of output is 1. Returns the
  // adjoint of every node with index <= output.index(). The tape itself is
  // unchanged, so sweeps can be repeated from any node.
  std::vector<double> backward(Var output) const {
    check_mine(output);
    std::int32_t n = output.index_;
    for (std::int32_t i = 0; i <= n; ++i) {
      if (!std::isfinite(nodes_[i].value))
        throw NumericError(std::string("non-finite value in graph (") +
                           op_name(nodes_[i].op) + " node " +
                           std::to_string(i) + ")");
    }
    std::vector<double> adj(static_cast<std::size_t>(n) + 1, 0.0);
    adj[n] = 1.0;
    for (std::int32_t i = n; i >= 0; --i) {
      double a = adj[i];
      if (a == 0.0) continue;
      const Node& nd = nodes_[i];
      if (nd.p1 >= 0) adj[nd.p1] += a * nd.d1;
      if (nd.p2 >= 0) adj[nd.p2] += a * nd.d2;
    }
    return adj;
  }

  double value_of(std::int32_t index) const { return nodes_[index].value; }

 private:
  friend class Var;

  std::int32_t record(Op op, double value, std::int32_t p1 = -1, double d1 = 0,
                      std::int32_t p2 = -1, double d2 = 0) {
    Node nd;
    nd.op = op;
    nd.value = value;
    nd.p1 = p1;
    nd.d1 = d1;
    nd.p2 = p2;
    nd.d2 = d2;
    nodes_.push_back(nd);
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  std::int32_t zero() {
    if (zero_ < 0) {
      zero_ = record(Op::Constant, 0.0);
      nodes_[zero_].tangent = zero_;
    }
    return zero_;
  }

  std::int32_t one() {
    if (one_ < 0) {
      one_ = record(Op::Constant, 1.0);
      nodes_[one_].tangent = zero();
    }
    return one_;
  }

  std::int32_t tangent_constant(double v) {
    if (v == 0.0) return zero();
    if (v == 1.0) return one();
    std::int32_t i = record(Op::Constant, v);
    nodes_[i].tangent = zero();
    return i;
  }

  double val(Var a) const { return nodes_[a.index_].value; }
  std::int32_t tan(Var a) const { return nodes_[a.index_].tangent; }
  std::int32_t node_tan(std::int32_t i) const { return nodes_[i].tangent; }

  void set_tangent(std::int32_t node, std::int32_t tangent) {
    nodes_[node].tangent = tangent;
  }

  // Raw recorders for tangent expressions. They do not propagate tangents of
  // their own (second-order forward is out of scope; mixed second order is
  // reached by a reverse sweep from a tangent node).
  std::int32_t raw_add(std::int32_t a, std::int32_t b) {
    return record(Op::Add, nodes_[a].value + nodes_[b].value, a, 1.0, b, 1.0);
  }
  std::int32_t raw_sub(std::int32_t a, std::int32_t b) {
    return record(Op::Sub, nodes_[a].value - nodes_[b].value, a, 1.0, b, -1.0);
  }
  std::int32_t raw_mul(std::int32_t a, std::int32_t b) {
    return record(Op::Mul, nodes_[a].value * nodes_[b].value, a,
                  nodes_[b].value, b, nodes_[a].value);
  }
  std::int32_t raw_div(std::int32_t a, std::int32_t b) {
    if (nodes_[b].value == 0.0) throw NumericError("singular division");
    double q = nodes_[a].value / nodes_[b].value;
    return record(Op::Div, q, a, 1.0 / nodes_[b].value, b, -q / nodes_[b].value);
  }

  // Zero/one-aware combinators keep tangent graphs small: weight leaves all
  // share the cached zero node, so weight-only subexpressions add no nodes.
  std::int32_t tan_add(std::int32_t a, std::int32_t b) {
    if (a < 0 || b < 0) return -1;
    if (a == zero()) return b;
    if (b == zero()) return a;
    return raw_add(a, b);
  }
  std::int32_t tan_sub(std::int32_t a, std::int32_t b) {
    if (a < 0 || b < 0) return -1;
    if (b == zero()) return a;
    if (a == zero()) return record(Op::Scale, -nodes_[b].value, b, -1.0);
    return raw_sub(a, b);
  }
  std::int32_t tan_mul(std::int32_t a, std::int32_t b) {
    if (a < 0 || b < 0) return -1;
    if (a == zero() || b == zero()) return zero();
    if (a == one()) return b;
    if (b == one()) return a;
    return raw_mul(a, b);
  }
  std::int32_t tan_scale(std::int32_t a, double c) {
    if (a < 0) return -1;
    if (a == zero() || c == 0.0) return zero();
    if (c == 1.0) return a;
    return record(Op::Scale, c * nodes_[a].value, a, c);
  }

  void check_mine(Var a) const {
    if (a.tape_ != this || a.index_ < 0 ||
        a.index_ >= static_cast<std::int32_t>(nodes_.size()))
      throw std::logic_error("TapeVar does not belong to this tape");
  }
  void check_same(Var a, Var b) const {
    check_mine(a);
    check_mine(b);
  }

  std::vector<Node> nodes_;
  std::int32_t zero_ = -1, one_ = -1;
};

inline double Var::value() const { return tape_->nodes()[index_].value; }
inline bool Var::has_tangent() const {
  return tape_->nodes()[index_].tangent >= 0;
}
inline Var Var::tangent() const {
  std::int32_t t = tape_->nodes()[index_].tangent;
  if (t < 0) throw std::logic_error("tangent not tracked for this node");
  return Var(tape_, t);
}

inline Var operator+(Var a, Var b) { return a.tape()->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape()->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape()->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.tape()->div(a, b); }
inline Var operator+(Var a, double c) { return a.tape()->add_const(a, c); }
inline Var operator+(double c, Var a) { return a.tape()->add_const(a, c); }
inline Var operator-(Var a, double c) { return a.tape()->add_const(a, -c); }
inline Var operator-(double c, Var a) {
  return a.tape()->add_const(a.tape()->scale(a, -1.0), c);
}
inline Var operator-(Var a) { return a.tape()->scale(a, -1.0); }
inline Var operator*(Var a, double c) { return a.tape()->scale(a, c); }
inline Var operator*(double c, Var a) { return a.tape()->scale(a, c); }
inline Var operator/(Var a, double c) {
  if (c == 0.0) throw NumericError("singular division");
  return a.tape()->scale(a, 1.0 / c);
}
inline Var operator/(double c, Var a) {
  return a.tape()->div(a.tape()->constant(c), a);
}
inline Var tanh(Var a) { return a.tape()->tanh(a); }
inline Var exp(Var a) { return a.tape()->exp(a); }
inline Var square(Var a) { return a.tape()->square(a); }

}  // namespace svihr::ad
