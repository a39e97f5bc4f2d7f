#include "uncha/autodiff.hpp"

#include <cmath>
#include <sstream>

namespace uncha::ad {

const char* op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kConst: return "const";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kDiv: return "div";
    case Op::kAtan2: return "atan2";
    case Op::kAddC: return "add_const";
    case Op::kMulC: return "mul_const";
    case Op::kDivC: return "div_const";
    case Op::kRSubC: return "const_sub";
    case Op::kRDivC: return "const_div";
    case Op::kNeg: return "neg";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kSqrt: return "sqrt";
    case Op::kCosh: return "cosh";
    case Op::kSinh: return "sinh";
    case Op::kSinhc: return "sinhc";
    case Op::kAsinh: return "asinh";
    case Op::kAcosh: return "acosh";
    case Op::kAsin: return "asin";
    case Op::kAcos: return "acos";
    case Op::kSoftplus: return "softplus";
    case Op::kHinge: return "hinge";
    case Op::kClamp: return "clamp";
    case Op::kStopGradient: return "stop_gradient";
    case Op::kSum: return "sum";
    case Op::kLogSumExp: return "log_sum_exp";
    case Op::kDot: return "dot";
    case Op::kDotConst: return "dot_const";
    case Op::kSquaredDistance: return "squared_distance";
  }
  return "?";
}

double Var::value() const { return tape_->value(*this); }

std::uint32_t Tape::push(Node node, double value) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(node);
  values_.push_back(value);
  return id;
}

void Tape::check_owner(Var v) const {
  if (v.tape() != this) throw ContractError("autodiff: Var used with a foreign tape");
}

Var Tape::variable(double v) { return Var(this, push({Op::kLeaf, 0, 0, 0.0, 0.0}, v)); }

Var Tape::constant(double v) { return Var(this, push({Op::kConst, 0, 0, 0.0, 0.0}, v)); }

void Tape::clear() {
  nodes_.clear();
  values_.clear();
  args_.clear();
  consts_.clear();
  stop_count_ = 0;
}

void Tape::freeze_stop_gradients(std::vector<double> values) {
  frozen_ = std::move(values);
  stop_count_ = 0;
}

void Tape::unfreeze_stop_gradients() { frozen_.reset(); }

std::vector<double> Tape::stop_gradient_values() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (nodes_[k].op == Op::kStopGradient) out.push_back(values_[k]);
  }
  return out;
}

Var Tape::unary(Op op, Var a, double aux0, double aux1) {
  check_owner(a);
  const double x = values_[a.id()];
  double y = 0.0;
  switch (op) {
    case Op::kAddC: y = x + aux0; break;
    case Op::kMulC: y = x * aux0; break;
    case Op::kDivC: y = x / aux0; break;
    case Op::kRSubC: y = aux0 - x; break;
    case Op::kRDivC: y = aux0 / x; break;
    case Op::kNeg: y = -x; break;
    case Op::kExp: y = std::exp(x); break;
    case Op::kLog: y = std::log(x); break;
    case Op::kSqrt: y = std::sqrt(x); break;
    case Op::kCosh: y = std::cosh(x); break;
    case Op::kSinh: y = std::sinh(x); break;
    case Op::kSinhc: y = prim::sinhc(x); break;
    case Op::kAsinh: y = std::asinh(x); break;
    case Op::kAcosh: y = prim::acosh_checked(x, aux0); break;
    case Op::kAsin: y = prim::asin_clamped(x); break;
    case Op::kAcos: y = prim::acos_checked(x, aux0); break;
    case Op::kSoftplus: y = prim::softplus(x); break;
    case Op::kHinge: y = x > 0.0 ? x : 0.0; break;
    case Op::kClamp: y = std::clamp(x, aux0, aux1); break;
    case Op::kStopGradient:
      if (frozen_) {
        require(stop_count_ < frozen_->size(), "autodiff: more stop-gradient nodes than frozen values");
        y = (*frozen_)[stop_count_];
      } else {
        y = x;
      }
      ++stop_count_;
      break;
    default: throw ContractError(std::string("autodiff: not a unary op: ") + op_name(op));
  }
  return Var(this, push({op, a.id(), 0, aux0, aux1}, y));
}

Var Tape::binary(Op op, Var a, Var b) {
  check_owner(a);
  check_owner(b);
  const double x = values_[a.id()];
  const double z = values_[b.id()];
  double y = 0.0;
  switch (op) {
    case Op::kAdd: y = x + z; break;
    case Op::kSub: y = x - z; break;
    case Op::kMul: y = x * z; break;
    case Op::kDiv: y = x / z; break;
    case Op::kAtan2: y = std::atan2(x, z); break;
    default: throw ContractError(std::string("autodiff: not a binary op: ") + op_name(op));
  }
  return Var(this, push({op, a.id(), b.id(), 0.0, 0.0}, y));
}

Var Tape::nary(Op op, std::span<const Var> xs) {
  if (xs.empty()) throw ContractError(std::string("autodiff: empty argument list for ") + op_name(op));
  const auto offset = static_cast<std::uint32_t>(args_.size());
  double y = 0.0;
  if (op == Op::kSum) {
    for (const Var& v : xs) {
      check_owner(v);
      args_.push_back(v.id());
      y += values_[v.id()];
    }
  } else if (op == Op::kLogSumExp) {
    std::vector<double> vals;
    vals.reserve(xs.size());
    for (const Var& v : xs) {
      check_owner(v);
      args_.push_back(v.id());
      vals.push_back(values_[v.id()]);
    }
    y = prim::log_sum_exp(vals);
  } else {
    throw ContractError(std::string("autodiff: not an n-ary op: ") + op_name(op));
  }
  return Var(this, push({op, offset, static_cast<std::uint32_t>(xs.size()), 0.0, 0.0}, y));
}

Var Tape::dot(std::span<const Var> a, std::span<const Var> b) {
  require(a.size() == b.size(), "dot: dimension mismatch");
  require(!a.empty(), "dot: empty vectors");
  const auto offset = static_cast<std::uint32_t>(args_.size());
  double y = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    check_owner(a[k]);
    check_owner(b[k]);
    y += values_[a[k].id()] * values_[b[k].id()];
  }
  for (const Var& v : a) args_.push_back(v.id());
  for (const Var& v : b) args_.push_back(v.id());
  return Var(this, push({Op::kDot, offset, static_cast<std::uint32_t>(a.size()), 0.0, 0.0}, y));
}

Var Tape::dot(std::span<const Var> a, std::span<const double> c) {
  require(a.size() == c.size(), "dot: dimension mismatch");
  require(!a.empty(), "dot: empty vectors");
  const auto offset = static_cast<std::uint32_t>(args_.size());
  const auto coffset = static_cast<double>(consts_.size());
  double y = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    check_owner(a[k]);
    y += values_[a[k].id()] * c[k];
    args_.push_back(a[k].id());
    consts_.push_back(c[k]);
  }
  return Var(this, push({Op::kDotConst, offset, static_cast<std::uint32_t>(a.size()), coffset, 0.0}, y));
}

Var Tape::squared_distance(std::span<const Var> a, std::span<const Var> b) {
  require(a.size() == b.size(), "squared_distance: dimension mismatch");
  require(!a.empty(), "squared_distance: empty vectors");
  const auto offset = static_cast<std::uint32_t>(args_.size());
  double y = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    check_owner(a[k]);
    check_owner(b[k]);
    const double d = values_[a[k].id()] - values_[b[k].id()];
    y += d * d;
  }
  for (const Var& v : a) args_.push_back(v.id());
  for (const Var& v : b) args_.push_back(v.id());
  return Var(this, push({Op::kSquaredDistance, offset, static_cast<std::uint32_t>(a.size()), 0.0, 0.0}, y));
}

std::vector<double> Tape::backward(Var root) const {
  check_owner(root);
  std::vector<double> adj(nodes_.size(), 0.0);
  adj[root.id()] = 1.0;
  for (std::uint32_t id = root.id() + 1; id-- > 0;) {
    const double g = adj[id];
    if (g == 0.0) continue;
    if (!std::isfinite(g)) {
      std::ostringstream os;
      os << "non-finite gradient at node #" << id << " (" << op_name(nodes_[id].op) << ")";
      throw NumericalError(os.str());
    }
    const Node& n = nodes_[id];
    const double y = values_[id];
    const double x = (n.op == Op::kLeaf || n.op == Op::kConst || n.op == Op::kSum || n.op == Op::kLogSumExp ||
                      n.op == Op::kDot || n.op == Op::kDotConst || n.op == Op::kSquaredDistance)
                         ? 0.0
                         : values_[n.a];
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConst:
      case Op::kStopGradient:
        break;
      case Op::kAdd:
        adj[n.a] += g;
        adj[n.b] += g;
        break;
      case Op::kSub:
        adj[n.a] += g;
        adj[n.b] -= g;
        break;
      case Op::kMul:
        adj[n.a] += g * values_[n.b];
        adj[n.b] += g * x;
        break;
      case Op::kDiv: {
        const double z = values_[n.b];
        adj[n.a] += g / z;
        adj[n.b] -= g * x / (z * z);
        break;
      }
      case Op::kAtan2: {
        // Zero at the undefined point (0, 0).
        const double z = values_[n.b];
        const double r2 = x * x + z * z;
        if (r2 > 0.0) {
          adj[n.a] += g * z / r2;
          adj[n.b] -= g * x / r2;
        }
        break;
      }
      case Op::kAddC: adj[n.a] += g; break;
      case Op::kMulC: adj[n.a] += g * n.aux0; break;
      case Op::kDivC: adj[n.a] += g / n.aux0; break;
      case Op::kRSubC: adj[n.a] -= g; break;
      case Op::kRDivC: adj[n.a] -= g * n.aux0 / (x * x); break;
      case Op::kNeg: adj[n.a] -= g; break;
      case Op::kExp: adj[n.a] += g * y; break;
      case Op::kLog: adj[n.a] += g / x; break;
      case Op::kSqrt:
        // Subgradient 0 at the origin of the norm.
        if (x > 0.0) adj[n.a] += g * 0.5 / y;
        break;
      case Op::kCosh: adj[n.a] += g * std::sinh(x); break;
      case Op::kSinh: adj[n.a] += g * std::cosh(x); break;
      case Op::kSinhc: adj[n.a] += g * prim::sinhc_derivative(x); break;
      case Op::kAsinh: adj[n.a] += g / std::sqrt(x * x + 1.0); break;
      case Op::kAcosh:
        if (x > 1.0) adj[n.a] += g / std::sqrt((x - 1.0) * (x + 1.0));
        break;
      case Op::kAsin:
        if (std::abs(x) < 1.0) adj[n.a] += g / std::sqrt((1.0 - x) * (1.0 + x));
        break;
      case Op::kAcos:
        if (std::abs(x) < 1.0) adj[n.a] -= g / std::sqrt((1.0 - x) * (1.0 + x));
        break;
      case Op::kSoftplus: adj[n.a] += g * prim::sigmoid(x); break;
      case Op::kHinge:
        if (x > 0.0) adj[n.a] += g;
        break;
      case Op::kClamp:
        if (x > n.aux0 && x < n.aux1) adj[n.a] += g;
        break;
      case Op::kSum:
        for (std::uint32_t k = 0; k < n.b; ++k) adj[args_[n.a + k]] += g;
        break;
      case Op::kLogSumExp:
        for (std::uint32_t k = 0; k < n.b; ++k) {
          const std::uint32_t arg = args_[n.a + k];
          adj[arg] += g * std::exp(values_[arg] - y);
        }
        break;
      case Op::kDot:
        for (std::uint32_t k = 0; k < n.b; ++k) {
          const std::uint32_t ia = args_[n.a + k];
          const std::uint32_t ib = args_[n.a + n.b + k];
          adj[ia] += g * values_[ib];
          adj[ib] += g * values_[ia];
        }
        break;
      case Op::kDotConst: {
        const auto coffset = static_cast<std::size_t>(n.aux0);
        for (std::uint32_t k = 0; k < n.b; ++k) adj[args_[n.a + k]] += g * consts_[coffset + k];
        break;
      }
      case Op::kSquaredDistance:
        for (std::uint32_t k = 0; k < n.b; ++k) {
          const std::uint32_t ia = args_[n.a + k];
          const std::uint32_t ib = args_[n.a + n.b + k];
          const double d = 2.0 * g * (values_[ia] - values_[ib]);
          adj[ia] += d;
          adj[ib] -= d;
        }
        break;
    }
    // Name the node whose local derivative produced a non-finite adjoint.
    const auto fail = [&](std::uint32_t input) {
      if (std::isfinite(adj[input])) return;
      std::ostringstream os;
      os << "non-finite gradient produced by node #" << id << " (" << op_name(n.op) << ") at input #" << input;
      throw NumericalError(os.str());
    };
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConst:
      case Op::kStopGradient:
        break;
      case Op::kAdd:
      case Op::kSub:
      case Op::kMul:
      case Op::kDiv:
      case Op::kAtan2:
        fail(n.a);
        fail(n.b);
        break;
      case Op::kSum:
      case Op::kLogSumExp:
      case Op::kDotConst:
        for (std::uint32_t k = 0; k < n.b; ++k) fail(args_[n.a + k]);
        break;
      case Op::kDot:
      case Op::kSquaredDistance:
        for (std::uint32_t k = 0; k < 2 * n.b; ++k) fail(args_[n.a + k]);
        break;
      default:
        fail(n.a);
        break;
    }
  }
  return adj;
}

namespace {

bool is_kink_op(Op op) {
  return op == Op::kHinge || op == Op::kClamp || op == Op::kAcosh || op == Op::kAcos || op == Op::kAsin ||
         op == Op::kSqrt;
}

}  // namespace

std::vector<std::uint8_t> Tape::kink_signature() const {
  std::vector<std::uint8_t> sig;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    if (!is_kink_op(n.op)) continue;
    const double x = values_[n.a];
    std::uint8_t side = 0;
    switch (n.op) {
      case Op::kHinge: side = x > 0.0; break;
      case Op::kSqrt: side = x > 0.0; break;
      case Op::kAcosh: side = x > 1.0; break;
      case Op::kClamp: side = static_cast<std::uint8_t>(x <= n.aux0 ? 0 : (x >= n.aux1 ? 2 : 1)); break;
      default: side = static_cast<std::uint8_t>(x <= -1.0 ? 0 : (x >= 1.0 ? 2 : 1)); break;
    }
    sig.push_back(side);
  }
  return sig;
}

std::size_t Tape::kinks_within(double band) const {
  std::size_t count = 0;
  for (const Node& n : nodes_) {
    if (!is_kink_op(n.op)) continue;
    const double x = values_[n.a];
    bool near = false;
    switch (n.op) {
      case Op::kHinge:
      case Op::kSqrt: near = std::abs(x) < band; break;
      case Op::kAcosh: near = std::abs(x - 1.0) < band; break;
      case Op::kClamp: near = std::abs(x - n.aux0) < band || std::abs(x - n.aux1) < band; break;
      default: near = std::abs(std::abs(x) - 1.0) < band; break;
    }
    count += near;
  }
  return count;
}

Var operator+(Var a, Var b) { return a.tape()->binary(Op::kAdd, a, b); }
Var operator-(Var a, Var b) { return a.tape()->binary(Op::kSub, a, b); }
Var operator*(Var a, Var b) { return a.tape()->binary(Op::kMul, a, b); }
Var operator/(Var a, Var b) { return a.tape()->binary(Op::kDiv, a, b); }
Var atan2(Var y, Var x) { return y.tape()->binary(Op::kAtan2, y, x); }
Var operator-(Var a) { return a.tape()->unary(Op::kNeg, a); }
Var operator+(Var a, double c) { return a.tape()->unary(Op::kAddC, a, c); }
Var operator+(double c, Var a) { return a.tape()->unary(Op::kAddC, a, c); }
Var operator-(Var a, double c) { return a.tape()->unary(Op::kAddC, a, -c); }
Var operator-(double c, Var a) { return a.tape()->unary(Op::kRSubC, a, c); }
Var operator*(Var a, double c) { return a.tape()->unary(Op::kMulC, a, c); }
Var operator*(double c, Var a) { return a.tape()->unary(Op::kMulC, a, c); }
Var operator/(Var a, double c) { return a.tape()->unary(Op::kDivC, a, c); }
Var operator/(double c, Var a) { return a.tape()->unary(Op::kRDivC, a, c); }

Var exp(Var x) { return x.tape()->unary(Op::kExp, x); }
Var log(Var x) { return x.tape()->unary(Op::kLog, x); }
Var sqrt(Var x) { return x.tape()->unary(Op::kSqrt, x); }
Var cosh(Var x) { return x.tape()->unary(Op::kCosh, x); }
Var sinh(Var x) { return x.tape()->unary(Op::kSinh, x); }
Var asinh(Var x) { return x.tape()->unary(Op::kAsinh, x); }
Var sinhc(Var x) { return x.tape()->unary(Op::kSinhc, x); }
Var softplus(Var x) { return x.tape()->unary(Op::kSoftplus, x); }
Var hinge(Var x) { return x.tape()->unary(Op::kHinge, x); }
Var clamp(Var x, double lo, double hi) { return x.tape()->unary(Op::kClamp, x, lo, hi); }
Var stop_gradient(Var x) { return x.tape()->unary(Op::kStopGradient, x); }
Var acosh_checked(Var x, double budget) { return x.tape()->unary(Op::kAcosh, x, budget); }
Var acos_checked(Var x, double budget) { return x.tape()->unary(Op::kAcos, x, budget); }
Var asin_clamped(Var x) { return x.tape()->unary(Op::kAsin, x); }

Var sum(std::span<const Var> xs) {
  require(!xs.empty(), "sum: empty argument list");
  return xs.front().tape()->nary(Op::kSum, xs);
}

Var log_sum_exp(std::span<const Var> xs) {
  require(!xs.empty(), "log_sum_exp of an empty set");
  return xs.front().tape()->nary(Op::kLogSumExp, xs);
}

Var dot(std::span<const Var> a, std::span<const Var> b) {
  require(!a.empty(), "dot: empty vectors");
  return a.front().tape()->dot(a, b);
}

Var dot(std::span<const Var> a, std::span<const double> c) {
  require(!a.empty(), "dot: empty vectors");
  return a.front().tape()->dot(a, c);
}

Var squared_distance(std::span<const Var> a, std::span<const Var> b) {
  require(!a.empty(), "squared_distance: empty vectors");
  return a.front().tape()->squared_distance(a, b);
}

}  // namespace uncha::ad
