#pragma once

// Reverse-mode gradient tape over the fixed operation vocabulary used by the
// geometry and the losses. Values live in one flat node array; a backward pass
// walks it once in reverse creation order.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uncha/scalar.hpp"

namespace uncha::ad {

enum class Op : std::uint8_t {
  kLeaf,
  kConst,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kAtan2,
  kAddC,
  kMulC,
  kDivC,
  kRSubC,
  kRDivC,
  kNeg,
  kExp,
  kLog,
  kSqrt,
  kCosh,
  kSinh,
  kSinhc,
  kAsinh,
  kAcosh,
  kAsin,
  kAcos,
  kSoftplus,
  kHinge,
  kClamp,
  kStopGradient,
  kSum,
  kLogSumExp,
  kDot,
  kDotConst,
  kSquaredDistance,
};

const char* op_name(Op op);

class Tape;

/// Handle to one scalar node on a tape. Cheap to copy; only valid while the
/// tape that created it is alive and has not been cleared.
class Var {
 public:
  Var() = default;

  double value() const;
  std::uint32_t id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

inline double value(const Var& v) { return v.value(); }

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var variable(double v);
  Var constant(double v);

  /// Drops all nodes but keeps capacity; previously issued Vars become invalid.
  void clear();
  std::size_t size() const { return nodes_.size(); }

  double value(Var v) const { return values_[v.id()]; }
  Op op(std::uint32_t id) const { return nodes_[id].op; }

  Var unary(Op op, Var a, double aux0 = 0.0, double aux1 = 0.0);
  Var binary(Op op, Var a, Var b);
  Var nary(Op op, std::span<const Var> xs);
  Var dot(std::span<const Var> a, std::span<const Var> b);
  Var dot(std::span<const Var> a, std::span<const double> c);
  /// sum_k (a_k - b_k)^2 as one node.
  Var squared_distance(std::span<const Var> a, std::span<const Var> b);

  /// Adjoint of `root` with respect to every node, indexed by node id.
  /// Throws NumericalError naming the first node whose adjoint is not finite.
  std::vector<double> backward(Var root) const;

  /// Outputs of the stop-gradient nodes, in creation order.
  std::vector<double> stop_gradient_values() const;

  /// While frozen, the k-th stop-gradient node created outputs values[k]
  /// instead of its input. Finite-difference checks use this to hold the
  /// blocked factors at their base values. clear() restarts the count.
  void freeze_stop_gradients(std::vector<double> values);
  void unfreeze_stop_gradients();

  /// One entry per kink-bearing node (hinge, clamp, acosh, acos, asin, sqrt):
  /// which side of the kink its input currently sits on. Two evaluations with
  /// equal signatures are on the same smooth piece.
  std::vector<std::uint8_t> kink_signature() const;

  /// Number of kink-bearing nodes whose input lies within `band` of a kink.
  std::size_t kinks_within(double band) const;

 private:
  struct Node {
    Op op;
    std::uint32_t a;
    std::uint32_t b;
    double aux0;
    double aux1;
  };

  std::uint32_t push(Node node, double value);
  void check_owner(Var v) const;

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<std::uint32_t> args_;
  std::vector<double> consts_;
  std::optional<std::vector<double>> frozen_;
  std::size_t stop_count_ = 0;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double c);
Var operator+(double c, Var a);
Var operator-(Var a, double c);
Var operator-(double c, Var a);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator/(Var a, double c);
Var operator/(double c, Var a);

Var exp(Var x);
Var log(Var x);
Var sqrt(Var x);
Var cosh(Var x);
Var sinh(Var x);
Var asinh(Var x);
Var sinhc(Var x);
Var softplus(Var x);
Var hinge(Var x);
Var clamp(Var x, double lo, double hi);
Var stop_gradient(Var x);
Var acosh_checked(Var x, double budget);
Var acos_checked(Var x, double budget);
Var atan2(Var y, Var x);
Var asin_clamped(Var x);
Var sum(std::span<const Var> xs);
Var log_sum_exp(std::span<const Var> xs);
Var dot(std::span<const Var> a, std::span<const Var> b);
Var dot(std::span<const Var> a, std::span<const double> c);
Var squared_distance(std::span<const Var> a, std::span<const Var> b);

}  // namespace uncha::ad
