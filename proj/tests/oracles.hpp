#pragma once

// Independent reference implementations used only by the tests. They follow
// the textbook formulas directly (explicit loops, cosh/sinh forms, BFS,
// brute-force assignment, quad precision where cancellation matters) and
// share no code with the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <quadmath.h>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

/// [time, space...] layout.
inline double minkowski(const Vec& x, const Vec& y) {
  double s = -x[0] * y[0];
  for (std::size_t k = 1; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

inline double euclid_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Exponential map at the origin in cosh/sinh form.
inline Vec exp_origin(const Vec& v, double kappa) {
  const double n = euclid_norm(v);
  const double sk = std::sqrt(kappa);
  Vec out(v.size() + 1);
  out[0] = std::cosh(sk * n) / sk;
  for (std::size_t k = 0; k < v.size(); ++k) out[k + 1] = n == 0.0 ? 0.0 : std::sinh(sk * n) / (sk * n) * v[k];
  return out;
}

inline Vec origin(std::size_t n, double kappa) {
  Vec o(n + 1, 0.0);
  o[0] = 1.0 / std::sqrt(kappa);
  return o;
}

/// Quad-precision helpers: hyperboloid points are rebuilt from their space
/// component so that far-from-origin cancellations stay far below 1e-12.
using Quad = __float128;

inline std::vector<Quad> quad_point(const Vec& x, double kappa) {
  std::vector<Quad> out(x.size());
  Quad s = 0;
  for (std::size_t k = 1; k < x.size(); ++k) {
    out[k] = x[k];
    s += out[k] * out[k];
  }
  out[0] = sqrtq(s + Quad(1) / Quad(kappa));
  return out;
}

inline Quad quad_minkowski(const std::vector<Quad>& x, const std::vector<Quad>& y) {
  Quad s = -x[0] * y[0];
  for (std::size_t k = 1; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

/// Geodesic distance acosh(-kappa <x, y>) / sqrt(kappa), in quad precision.
inline double distance(const Vec& x, const Vec& y, double kappa) {
  const auto qx = quad_point(x, kappa), qy = quad_point(y, kappa);
  Quad arg = -Quad(kappa) * quad_minkowski(qx, qy);
  if (arg < 1) arg = 1;
  return static_cast<double>(acoshq(arg) / sqrtq(Quad(kappa)));
}

/// Exterior angle at p: angle, in the tangent space at p, between the
/// direction away from the origin and the direction toward q. Tangent
/// directions come from the projection y + kappa <x, y> x (the log map up to a
/// positive scale), evaluated in quad precision.
inline double exterior_angle(const Vec& p, const Vec& q, double kappa) {
  const auto qp = quad_point(p, kappa), qq = quad_point(q, kappa);
  std::vector<Quad> o(p.size(), Quad(0));
  o[0] = 1 / sqrtq(Quad(kappa));
  const Quad k = kappa;
  const Quad pq = quad_minkowski(qp, qq);
  const Quad po = quad_minkowski(qp, o);
  std::vector<Quad> to_q(p.size()), away(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    to_q[i] = qq[i] + k * pq * qp[i];
    away[i] = -(o[i] + k * po * qp[i]);
  }
  Quad c = quad_minkowski(to_q, away) / sqrtq(quad_minkowski(to_q, to_q) * quad_minkowski(away, away));
  if (c > 1) c = 1;
  if (c < -1) c = -1;
  return static_cast<double>(acosq(c));
}

/// Edge count between a and b in an undirected graph given by adjacency lists.
inline std::size_t bfs_distance(const std::vector<std::vector<std::size_t>>& adj, std::size_t a, std::size_t b) {
  std::vector<std::size_t> dist(adj.size(), std::numeric_limits<std::size_t>::max());
  std::queue<std::size_t> q;
  dist[a] = 0;
  q.push(a);
  while (!q.empty()) {
    const std::size_t v = q.front();
    q.pop();
    for (std::size_t w : adj[v]) {
      if (dist[w] == std::numeric_limits<std::size_t>::max()) {
        dist[w] = dist[v] + 1;
        q.push(w);
      }
    }
  }
  return dist[b];
}

/// Minimum-cost perfect assignment (Hungarian algorithm, O(n^3)).
inline double assignment_cost(const std::vector<Vec>& cost) {
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  Vec u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    Vec minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += cost[p[j] - 1][j - 1];
  return total;
}

/// Exact optimal-transport W_p between two uniform empirical measures: each
/// sample is replicated to the common size lcm(n, m), then solved as an
/// assignment problem.
inline double transport(const Vec& a, const Vec& b, int p) {
  const std::size_t l = std::lcm(a.size(), b.size());
  Vec ra, rb;
  for (double x : a) ra.insert(ra.end(), l / a.size(), x);
  for (double x : b) rb.insert(rb.end(), l / b.size(), x);
  std::vector<Vec> cost(l, Vec(l));
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < l; ++j) cost[i][j] = std::pow(std::abs(ra[i] - rb[j]), p);
  }
  const double c = assignment_cost(cost) / static_cast<double>(l);
  return p == 1 ? c : std::pow(c, 1.0 / p);
}

inline Vec random_vector(std::mt19937_64& rng, std::size_t n, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(n);
  for (double& x : v) x = scale * g(rng);
  return v;
}

/// Random vector with exactly the given Euclidean norm.
inline Vec random_with_norm(std::mt19937_64& rng, std::size_t n, double norm) {
  Vec v = random_vector(rng, n, 1.0);
  const double s = euclid_norm(v);
  for (double& x : v) x *= norm / s;
  return v;
}

/// Random vector orthogonal to x.
inline Vec orthogonal_to(const Vec& x, std::mt19937_64& rng) {
  Vec w = random_vector(rng, x.size(), 1.0);
  double xw = 0.0, xx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    xw += x[k] * w[k];
    xx += x[k] * x[k];
  }
  for (std::size_t k = 0; k < x.size(); ++k) w[k] -= xw / xx * x[k];
  return w;
}

/// Point reached from p ([time, space...]) by the geodesic of length t that
/// leaves p at angle theta from the outward radial direction, turning toward
/// the space direction w (w orthogonal to p's space part). Built with the
/// exponential map at p.
inline Vec shoot(const Vec& p, const Vec& w, double theta, double t, double kappa) {
  const std::size_t n = p.size() - 1;
  const Vec o = [&] {
    Vec v(n + 1, 0.0);
    v[0] = 1.0 / std::sqrt(kappa);
    return v;
  }();
  const double po = minkowski(p, o);
  Vec er(n + 1);
  for (std::size_t k = 0; k <= n; ++k) er[k] = -(o[k] + kappa * po * p[k]);
  const double er_norm = std::sqrt(minkowski(er, er));
  const double w_norm = euclid_norm(w);
  Vec d(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double perp = k == 0 ? 0.0 : w[k - 1] / w_norm;
    d[k] = std::cos(theta) * er[k] / er_norm + std::sin(theta) * perp;
  }
  const double sk = std::sqrt(kappa);
  Vec q(n + 1);
  for (std::size_t k = 0; k <= n; ++k) q[k] = std::cosh(sk * t) * p[k] + std::sinh(sk * t) / sk * d[k];
  return q;
}

/// Random rooted tree on nodes n0..n(k-1), n0 the root, with edges listed in
/// shuffled order.
struct RandomTree {
  std::vector<std::size_t> parent;  // parent[0] unused (root)
  std::vector<double> weight;
  std::vector<std::vector<std::size_t>> adj;
  std::vector<std::tuple<std::string, std::string, double>> edges;
};

inline std::string node_label(std::size_t k) { return "n" + std::to_string(k); }

inline RandomTree random_tree(std::mt19937_64& rng, std::size_t n) {
  RandomTree t;
  t.parent.assign(n, 0);
  t.weight.assign(n, 0.0);
  t.adj.assign(n, {});
  std::vector<std::tuple<std::string, std::string, double>> edges{{node_label(0), "", 1.0}};
  std::uniform_real_distribution<double> w(0.5, 2.0);
  for (std::size_t k = 1; k < n; ++k) {
    t.parent[k] = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
    t.weight[k] = w(rng);
    t.adj[k].push_back(t.parent[k]);
    t.adj[t.parent[k]].push_back(k);
    edges.emplace_back(node_label(k), node_label(t.parent[k]), t.weight[k]);
  }
  // Shuffle the edge order so the taxonomy cannot rely on parents coming first.
  std::shuffle(edges.begin(), edges.end(), rng);
  t.edges = std::move(edges);
  return t;
}

/// Weighted path length by depth-first search from a.
inline double weighted_path(const RandomTree& t, std::size_t a, std::size_t b) {
  std::vector<double> dist(t.adj.size(), -1.0);
  std::vector<std::size_t> stack{a};
  dist[a] = 0.0;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t w : t.adj[v]) {
      if (dist[w] >= 0.0) continue;
      const double edge = t.parent[w] == v && w != 0 ? t.weight[w] : t.weight[v];
      dist[w] = dist[v] + edge;
      stack.push_back(w);
    }
  }
  return dist[b];
}

inline std::set<std::size_t> ancestor_set(const RandomTree& t, std::size_t v) {
  std::set<std::size_t> s;
  for (; v != 0; v = t.parent[v]) s.insert(v);
  return s;
}

}  // namespace oracle
