#include "qdgd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "qdgd/errors.hpp"
#include "qdgd/random.hpp"

namespace qdgd {

bool is_connected(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  if (n == 0) return false;
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (auto v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == n;
}

NetworkTopology::NetworkTopology(std::size_t n,
                                 std::vector<std::pair<std::size_t, std::size_t>> edges)
    : neighbors_(n) {
  if (n == 0) throw Error("topology needs at least one agent");
  std::set<Edge> unique;
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) throw Error("edge endpoint out of range");
    if (a == b) throw Error("self-loop on agent " + std::to_string(a));
    Edge e{std::min(a, b), std::max(a, b)};
    if (!unique.insert(e).second) {
      throw Error("duplicate edge " + std::to_string(e.u) + "-" + std::to_string(e.v));
    }
  }
  if (!is_connected(n, edges)) throw Error("graph is not connected");
  edges_.assign(unique.begin(), unique.end());
  for (const auto& e : edges_) {
    neighbors_[e.u].push_back(e.v);
    neighbors_[e.v].push_back(e.u);
  }
  for (auto& list : neighbors_) std::sort(list.begin(), list.end());
}

bool NetworkTopology::adjacent(std::size_t a, std::size_t b) const {
  const auto& list = neighbors(a);
  return std::binary_search(list.begin(), list.end(), b);
}

NetworkTopology generate_random_connected_graph(std::size_t n, double edge_probability,
                                                std::uint64_t seed,
                                                std::size_t retry_limit) {
  if (n < 2) throw Error("random graph needs n >= 2");
  if (!(edge_probability > 0.0 && edge_probability <= 1.0)) {
    throw Error("edge probability must lie in (0, 1]");
  }
  std::mt19937_64 gen(seed);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t attempt = 0; attempt < retry_limit; ++attempt) {
    edges.clear();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (to_unit(gen()) < edge_probability) edges.emplace_back(i, j);
      }
    }
    if (is_connected(n, edges)) return NetworkTopology(n, std::move(edges));
  }
  throw Error("could not sample connected graph");
}

void write_edge_list(std::ostream& out, const NetworkTopology& topology) {
  out << topology.size() << ' ' << topology.edges().size() << '\n';
  for (const auto& e : topology.edges()) out << e.u << ' ' << e.v << '\n';
}

NetworkTopology read_edge_list(std::istream& in) {
  std::size_t n = 0;
  std::size_t m = 0;
  if (!(in >> n >> m)) throw Error("edge list: missing \"n m\" header");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(m);
  for (std::size_t e = 0; e < m; ++e) {
    long long a = -1;
    long long b = -1;
    if (!(in >> a >> b)) throw Error("edge list: expected " + std::to_string(m) + " edges");
    if (a < 0 || b < 0) throw Error("edge list: negative agent index");
    edges.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  }
  return NetworkTopology(n, std::move(edges));
}

MixingMatrix::MixingMatrix(Eigen::MatrixXd entries, const NetworkTopology& topology)
    : entries_(std::move(entries)) {
  const auto n = topology.size();
  if (static_cast<std::size_t>(entries_.rows()) != n ||
      static_cast<std::size_t>(entries_.cols()) != n) {
    throw Error("mixing matrix size does not match topology");
  }
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    double col = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = entries_(i, j);
      if (a < 0.0 || a > 1.0) throw Error("mixing weight outside [0, 1]");
      if (a != entries_(j, i)) throw Error("mixing matrix is not symmetric");
      if (i != j && a != 0.0 && !topology.adjacent(i, j)) {
        throw Error("mixing weight on a non-edge");
      }
      row += a;
      col += entries_(j, i);
    }
    if (std::abs(row - 1.0) > kStochasticTolerance || std::abs(col - 1.0) > kStochasticTolerance) {
      throw Error("mixing matrix is not doubly stochastic");
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(entries_, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("eigen-solve failed");
  eigenvalues_ = solver.eigenvalues().reverse();
  if (eigenvalues_(eigenvalues_.size() - 1) < -kEigenTolerance) {
    throw Error("mixing matrix has a negative eigenvalue");
  }
  sigma2_ = n > 1 ? eigenvalues_(1) : 0.0;
  if (sigma2_ >= 1.0 - 1e-12) throw Error("disconnected or periodic mixing");
}

MixingMatrix lazy_metropolis(const NetworkTopology& topology) {
  const auto n = topology.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : topology.edges()) {
    const double w =
        1.0 / (2.0 * static_cast<double>(std::max(topology.degree(e.u), topology.degree(e.v))));
    a(e.u, e.v) = w;
    a(e.v, e.u) = w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (auto j : topology.neighbors(i)) off += a(i, j);
    a(i, i) = 1.0 - off;
  }
  return MixingMatrix(std::move(a), topology);
}

double spectral_gap(double sigma2) {
  if (sigma2 >= 1.0 - 1e-12) throw Error("disconnected or periodic mixing");
  return 1.0 - sigma2;
}

double spectral_gap(const MixingMatrix& matrix) { return spectral_gap(matrix.sigma2()); }

}  // namespace qdgd
