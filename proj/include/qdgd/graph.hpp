#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qdgd {

/// Undirected edge stored with u < v.
struct Edge {
  std::size_t u;
  std::size_t v;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected, connected, simple graph over agents 0..n-1.
///
/// Construction validates every invariant (no self-loops, no duplicate edges,
/// indices in range, single connected component) and throws qdgd::Error
/// otherwise. Immutable afterwards.
class NetworkTopology {
 public:
  NetworkTopology(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges);

  std::size_t size() const { return neighbors_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::size_t>& neighbors(std::size_t agent) const {
    return neighbors_.at(agent);
  }
  std::size_t degree(std::size_t agent) const { return neighbors(agent).size(); }
  bool adjacent(std::size_t a, std::size_t b) const;

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

bool is_connected(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

/// Erdos-Renyi G(n, p), resampled as a whole until connected.
NetworkTopology generate_random_connected_graph(std::size_t n, double edge_probability,
                                                std::uint64_t seed,
                                                std::size_t retry_limit = 1000);

/// Edge-list text format: "n m" then m lines "i j", 0-based.
void write_edge_list(std::ostream& out, const NetworkTopology& topology);
NetworkTopology read_edge_list(std::istream& in);

/// Symmetric doubly stochastic weights together with the second largest
/// eigenvalue sigma2.
class MixingMatrix {
 public:
  /// Validates symmetry, stochasticity (1e-12), entry range and sparsity with
  /// respect to `topology`, then computes sigma2.
  MixingMatrix(Eigen::MatrixXd entries, const NetworkTopology& topology);

  const Eigen::MatrixXd& entries() const { return entries_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
  std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
  double sigma2() const { return sigma2_; }
  /// Eigenvalues sorted descending.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

 private:
  Eigen::MatrixXd entries_;
  Eigen::VectorXd eigenvalues_;
  double sigma2_;
};

MixingMatrix lazy_metropolis(const NetworkTopology& topology);

/// 1 - sigma2. Throws if sigma2 >= 1 - 1e-12 (disconnected or periodic mixing).
double spectral_gap(const MixingMatrix& matrix);
double spectral_gap(double sigma2);

inline constexpr double kStochasticTolerance = 1e-12;
inline constexpr double kEigenTolerance = 1e-10;

}  // namespace qdgd
