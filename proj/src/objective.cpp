#include "qdgd/objective.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qdgd/errors.hpp"
#include "qdgd/random.hpp"

namespace qdgd {

RegressionObjective::RegressionObjective(Eigen::MatrixXd features, Eigen::VectorXd targets,
                                         std::optional<double> operating_radius)
    : features_(std::move(features)), targets_(std::move(targets)) {
  if (features_.rows() == 0 || features_.cols() == 0) throw Error("empty instance");
  if (targets_.size() != features_.rows()) throw Error("targets do not match feature rows");

  const Eigen::MatrixXd gram = features_.transpose() * features_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  const double lambda_min = solver.eigenvalues()(0);
  const double lambda_max = solver.eigenvalues()(solver.eigenvalues().size() - 1);
  if (!(lambda_min >= 1e-10)) throw Error("degenerate instance");

  mu_ = 2.0 * lambda_min;
  lipschitz_ = 2.0 * lambda_max;
  optimum_ = gram.ldlt().solve(features_.transpose() * targets_);
  f_star_ = global_value(optimum_);

  operating_radius_ = operating_radius.value_or(4.0 * optimum_.lpNorm<Eigen::Infinity>() + 1.0);
  if (!(operating_radius_ > 0.0)) throw Error("operating radius must be positive");
  for (Eigen::Index i = 0; i < features_.rows(); ++i) {
    const auto w = features_.row(i);
    const double bound =
        2.0 * w.norm() * (w.lpNorm<1>() * operating_radius_ + std::abs(targets_(i)));
    grad_bound_ = std::max(grad_bound_, bound);
    max_agent_lipschitz_ = std::max(max_agent_lipschitz_, 2.0 * w.squaredNorm());
  }
  if (!(grad_bound_ > 0.0)) throw Error("degenerate instance");
}

double RegressionObjective::local_value(std::size_t agent, const Eigen::VectorXd& x) const {
  const auto i = static_cast<Eigen::Index>(agent);
  const double r = features_.row(i).dot(x) - targets_(i);
  return r * r;
}

Eigen::VectorXd RegressionObjective::gradient(std::size_t agent, const Eigen::VectorXd& x) const {
  const auto i = static_cast<Eigen::Index>(agent);
  const double r = features_.row(i).dot(x) - targets_(i);
  return 2.0 * r * features_.row(i).transpose();
}

double RegressionObjective::global_value(const Eigen::VectorXd& x) const {
  return (features_ * x - targets_).squaredNorm();
}

Eigen::VectorXd RegressionObjective::global_gradient(const Eigen::VectorXd& x) const {
  return 2.0 * features_.transpose() * (features_ * x - targets_);
}

RegressionObjective generate_instance(std::size_t n, std::size_t d, std::uint64_t seed,
                                      DataBounds bounds, std::optional<double> operating_radius) {
  if (n < d) throw Error("instance needs n >= d");
  if (d == 0) throw Error("instance needs d >= 1");
  for (int attempt = 0; attempt <= 100; ++attempt) {
    std::mt19937_64 gen(seed + static_cast<std::uint64_t>(attempt));
    Eigen::MatrixXd w(n, d);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            bounds.feature_high * to_unit(gen());
      }
      b(static_cast<Eigen::Index>(i)) = bounds.target_high * to_unit(gen());
    }
    try {
      return RegressionObjective(std::move(w), std::move(b), operating_radius);
    } catch (const Error& e) {
      if (std::string(e.what()) != "degenerate instance") throw;
    }
  }
  throw Error("degenerate instance");
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_instance_csv(std::ostream& out, const RegressionObjective& objective) {
  const auto d = objective.dims();
  for (std::size_t j = 0; j < d; ++j) out << "w_" << (j + 1) << ',';
  out << "b\n";
  for (std::size_t i = 0; i < objective.agents(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < d; ++j) {
      out << fmt17(objective.features()(row, static_cast<Eigen::Index>(j))) << ',';
    }
    out << fmt17(objective.targets()(row)) << '\n';
  }
}

RegressionObjective read_instance_csv(std::istream& in, std::optional<double> operating_radius) {
  std::string line;
  std::vector<std::vector<double>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("w_", 0) == 0) continue;
    }
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error("instance csv: bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw Error("instance csv: ragged row");
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty() || rows.front().size() < 2) throw Error("instance csv: no data");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.front().size() - 1);
  Eigen::MatrixXd w(n, d);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) w(i, j) = rows[i][j];
    b(i) = rows[i][d];
  }
  return RegressionObjective(std::move(w), std::move(b), operating_radius);
}

}  // namespace qdgd
