#include "stochlab/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <unsupported/Eigen/MatrixFunctions>

#include "stochlab/errors.hpp"

namespace stochlab {

double HeatKernel::density(std::size_t i, std::size_t j) const {
  return semigroup(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) / std::sqrt(mu[i] * mu[j]);
}

double HeatKernel::mass(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 0; j < size(); ++j)
    s += semigroup(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * std::sqrt(mu[j] / mu[i]);
  return s;
}

std::size_t HeatKernel::position(int v) const {
  const auto it = std::find(vertices.begin(), vertices.end(), v);
  if (it == vertices.end()) throw PreconditionError("vertex not in the truncation");
  return static_cast<std::size_t>(it - vertices.begin());
}

HeatKernel truncated_heat_kernel(const WeightedGraph& g, const std::vector<int>& truncation, double t) {
  if (!(t > 0.0)) throw PreconditionError("time must be positive");
  if (truncation.empty()) throw PreconditionError("truncation must be non-empty");
  const auto n = static_cast<Eigen::Index>(truncation.size());
  std::unordered_map<int, Eigen::Index> pos;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int v = truncation[static_cast<std::size_t>(i)];
    if (v < 0 || v >= g.size()) throw PreconditionError("truncation vertex out of range");
    if (!pos.emplace(v, i).second) throw PreconditionError("duplicate vertex in truncation");
  }

  HeatKernel k;
  k.vertices = truncation;
  k.t = t;
  for (int v : truncation) k.mu.push_back(g.weight(v));
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int v = truncation[static_cast<std::size_t>(i)];
    double out = 0.0;
    for (const auto& e : g.neighbors(v)) {
      out += e.c;
      const auto it = pos.find(e.to);
      if (it != pos.end())
        A(i, it->second) += e.c / std::sqrt(k.mu[static_cast<std::size_t>(i)] * k.mu[static_cast<std::size_t>(it->second)]);
    }
    A(i, i) -= out / k.mu[static_cast<std::size_t>(i)];
  }
  k.semigroup = (t * A).exp();
  if (!k.semigroup.allFinite()) throw NumericError("matrix exponential produced non-finite entries");
  return k;
}

std::vector<int> layer_truncation(const WeightedGraph& g, int L) {
  std::vector<int> out;
  for (int v = 0; v < g.size(); ++v)
    if (g.layer(v) <= L) out.push_back(v);
  return out;
}

KernelProperties kernel_properties(const WeightedGraph& g, const std::vector<int>& truncation, double t, double s) {
  const HeatKernel kt = truncated_heat_kernel(g, truncation, t);
  const HeatKernel ks = truncated_heat_kernel(g, truncation, s);
  const HeatKernel kts = truncated_heat_kernel(g, truncation, t + s);
  KernelProperties p;
  const std::size_t n = kt.size();

  double pmax = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) pmax = std::max(pmax, kt.density(i, j));
  double sym = 0.0;
  p.positive = true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      sym = std::max(sym, std::abs(kt.density(i, j) - kt.density(j, i)));
      if (!(kt.semigroup(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0)) p.positive = false;
    }
  }
  p.symmetry = pmax > 0.0 ? sym / pmax : sym;
  p.chapman_kolmogorov = (kts.semigroup - kt.semigroup * ks.semigroup).cwiseAbs().maxCoeff();
  p.min_mass = INFINITY;
  p.max_mass = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = kt.mass(i);
    p.min_mass = std::min(p.min_mass, m);
    p.max_mass = std::max(p.max_mass, m);
  }
  return p;
}

}  // namespace stochlab
