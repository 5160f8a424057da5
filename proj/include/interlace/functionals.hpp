#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "interlace/potential.hpp"

namespace interlace {

/// Exact functionals of the occupation-time field over a finite window K.
/// V is given on the sites of K (same order). Two independent evaluation
/// routes exist for the Laplace functional:
///
///  * subsets route: exp{-u (sum_I c_I V_I)/(sum_I g_I V_I)} over all
///    subsets I of K, valid for every V >= 0;
///  * operator route: exp{-u (V, (I+GV)^{-1} 1)}, valid when the L^inf
///    operator norm of GV is below 1 (Neumann-series region).
///
/// On weighted graphs G is the Green density and the site weights cancel
/// from both routes, so the formulas below hold verbatim.
namespace functionals {

/// Matrix of the composition G V: entries g(x_i, x_j) V_j.
template <GreenModel M>
Eigen::MatrixXd gv_matrix(const SiteSet<M>& K, const Eigen::VectorXd& V) {
  if (V.size() != K.size()) throw std::invalid_argument("gv_matrix: V size mismatch");
  return K.green_matrix() * V.asDiagonal();
}

/// Exact L^inf -> L^inf operator norm of GV (maximum absolute row sum).
inline double gv_linf_norm(const Eigen::MatrixXd& gv) {
  return gv.cwiseAbs().rowwise().sum().maxCoeff();
}

/// E[exp{-sum V L}] by enumeration of subset determinants; V >= 0 required.
template <GreenModel M>
double laplace_exact_subsets(const SiteSet<M>& K, const Eigen::VectorXd& V, double u,
                             const SubsetTable* table = nullptr) {
  if (V.size() != K.size()) throw std::invalid_argument("laplace: V size mismatch");
  if (u < 0) throw std::invalid_argument("laplace: u >= 0 required");
  if ((V.array() < 0).any())
    throw std::invalid_argument("laplace subsets route: V >= 0 required (use operator route)");
  std::optional<SubsetTable> local;
  if (!table) table = &local.emplace(K.green_matrix());
  const SubsetTable& tab = *table;
  const int n = K.size();
  double num = 0.0, den = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double vi = 1.0;
    for (int i = 0; i < n && vi != 0.0; ++i)
      if (mask & (1u << i)) vi *= V[i];
    if (vi == 0.0) continue;
    num += tab.c(mask) * vi;
    den += tab.g(mask) * vi;
  }
  return std::exp(-u * num / den);
}

/// E[exp{-sum V L}] via the resolvent; requires ||GV||_inf < 1.
template <GreenModel M>
double laplace_exact_operator(const SiteSet<M>& K, const Eigen::VectorXd& V, double u) {
  if (u < 0) throw std::invalid_argument("laplace: u >= 0 required");
  const Eigen::MatrixXd gv = gv_matrix(K, V);
  const double norm = gv_linf_norm(gv);
  if (norm >= 1.0)
    throw std::domain_error("laplace operator route: ||GV|| >= 1, outside convergence region");
  const int n = K.size();
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) + gv;
  const Eigen::VectorXd h = m.partialPivLu().solve(Eigen::VectorXd::Ones(n));
  return std::exp(-u * V.dot(h));
}

/// E[exp{it sum V L}]: analytic continuation through the resolvent,
/// exp{u (it) (V, (I - it GV)^{-1} 1)}. Reports when the resolvent fails.
template <GreenModel M>
std::complex<double> char_function(const SiteSet<M>& K, const Eigen::VectorXd& V, double u,
                                   double t) {
  using C = std::complex<double>;
  const Eigen::MatrixXd gv = gv_matrix(K, V);
  const int n = K.size();
  const C z(0.0, t);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n, n) - z * gv.cast<C>();
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
  if (!lu.isInvertible())
    throw std::domain_error("char_function: resolvent singular at it (outside certified strip)");
  const Eigen::VectorXcd h = lu.solve(Eigen::VectorXcd::Ones(n));
  C inner(0.0, 0.0);
  for (int i = 0; i < n; ++i) inner += V[i] * h[i];
  return std::exp(u * z * inner);
}

struct DetIdentityReport {
  double det_lhs = 0.0;      // det(I + GV)
  double det_rhs = 0.0;      // sum_I g_I V_I
  double cofactor_lhs = 0.0; // sum_{k,l} C_{k,l} v_l
  double cofactor_rhs = 0.0; // sum_I c_I V_I
};

/// Both determinant identities behind the subsets route, evaluated on the
/// given V; the two columns of the report must agree.
template <GreenModel M>
DetIdentityReport det_identities(const SiteSet<M>& K, const Eigen::VectorXd& V,
                                 const SubsetTable* table = nullptr) {
  const int n = K.size();
  if (n > 12) throw std::invalid_argument("det_identities: |K| <= 12 required");
  std::optional<SubsetTable> local;
  if (!table) table = &local.emplace(K.green_matrix());
  const SubsetTable& tab = *table;

  DetIdentityReport r;
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) + gv_matrix(K, V);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  r.det_lhs = lu.determinant();
  // sum_{k,l} C_{k,l} v_l = det(M) * V . M^{-1} 1  (adjugate pulled through LU)
  r.cofactor_lhs = r.det_lhs * V.dot(lu.solve(Eigen::VectorXd::Ones(n)));
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double vi = 1.0;
    for (int i = 0; i < n && vi != 0.0; ++i)
      if (mask & (1u << i)) vi *= V[i];
    if (vi == 0.0) continue;
    r.det_rhs += tab.g(mask) * vi;
    r.cofactor_rhs += tab.c(mask) * vi;
  }
  return r;
}

/// First n_max power-series coefficients u (V, (GV)^{n-1} 1) of
/// log E[exp{z sum V L}] (weights folded in on weighted graphs).
template <GreenModel M>
std::vector<double> series_coefficients(const SiteSet<M>& K, const Eigen::VectorXd& V, double u,
                                        int n_max) {
  if (n_max < 1 || n_max > 64)
    throw std::invalid_argument("series_coefficients: 1 <= n_max <= 64");
  const int n = K.size();
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = K.model().weight(K.sites()[i]);
  // GV as an operator on functions over K: (GV f)_i = sum_j g_ij V_j w_j f_j.
  const Eigen::MatrixXd gv =
      K.green_matrix() * (V.array() * w.array()).matrix().asDiagonal();
  std::vector<double> coeffs(n_max);
  Eigen::VectorXd h = Eigen::VectorXd::Ones(n);
  for (int k = 1; k <= n_max; ++k) {
    coeffs[k - 1] = u * (V.array() * w.array() * h.array()).sum();
    if (k < n_max) h = gv * h;
  }
  return coeffs;
}

/// E[exp{-sum V l}] for the discrete visit counts l: integrating the unit
/// exponentials out of each visit turns this into the continuous functional
/// at Vt = e^{V} - 1 (geometric per-visit factor 1/(1+Vt) = e^{-V}).
template <GreenModel M>
double discrete_laplace(const SiteSet<M>& K, const Eigen::VectorXd& V, double u) {
  Eigen::VectorXd vt = V.array().exp() - 1.0;
  if ((vt.array() >= 0).all()) return laplace_exact_subsets(K, vt, u);
  const double norm = gv_linf_norm(gv_matrix(K, vt));
  if (norm >= 1.0)
    throw std::domain_error("discrete_laplace: transformed potential outside admissible domain");
  return laplace_exact_operator(K, vt, u);
}

struct WeightedFunctionalReport {
  double exponential_moment_form = 0.0;  // resolvent route with rho inner products
  double laplace_form = 0.0;             // subset determinant route (Green density)
};

/// E[exp{-sum V(x) L_{x,u}}] on a weighted graph by both routes. The
/// exponential-moment form applies the identity for E[exp{sum Vh L rho}] at
/// Vh = -V/rho, keeping the rho-weighted inner products explicit.
template <GreenModel M>
WeightedFunctionalReport weighted_graph_functionals(const SiteSet<M>& K,
                                                    const Eigen::VectorXd& V, double u) {
  const int n = K.size();
  Eigen::VectorXd rho(n);
  for (int i = 0; i < n; ++i) rho[i] = K.model().weight(K.sites()[i]);
  const Eigen::VectorXd vh = -(V.array() / rho.array()).matrix();
  // (G Vh f)_i = sum_j g_ij Vh_j rho_j f_j
  const Eigen::MatrixXd gvh =
      K.green_matrix() * (vh.array() * rho.array()).matrix().asDiagonal();
  if (gv_linf_norm(gvh) >= 1.0)
    throw std::domain_error("weighted functionals: ||G Vh|| >= 1, outside convergence region");
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - gvh;
  const Eigen::VectorXd h = m.partialPivLu().solve(Eigen::VectorXd::Ones(n));
  WeightedFunctionalReport r;
  r.exponential_moment_form = std::exp(u * (vh.array() * h.array() * rho.array()).sum());
  r.laplace_form = (V.array() >= 0).all() ? laplace_exact_subsets(K, V, u)
                                          : laplace_exact_operator(K, V, u);
  return r;
}

}  // namespace functionals
}  // namespace interlace
