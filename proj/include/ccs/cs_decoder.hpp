#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ccs/codebook.hpp"
#include "ccs/tree_code.hpp"

namespace ccs {

struct LassoConfig {
  double lambda_scale = 1.0;  // lambda = lambda_scale * sigma * sqrt(2 ln width)
  int max_iters = 1000;
  double tol = 1e-4;          // relative-change stopping threshold
  bool debias = true;         // least-squares refit on the selected support

  void validate() const {
    if (!(lambda_scale > 0) || max_iters < 1 || !(tol > 0))
      throw std::invalid_argument("lasso: lambda_scale, max_iters, tol must be positive");
  }
};

struct SparseEstimate {
  Eigen::VectorXcd coefficients;
  double objective = 0.0;     // 0.5*||y - S~x||^2 + lambda*||x||_1 at coefficients
  bool converged = false;
  int iterations = 0;
};

namespace detail {

// complex soft threshold: shrink magnitude by t, keep phase
inline void soft_threshold(Eigen::VectorXcd& u, double t) {
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    double a = std::abs(u(i));
    u(i) = a <= t ? std::complex<double>(0, 0) : u(i) * ((a - t) / a);
  }
}

inline double l1_norm(const Eigen::VectorXcd& x) {
  double s = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::abs(x(i));
  return s;
}

}  // namespace detail

// Max relative KKT violation of the LASSO optimality conditions at x:
// off support, (|g_c| - lambda)+ / lambda; on support, |g_c - lambda*x_c/|x_c|| / lambda,
// where g = S~^H (y - S~ x). Zero at an exact minimizer.
inline double kkt_residual(const ShiftedDictionary& dict, const Eigen::VectorXcd& y,
                           const Eigen::VectorXcd& x, double lambda) {
  Eigen::VectorXcd g = dict.apply_adjoint(y - dict.apply(x));
  double worst = 0.0;
  for (Eigen::Index c = 0; c < g.size(); ++c) {
    double viol;
    if (x(c) == std::complex<double>(0, 0)) {
      viol = std::max(std::abs(g(c)) - lambda, 0.0);
    } else {
      viol = std::abs(g(c) - lambda * x(c) / std::abs(x(c)));
    }
    worst = std::max(worst, viol / lambda);
  }
  return worst;
}

// Approximate minimizer of 0.5*||y - S~x||^2 + lambda*||x||_1 over complex x.
// Monotone accelerated proximal gradient (MFISTA): the accepted iterate never
// increases the objective, and convergence is declared only once the relative
// change of the prox point drops below tol AND the KKT residual is within
// 10*tol. Hitting max_iters returns the best iterate flagged non-converged.
// objective_trace, when given, records the accepted objective per iteration.
inline SparseEstimate lasso_solve(const ShiftedDictionary& dict, const Eigen::VectorXcd& y,
                                  double lambda, const LassoConfig& config,
                                  std::vector<double>* objective_trace = nullptr) {
  config.validate();
  if (!(lambda > 0) || !y.allFinite())
    throw std::invalid_argument("lasso_solve: need finite y and lambda > 0");
  if (y.size() != dict.slot_len())
    throw std::invalid_argument("lasso_solve: measurement length != slot length");

  const double step_l = dict.operator_norm_sq() * 1.01;  // margin over the power-iteration estimate
  const auto width = static_cast<Eigen::Index>(dict.width());

  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(width);   // accepted iterate
  Eigen::VectorXcd v = x;                               // extrapolated point
  Eigen::VectorXcd z(width), z_prev(width);
  bool have_z_prev = false;
  double t = 1.0;
  double fx = 0.5 * y.squaredNorm();

  SparseEstimate est;
  for (int k = 1; k <= config.max_iters; ++k) {
    est.iterations = k;
    Eigen::VectorXcd grad = dict.apply_adjoint(dict.apply(v) - y);
    z = v - grad / step_l;
    detail::soft_threshold(z, lambda / step_l);
    double fz = 0.5 * (y - dict.apply(z)).squaredNorm() + lambda * detail::l1_norm(z);

    bool accept_z = fz <= fx;
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    Eigen::VectorXcd x_next = accept_z ? z : x;
    v = x_next + (t / t_next) * (z - x_next) + ((t - 1.0) / t_next) * (x_next - x);
    x = std::move(x_next);
    if (accept_z) fx = fz;
    t = t_next;
    if (objective_trace) objective_trace->push_back(fx);

    if (have_z_prev) {
      double rel = (z - z_prev).norm() / std::max(1.0, z.norm());
      if (rel <= config.tol && kkt_residual(dict, y, z, lambda) <= 10.0 * config.tol) {
        est.converged = true;
        x = z;  // the prox point carries the KKT certificate
        fx = fz;
        break;
      }
    }
    z_prev = z;
    have_z_prev = true;
  }
  est.coefficients = std::move(x);
  est.objective = fx;
  return est;
}

// Keeps the K largest-magnitude entries (ties broken toward the lowest
// index), zeroing the rest. This is the best K-term approximation in the
// l2 sense.
inline Eigen::VectorXcd best_k_term(const Eigen::VectorXcd& x, int k) {
  if (k < 0) throw std::invalid_argument("best_k_term: K must be non-negative");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(x.size());
  if (k == 0) return out;
  std::vector<Eigen::Index> idx(x.size());
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  auto better = [&x](Eigen::Index a, Eigen::Index b) {
    double ma = std::abs(x(a)), mb = std::abs(x(b));
    if (ma != mb) return ma > mb;
    return a < b;
  };
  if (k < static_cast<int>(idx.size())) {
    std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(), better);
    idx.resize(k);
  }
  for (Eigen::Index i : idx) out(i) = x(i);
  return out;
}

// Per-slot CS decode: LASSO with the universal threshold
// lambda = lambda_scale * noise_std * sqrt(2 ln width), best-K support,
// optional least-squares refit of the surviving coefficients, and mapping of
// flat indices to (value, delay) via the dictionary addressing. Entries come
// back sorted by descending |coeff| (ties toward the lower flat index).
inline SlotCandidateList decode_slot(const Eigen::VectorXcd& y_slot,
                                     const ShiftedDictionary& dict, int k,
                                     double noise_std, const LassoConfig& config,
                                     int slot = 0, bool* converged = nullptr) {
  if (k < 0 || !(noise_std > 0))
    throw std::invalid_argument("decode_slot: need K >= 0 and noise_std > 0");
  double lambda = config.lambda_scale * noise_std *
                  std::sqrt(2.0 * std::log(static_cast<double>(dict.width())));
  SparseEstimate est = lasso_solve(dict, y_slot, lambda, config);
  if (converged) *converged = est.converged;

  Eigen::VectorXcd kept = best_k_term(est.coefficients, k);
  std::vector<std::size_t> support;
  for (Eigen::Index i = 0; i < kept.size(); ++i)
    if (kept(i) != std::complex<double>(0, 0)) support.push_back(static_cast<std::size_t>(i));

  Eigen::VectorXcd coeffs(support.size());
  for (std::size_t s = 0; s < support.size(); ++s) coeffs(s) = kept(support[s]);
  if (config.debias && !support.empty()) {
    Eigen::MatrixXcd a(dict.slot_len(), support.size());
    for (std::size_t s = 0; s < support.size(); ++s) a.col(s) = dict.column(support[s]);
    Eigen::MatrixXcd gram = a.adjoint() * a;
    Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
    if (ldlt.info() == Eigen::Success) {
      Eigen::VectorXcd refit = ldlt.solve(a.adjoint() * y_slot);
      if (refit.allFinite()) coeffs = refit;
    }
  }

  SlotCandidateList list;
  list.slot = slot;
  list.entries.reserve(support.size());
  for (std::size_t s = 0; s < support.size(); ++s) {
    auto [value, delay] = dict.column_of(support[s]);
    list.entries.push_back({value, delay, coeffs(s)});
  }
  std::stable_sort(list.entries.begin(), list.entries.end(),
                   [&dict](const SlotCandidateList::Candidate& a,
                           const SlotCandidateList::Candidate& b) {
                     double ma = std::abs(a.coeff), mb = std::abs(b.coeff);
                     if (ma != mb) return ma > mb;
                     return dict.flat_index(a.value, a.delay) < dict.flat_index(b.value, b.delay);
                   });
  return list;
}

}  // namespace ccs
