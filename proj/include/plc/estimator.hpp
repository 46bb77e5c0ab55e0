#pragma once

// Sliding-window sparse component estimation from complex sign bits.
//
// Each incoming sample performs a single linearized solve of the surrogate
// cost
//
//   C(S) = ||B - cf_delta(Phi S - L)||^2 + lambda1 ||S - P.*S_prev||^2
//          + lambda2 * sum_i g_sigma(|S_i|)
//
// where cf_delta applies the smooth sign surrogate per real axis and g_sigma
// is the arctan sparsity surrogate. The stationarity condition decouples per
// component into a phase (taken from the driving vector Y) and a magnitude
// that solves a cubic.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <utility>

#include "plc/core.hpp"
#include "plc/cubic.hpp"

namespace plc {

/// How an infeasible magnitude equation (no non-negative root) raises sigma.
enum class Case2Rule {
  /// Raise sigma until lambda2 / arctan(sigma) < alpha.
  Corrected,
  /// Raise sigma until sigma > arctan(lambda2 / alpha), the condition as
  /// originally printed. Kept for comparison only.
  AsPrinted,
};

/// Defaults were tuned on noiseless on-grid signals with N = 100..500,
/// M = 50, tau = 5e-4 s and omega0 = 10 rad/s. The ratio delta_cap/lambda1
/// sets the per-sample step of the estimate; lambda2/(pi lambda1) is the
/// amplitude below which a component is zeroed once sigma is large.
struct EstimatorParams {
  double lambda1 = 6000.0;
  double lambda2 = 100.0;
  double sigma0 = 1.0;
  double sigma_growth = 1.1;
  double delta0 = 1.0;
  double delta_growth = 1.01;
  double sigma_cap = 1e6;
  double delta_cap = 16.0;
  /// Evaluate the data term at P.*S_prev (the prediction for sample m)
  /// instead of at S_prev.
  bool propagate_first = true;
  Case2Rule case2_rule = Case2Rule::Corrected;

  void validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(lambda1) || !positive(lambda2)) throw invalid_argument("lambda1 and lambda2 must be positive");
    if (!positive(sigma0) || !positive(delta0)) throw invalid_argument("sigma0 and delta0 must be positive");
    if (!(sigma_growth > 1.0) || !(delta_growth > 1.0) || !std::isfinite(sigma_growth) ||
        !std::isfinite(delta_growth))
      throw invalid_argument("growth factors must be > 1");
    if (!(sigma_cap >= sigma0) || !(delta_cap >= delta0)) throw invalid_argument("caps must be >= initial values");
  }

  friend bool operator==(const EstimatorParams&, const EstimatorParams&) = default;
};

// ---- surrogates -----------------------------------------------------------

/// arctan(sigma s) / arctan(sigma): l1-like for small sigma, l0-like for large.
inline double g_sigma(double s, double sigma) { return std::atan(sigma * s) / std::atan(sigma); }

/// (2/pi) arctan(delta s), a smooth stand-in for sgn(s).
inline double f_delta(double s, double delta) { return 2.0 / std::numbers::pi * std::atan(delta * s); }

inline double f_delta_prime(double s, double delta) {
  return 2.0 / std::numbers::pi * delta / (1.0 + delta * delta * s * s);
}

/// Complex lift cf(v) = f(Re v) + j f(Im v).
inline cplx cf_delta(cplx v, double delta) { return {f_delta(v.real(), delta), f_delta(v.imag(), delta)}; }

/// f'(Re u)(f(Re u) - Re b) + j f'(Im u)(f(Im u) - Im b): each axis of the
/// squared-error term differentiated separately.
inline cplx axis_paired_residual(cplx u, cplx b, double delta) {
  return {f_delta_prime(u.real(), delta) * (f_delta(u.real(), delta) - b.real()),
          f_delta_prime(u.imag(), delta) * (f_delta(u.imag(), delta) - b.imag())};
}

// ---- state ----------------------------------------------------------------

/// Immutable per-grid operators shared by every state on that grid.
struct Operators {
  FrequencyGrid grid;
  CMatrix phi;
  PredictorVector p;

  explicit Operators(FrequencyGrid g) : grid(std::move(g)), phi(build_vandermonde(grid)), p(grid) {}
};

struct EstimatorState {
  SpectralState s_hat;
  double sigma = 1.0;
  double delta = 1.0;
  Window window;
  std::shared_ptr<const Operators> ops;
  /// Components forced to zero in the last update because the sigma cap was
  /// reached before a non-negative magnitude existed.
  std::size_t capped_components = 0;

  EstimatorState(std::shared_ptr<const Operators> operators, const EstimatorParams& params)
      : s_hat(operators->grid.n(), -1),
        sigma(params.sigma0),
        delta(params.delta0),
        window(operators->grid.window_len()),
        ops(std::move(operators)) {}
};

inline EstimatorState make_estimator_state(const FrequencyGrid& grid, const EstimatorParams& params) {
  params.validate();
  return EstimatorState(std::make_shared<const Operators>(grid), params);
}

/// The state the data term is linearized around.
inline CVector linearization_point(const EstimatorState& state, const EstimatorParams& params) {
  if (params.propagate_first) return state.s_hat.amps.cwiseProduct(state.ops->p.p);
  return state.s_hat.amps;
}

/// Y = 2 lambda1 (P.*S_prev) - 2 Phi^H [cf'(U) (x) (cf(U) - B)], U = Phi S_lin - L.
///
/// Only the filled part of the window takes part: during warm-up Phi is
/// truncated to its first window.size() rows.
inline CVector compute_y(const EstimatorState& state, const CVector& corrected_signs, const EstimatorParams& params) {
  const auto n = static_cast<Eigen::Index>(state.window.size());
  if (corrected_signs.size() != n) throw invalid_argument("compute_y: sign vector length differs from window length");
  if (state.s_hat.size() != state.ops->grid.n()) throw invalid_argument("compute_y: state length differs from grid");

  const auto phi = state.ops->phi.topRows(n);
  const CVector u = phi * linearization_point(state, params) - state.window.level_values();
  CVector g(n);
  for (Eigen::Index k = 0; k < n; ++k) g[k] = axis_paired_residual(u[k], corrected_signs[k], state.delta);
  return 2.0 * params.lambda1 * state.s_hat.amps.cwiseProduct(state.ops->p.p) - 2.0 * (phi.adjoint() * g);
}

/// The surrogate cost C(S) for the current window, sigma and delta, with
/// S_prev = state.s_hat.
inline double surrogate_cost(const EstimatorState& state, const CVector& s, const CVector& signs,
                             const EstimatorParams& params) {
  const auto n = static_cast<Eigen::Index>(state.window.size());
  const CVector u = state.ops->phi.topRows(n) * s - state.window.level_values();
  double data = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) data += std::norm(signs[k] - cf_delta(u[k], state.delta));
  double sparse = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) sparse += g_sigma(std::abs(s[i]), state.sigma);
  return data + params.lambda1 * (s - state.s_hat.amps.cwiseProduct(state.ops->p.p)).squaredNorm() +
         params.lambda2 * sparse;
}

/// Gradient of surrogate_cost as dC/dRe S + j dC/dIm S:
///
///   2 Phi^H [cf'(U) (x) (cf(U) - B)] + 2 lambda1 (S - P.*S_prev)
///     + lambda2 sigma / arctan(sigma) * S / (|S| (1 + sigma^2 |S|^2)),
///
/// with U = Phi S - L. Components with S_i = 0 get a zero sparsity term.
/// Note the factor sigma from d/ds arctan(sigma s): the magnitude equation
/// below keeps beta = lambda2 / arctan(sigma) without it, which amounts to a
/// sparsity weight of lambda2 / sigma in this cost.
inline CVector cost_gradient(const EstimatorState& state, const CVector& s, const CVector& signs,
                             const EstimatorParams& params) {
  const auto n = static_cast<Eigen::Index>(state.window.size());
  const auto phi = state.ops->phi.topRows(n);
  const CVector u = phi * s - state.window.level_values();
  CVector g(n);
  for (Eigen::Index k = 0; k < n; ++k) g[k] = axis_paired_residual(u[k], signs[k], state.delta);
  CVector grad = 2.0 * (phi.adjoint() * g) + 2.0 * params.lambda1 * (s - state.s_hat.amps.cwiseProduct(state.ops->p.p));
  const double sigma = state.sigma;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double r = std::abs(s[i]);
    if (r > 0.0) grad[i] += params.lambda2 * sigma / (std::atan(sigma) * r * (1.0 + sigma * sigma * r * r)) * s[i];
  }
  return grad;
}

// ---- magnitude equation ---------------------------------------------------

struct MagnitudeSolution {
  double r = 0.0;
  double sigma = 1.0;
  /// No non-negative root even at the sigma cap; r was set to 0.
  bool capped = false;
};

/// Coefficients (cubic first) of 2 l1 s^2 r^3 - a s^2 r^2 + 2 l1 r + (beta - a).
inline std::array<double, 4> magnitude_polynomial(double alpha, double lambda1, double lambda2, double sigma) {
  const double beta = lambda2 / std::atan(sigma);
  const double s2 = sigma * sigma;
  return {2.0 * lambda1 * s2, -alpha * s2, 2.0 * lambda1, beta - alpha};
}

/// Smallest non-negative real root at fixed sigma; negative when none exists.
inline double smallest_nonnegative_root(double alpha, double lambda1, double lambda2, double sigma) {
  const auto c = magnitude_polynomial(alpha, lambda1, lambda2, sigma);
  const RealRoots roots = solve_cubic(c[0], c[1], c[2], c[3]);
  // A root within rounding of zero counts as zero.
  const double zero_tol = 1e-14 * std::max(1.0, alpha / (2.0 * lambda1));
  for (double r : roots) {
    if (r >= 0.0) return r;
    if (r > -zero_tol) return 0.0;
  }
  return -1.0;
}

/// Magnitude update for one component driven by alpha = |Y_i|.
///
/// If no non-negative root exists, sigma is multiplied by sigma_growth until
/// one does (or the cap is hit, in which case r = 0 and `capped` is set).
inline MagnitudeSolution solve_magnitude(double alpha, double sigma, const EstimatorParams& params) {
  if (!std::isfinite(alpha) || alpha < 0.0) throw numeric_error("solve_magnitude: alpha must be finite and >= 0");
  if (alpha == 0.0) return {0.0, sigma, false};

  for (;;) {
    bool try_solve = true;
    if (params.case2_rule == Case2Rule::AsPrinted) {
      // Escalate first until the printed condition holds, then solve once.
      try_solve = sigma > std::atan(params.lambda2 / alpha) || sigma >= params.sigma_cap;
    }
    if (try_solve) {
      const double r = smallest_nonnegative_root(alpha, params.lambda1, params.lambda2, sigma);
      if (r >= 0.0) return {r, sigma, false};
      if (sigma >= params.sigma_cap || params.case2_rule == Case2Rule::AsPrinted) return {0.0, sigma, true};
    }
    sigma = std::min(sigma * params.sigma_growth, params.sigma_cap);
  }
}

/// One estimation step for the window ending at the newest pushed sample.
///
/// sigma is shared by all components: the escalation needed by any component
/// applies to the whole update, and every component is then solved with the
/// final sigma. Afterwards sigma and delta advance by their growth factors.
inline EstimatorState update(EstimatorState state, const CVector& corrected_signs, const EstimatorParams& params) {
  if (state.window.size() == 0) throw invalid_argument("update: empty window");
  const CVector y = compute_y(state, corrected_signs, params);
  const auto n = y.size();

  RVector alpha(n);
  double sigma = state.sigma;
  for (Eigen::Index i = 0; i < n; ++i) {
    alpha[i] = std::abs(y[i]);
    if (!std::isfinite(alpha[i])) throw numeric_error("update: non-finite driving vector at component " + std::to_string(i));
    sigma = std::max(sigma, solve_magnitude(alpha[i], sigma, params).sigma);
  }

  CVector next = CVector::Zero(n);
  std::size_t capped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alpha[i] == 0.0) continue;
    const double r = smallest_nonnegative_root(alpha[i], params.lambda1, params.lambda2, sigma);
    if (r < 0.0) {
      ++capped;
      continue;
    }
    next[i] = (r / alpha[i]) * y[i];
  }

  state.s_hat = SpectralState(std::move(next), state.s_hat.time_index + 1);
  state.capped_components = capped;
  state.sigma = std::min(sigma * params.sigma_growth, params.sigma_cap);
  state.delta = std::min(state.delta * params.delta_growth, params.delta_cap);
  return state;
}

}  // namespace plc
