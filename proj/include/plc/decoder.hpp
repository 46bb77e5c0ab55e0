#pragma once

// Receiver-side reconstruction with optional sparse sign-flip correction.
//
// The receiver runs the same estimator as the transmitter on the received
// bits. Flipped bits make the receiver's levels drift from the transmitter's,
// and the drift feeds back into how later bits are interpreted. The error
// correction keeps, per axis, a {0,1} flip estimate for every window
// position and refines it with one projected gradient step per sample
// followed by stochastic rounding.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "plc/core.hpp"
#include "plc/estimator.hpp"
#include "plc/rng.hpp"

namespace plc {

struct EcParams {
  double theta = 7.0;
  double epsilon = 0.2;
  std::uint64_t seed = 0;
  bool enabled = false;
  std::size_t steps_per_sample = 1;

  void validate() const {
    if (!enabled) return;
    if (!(theta > 0.0) || !(epsilon > 0.0) || !std::isfinite(theta) || !std::isfinite(epsilon))
      throw invalid_argument("error correction needs theta > 0 and epsilon > 0");
    if (steps_per_sample < 1) throw invalid_argument("error correction needs at least one step per sample");
  }
};

enum class Axis { Real, Imag };

inline double axis_part(cplx v, Axis axis) { return axis == Axis::Real ? v.real() : v.imag(); }

/// Flip estimate over the window, newest first.
struct ErrorVector {
  RVector relaxed;  // in [0, 1]
  RVector binary;   // in {0, 1}
  Axis axis = Axis::Real;

  ErrorVector() = default;
  ErrorVector(std::size_t len, Axis a)
      : relaxed(RVector::Zero(static_cast<Eigen::Index>(len))), binary(RVector::Zero(static_cast<Eigen::Index>(len))), axis(a) {}

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(binary.size()); }
  [[nodiscard]] std::size_t count() const { return static_cast<std::size_t>(binary.sum()); }
};

/// Shift every entry one position toward the oldest end, drop the oldest and
/// start the newest at 0. With `grow`, the vector lengthens by one instead
/// of dropping (window warm-up).
inline ErrorVector slide_error(const ErrorVector& e, bool grow = false) {
  const auto len = static_cast<Eigen::Index>(e.size());
  const Eigen::Index out_len = grow ? len + 1 : len;
  ErrorVector out(static_cast<std::size_t>(out_len), e.axis);
  const Eigen::Index keep = std::min(len, out_len - 1);
  if (keep > 0) {
    out.relaxed.segment(1, keep) = e.relaxed.head(keep);
    out.binary.segment(1, keep) = e.binary.head(keep);
  }
  return out;
}

/// Gradient of ||b .* (1 - 2E) - s||^2 + theta sum(E) at E = e_binary, where
/// b are the received signs of one axis and s = sgn(axis part of model - level).
inline RVector ec_gradient(const RVector& e_binary, const RVector& received, const RVector& model_signs, double theta) {
  const RVector ones = RVector::Ones(e_binary.size());
  return (-4.0 * received.cwiseProduct(received.cwiseProduct(ones - 2.0 * e_binary) - model_signs)).array() + theta;
}

/// One projected gradient step with stochastic rounding.
///
/// `e_prev` must already be slid for the current sample. `model` is the
/// window reconstructed from the current state estimate (Phi S) and `levels`
/// the window of levels. A zero gradient leaves `e_prev` unchanged.
inline ErrorVector ec_step(const ErrorVector& e_prev, const RVector& received, const CVector& model,
                           const CVector& levels, const EcParams& params, Rng& rng) {
  const auto n = e_prev.binary.size();
  if (received.size() != n || model.size() != n || levels.size() != n)
    throw invalid_argument("ec_step: window lengths differ");

  RVector model_signs(n);
  for (Eigen::Index k = 0; k < n; ++k) model_signs[k] = sgn(axis_part(model[k] - levels[k], e_prev.axis));

  const RVector d = ec_gradient(e_prev.binary, received, model_signs, params.theta);
  const double norm = d.norm();
  if (norm == 0.0) return e_prev;

  ErrorVector out(static_cast<std::size_t>(n), e_prev.axis);
  out.relaxed = (e_prev.binary - (params.epsilon / norm) * d).cwiseMax(0.0).cwiseMin(1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (Eigen::Index k = 0; k < n; ++k) out.binary[k] = out.relaxed[k] > uni(rng) ? 1.0 : 0.0;
  return out;
}

/// Randomized rounding of t in [0, 1]: 1 with probability t.
inline double stochastic_round(double t, Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  return t > uni(rng) ? 1.0 : 0.0;
}

/// Received signs of one axis as +-1 values, corrected by the flip estimate:
/// b_corrected = b_received (1 - 2 e).
inline RVector corrected_axis(const RVector& received, const ErrorVector& e) {
  return received.cwiseProduct((RVector::Ones(received.size()) - 2.0 * e.binary));
}

struct DecodeResult {
  std::vector<cplx> level_trace;
  std::vector<SpectralState> state_trace;
  /// Estimated flips (both axes) in the window after each sample.
  std::vector<std::size_t> flips_estimated;
  /// Samples after which at least one flip estimate was 1.
  std::size_t nonzero_error_samples = 0;
};

struct DecodeOptions {
  bool record_states = true;
  /// Called with (m, state) after every sample when set; lets callers
  /// compute metrics without storing every state.
  std::function<void(std::size_t, const SpectralState&)> on_state;
  /// Called with (m, real-axis, imaginary-axis) flip estimates after every
  /// sample when error correction is enabled.
  std::function<void(std::size_t, const ErrorVector&, const ErrorVector&)> on_errors;
};

inline DecodeResult decode(const SignStream& stream, const FrequencyGrid& grid, const EstimatorParams& params,
                           const EcParams& ec, const DecodeOptions& options = {}) {
  ec.validate();
  EstimatorState est = make_estimator_state(grid, params);
  Rng rng(ec.seed);
  ErrorVector e_re(0, Axis::Real), e_im(0, Axis::Imag);

  DecodeResult out;
  out.level_trace.reserve(stream.size());
  out.flips_estimated.reserve(stream.size());
  if (options.record_states) out.state_trace.reserve(stream.size());

  cplx level(0.0, 0.0);
  for (std::size_t m = 0; m < stream.size(); ++m) {
    try {
      out.level_trace.push_back(level);
      const bool grow = !est.window.full();
      est.window.push(stream[m], level);
      e_re = slide_error(e_re, grow);
      e_im = slide_error(e_im, grow);

      const CVector received = est.window.sign_values();
      CVector signs = received;
      if (ec.enabled) {
        const RVector re = corrected_axis(received.real(), e_re);
        const RVector im = corrected_axis(received.imag(), e_im);
        for (Eigen::Index k = 0; k < signs.size(); ++k) signs[k] = cplx(re[k], im[k]);
      }
      est = update(std::move(est), signs, params);
      if (!est.s_hat.all_finite()) throw numeric_error("estimate became non-finite");

      if (ec.enabled) {
        // Judge the window with the estimate that has absorbed sample m.
        const auto n = static_cast<Eigen::Index>(est.window.size());
        const CVector model = est.ops->phi.topRows(n) * est.s_hat.amps;
        const CVector levels = est.window.level_values();
        for (std::size_t it = 0; it < ec.steps_per_sample; ++it) {
          e_re = ec_step(e_re, received.real(), model, levels, ec, rng);
          e_im = ec_step(e_im, received.imag(), model, levels, ec, rng);
        }
      }
      level = predict_level(est.s_hat, est.ops->p);
    } catch (const std::exception& e) {
      throw numeric_error("decode failed at sample " + std::to_string(m) + ": " + e.what());
    }
    const std::size_t flips = e_re.count() + e_im.count();
    out.flips_estimated.push_back(flips);
    if (flips > 0) ++out.nonzero_error_samples;
    if (options.on_state) options.on_state(m, est.s_hat);
    if (ec.enabled && options.on_errors) options.on_errors(m, e_re, e_im);
    if (options.record_states) out.state_trace.push_back(est.s_hat);
  }
  return out;
}

}  // namespace plc
