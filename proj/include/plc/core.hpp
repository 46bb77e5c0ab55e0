#pragma once

// Domain types and elementary operators for predictive level-comparison
// acquisition: frequency grid, Vandermonde window operator, one-step
// predictor, complex sign and the sliding window of (sign, level) pairs.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace plc {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

class invalid_argument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Candidate complex exponents z_i (1/s), sampling period and window length.
///
/// Exponents must be distinct and satisfy Re(z) <= 0. A uniform imaginary
/// grid {j*w0, 2j*w0, ..., Nj*w0} remembers w0 so it can be serialized
/// compactly.
class FrequencyGrid {
 public:
  FrequencyGrid(std::vector<cplx> exponents, double tau, std::size_t window_len)
      : exponents_(std::move(exponents)), tau_(tau), window_len_(window_len) {
    validate();
  }

  static FrequencyGrid uniform_imaginary(std::size_t n, double omega0, double tau,
                                         std::size_t window_len) {
    if (!(omega0 > 0.0) || !std::isfinite(omega0))
      throw invalid_argument("omega0 must be positive and finite");
    std::vector<cplx> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = cplx(0.0, omega0 * static_cast<double>(i + 1));
    FrequencyGrid g(std::move(z), tau, window_len);
    g.omega0_ = omega0;
    return g;
  }

  [[nodiscard]] std::size_t n() const { return exponents_.size(); }
  [[nodiscard]] std::size_t window_len() const { return window_len_; }
  [[nodiscard]] double tau() const { return tau_; }
  [[nodiscard]] const std::vector<cplx>& exponents() const { return exponents_; }
  [[nodiscard]] cplx exponent(std::size_t i) const { return exponents_.at(i); }

  /// w0 when built by uniform_imaginary(), 0 for an explicit list.
  [[nodiscard]] double omega0() const { return omega0_; }
  [[nodiscard]] bool is_uniform_imaginary() const { return omega0_ > 0.0; }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  void validate() const {
    if (exponents_.empty()) throw invalid_argument("frequency grid must have n >= 1");
    if (window_len_ < 1) throw invalid_argument("window length must be >= 1");
    if (!(tau_ > 0.0) || !std::isfinite(tau_)) throw invalid_argument("tau must be positive and finite");
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
      const cplx z = exponents_[i];
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw invalid_argument("grid exponent " + std::to_string(i) + " is not finite");
      if (z.real() > 0.0)
        throw invalid_argument("grid exponent " + std::to_string(i) + " has positive real part");
    }
    // O(N^2) is fine for grid sizes in the hundreds.
    for (std::size_t i = 0; i < exponents_.size(); ++i)
      for (std::size_t k = i + 1; k < exponents_.size(); ++k)
        if (exponents_[i] == exponents_[k])
          throw invalid_argument("grid exponents " + std::to_string(i) + " and " + std::to_string(k) +
                                 " coincide");
  }

  std::vector<cplx> exponents_;
  double tau_;
  std::size_t window_len_;
  double omega0_ = 0.0;
};

/// One complex sign measurement, b in {+-1 +- 1j}.
struct SignSymbol {
  bool re_positive = true;
  bool im_positive = true;

  [[nodiscard]] double re() const { return re_positive ? 1.0 : -1.0; }
  [[nodiscard]] double im() const { return im_positive ? 1.0 : -1.0; }
  [[nodiscard]] cplx value() const { return {re(), im()}; }

  friend bool operator==(SignSymbol, SignSymbol) = default;
};

using SignStream = std::vector<SignSymbol>;

/// sgn(x) = +1 for x >= 0, -1 otherwise.
inline double sgn(double x) { return x >= 0.0 ? 1.0 : -1.0; }

inline SignSymbol csgn(cplx v) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw numeric_error("csgn of a non-finite value");
  return SignSymbol{v.real() >= 0.0, v.imag() >= 0.0};
}

/// Spectral state S_m: amplitudes of every grid component at sample m.
struct SpectralState {
  CVector amps;
  std::int64_t time_index = 0;

  SpectralState() = default;
  explicit SpectralState(std::size_t n, std::int64_t m = 0) : amps(CVector::Zero(static_cast<Eigen::Index>(n))), time_index(m) {}
  SpectralState(CVector a, std::int64_t m) : amps(std::move(a)), time_index(m) {}

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(amps.size()); }
  [[nodiscard]] bool all_finite() const { return amps.allFinite(); }
};

/// [P]_i = exp(z_i * tau).
struct PredictorVector {
  CVector p;

  explicit PredictorVector(const FrequencyGrid& grid) : p(static_cast<Eigen::Index>(grid.n())) {
    for (std::size_t i = 0; i < grid.n(); ++i)
      p[static_cast<Eigen::Index>(i)] = std::exp(grid.exponent(i) * grid.tau());
  }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(p.size()); }
};

/// M x N matrix with entry (k, i) = exp(-z_i * k * tau); row 0 is all ones.
///
/// Built by the shift recurrence row(k+1) = row(k) .* exp(-z * tau) so that
/// the shift property holds to rounding.
inline CMatrix build_vandermonde(const FrequencyGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.window_len());
  const auto n = static_cast<Eigen::Index>(grid.n());
  CMatrix phi(m, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx z = grid.exponent(static_cast<std::size_t>(i));
    // |exp(-z k tau)| = exp(-Re z k tau) >= 1 grows for decaying components.
    if (-z.real() * static_cast<double>(m - 1) * grid.tau() > 700.0)
      throw numeric_error("Vandermonde entry overflows for grid exponent " + std::to_string(i));
    const cplx step = std::exp(-z * grid.tau());
    cplx v(1.0, 0.0);
    for (Eigen::Index k = 0; k < m; ++k) {
      phi(k, i) = v;
      v *= step;
    }
  }
  return phi;
}

inline SpectralState predict_state(const SpectralState& state, const PredictorVector& p) {
  if (state.size() != p.size()) throw invalid_argument("predict_state: state/predictor length mismatch");
  return SpectralState(state.amps.cwiseProduct(p.p), state.time_index + 1);
}

/// Next level l((m+1) tau) = sum_i [P .* S]_i.
inline cplx predict_level(const SpectralState& state, const PredictorVector& p) {
  if (state.size() != p.size()) throw invalid_argument("predict_level: state/predictor length mismatch");
  return state.amps.cwiseProduct(p.p).sum();
}

/// Most recent M (sign, level) pairs, newest first: index 0 is sample m,
/// index k is sample m - k.
class Window {
 public:
  explicit Window(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ < 1) throw invalid_argument("window capacity must be >= 1");
  }

  void push(SignSymbol b, cplx level) {
    signs_.push_front(b);
    levels_.push_front(level);
    if (signs_.size() > capacity_) {
      signs_.pop_back();
      levels_.pop_back();
    }
  }

  [[nodiscard]] std::size_t size() const { return signs_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] bool full() const { return signs_.size() == capacity_; }
  [[nodiscard]] SignSymbol sign(std::size_t k) const { return signs_.at(k); }
  [[nodiscard]] cplx level(std::size_t k) const { return levels_.at(k); }

  [[nodiscard]] CVector sign_values() const {
    CVector v(static_cast<Eigen::Index>(signs_.size()));
    for (std::size_t k = 0; k < signs_.size(); ++k) v[static_cast<Eigen::Index>(k)] = signs_[k].value();
    return v;
  }
  [[nodiscard]] CVector level_values() const {
    CVector v(static_cast<Eigen::Index>(levels_.size()));
    for (std::size_t k = 0; k < levels_.size(); ++k) v[static_cast<Eigen::Index>(k)] = levels_[k];
    return v;
  }

 private:
  std::size_t capacity_;
  std::deque<SignSymbol> signs_;
  std::deque<cplx> levels_;
};

}  // namespace plc
