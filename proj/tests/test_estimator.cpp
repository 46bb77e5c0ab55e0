#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "plc/bench.hpp"
#include "plc/encoder.hpp"
#include "plc/estimator.hpp"
#include "plc/siggen.hpp"

using namespace plc;

TEST(Surrogates, GSigma) {
  EXPECT_EQ(g_sigma(0.0, 3.0), 0.0);
  for (double s : {0.01, 1.0, 1e3}) EXPECT_DOUBLE_EQ(g_sigma(1.0, s), 1.0);
  // arctan(50) / arctan(1000) = 0.98...: close to the l0 limit.
  EXPECT_NEAR(g_sigma(0.05, 1000.0), 1.0, 0.03);
  EXPECT_NEAR(g_sigma(0.05, 1000.0), std::atan(50.0) / std::atan(1000.0), 1e-15);
}

TEST(Surrogates, FDeltaValues) {
  EXPECT_EQ(f_delta(0.0, 5.0), 0.0);
  EXPECT_DOUBLE_EQ(f_delta_prime(0.0, 5.0), 10.0 / std::numbers::pi);
  // (2/pi) arctan(64) = 0.99005 >= 0.99; (2/pi) arctan(63) < 0.99.
  EXPECT_GE(f_delta(0.1, 640.0), 0.99);
  EXPECT_GE(f_delta(0.1, 5000.0), 0.99);
  EXPECT_LT(f_delta(0.1, 630.0), 0.99);
}

TEST(Surrogates, FDeltaPrimeMatchesFiniteDifference) {
  const double h = 1e-6;
  for (double delta : {1.0, 10.0})
    for (double s : {-1.0, 0.3, 2.0}) {
      const double fd = (f_delta(s + h, delta) - f_delta(s - h, delta)) / (2.0 * h);
      EXPECT_NEAR(f_delta_prime(s, delta), fd, 1e-6);
    }
}

TEST(Surrogates, ComplexLiftIsPerAxis) {
  const cplx v(0.4, -2.0);
  EXPECT_EQ(cf_delta(v, 3.0), cplx(f_delta(0.4, 3.0), f_delta(-2.0, 3.0)));
  const cplx r = axis_paired_residual(v, {1.0, -1.0}, 3.0);
  EXPECT_DOUBLE_EQ(r.real(), f_delta_prime(0.4, 3.0) * (f_delta(0.4, 3.0) - 1.0));
  EXPECT_DOUBLE_EQ(r.imag(), f_delta_prime(-2.0, 3.0) * (f_delta(-2.0, 3.0) + 1.0));
}

namespace {

/// Y by explicit sums over the defining formula.
CVector direct_y(const std::vector<cplx>& z, double tau, const std::vector<cplx>& s_lin, const std::vector<cplx>& s_prev,
                 const std::vector<cplx>& levels, const std::vector<cplx>& signs, double l1, double delta) {
  const std::size_t n = z.size(), m = levels.size();
  CVector y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    cplx data(0.0, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      cplx u = -levels[k];
      for (std::size_t j = 0; j < n; ++j) u += std::exp(-z[j] * double(k) * tau) * s_lin[j];
      const double fr = oracle::f_delta(u.real(), delta), fi = oracle::f_delta(u.imag(), delta);
      const double dr = 2.0 / std::numbers::pi * delta / (1.0 + delta * delta * u.real() * u.real());
      const double di = 2.0 / std::numbers::pi * delta / (1.0 + delta * delta * u.imag() * u.imag());
      const cplx g(dr * (fr - signs[k].real()), di * (fi - signs[k].imag()));
      data += std::conj(std::exp(-z[i] * double(k) * tau)) * g;
    }
    y[static_cast<Eigen::Index>(i)] = 2.0 * l1 * std::exp(z[i] * tau) * s_prev[i] - 2.0 * data;
  }
  return y;
}

EstimatorState small_state(const FrequencyGrid& g, const EstimatorParams& p, const std::vector<cplx>& s_prev,
                           const std::vector<cplx>& levels_newest_first, const std::vector<SignSymbol>& signs_newest_first) {
  EstimatorState st = make_estimator_state(g, p);
  for (std::size_t i = 0; i < s_prev.size(); ++i) st.s_hat.amps[static_cast<Eigen::Index>(i)] = s_prev[i];
  for (std::size_t k = levels_newest_first.size(); k-- > 0;) st.window.push(signs_newest_first[k], levels_newest_first[k]);
  return st;
}

}  // namespace

TEST(ComputeY, ZeroStateAllPositiveSigns) {
  // S = 0, L = 0, B = 1 + j: every row contributes f'(0)(0 - 1)(1 + j), so
  // Y_i = (4 delta / pi) (1 + j) sum_k conj(Phi_ki).
  const FrequencyGrid g({{0.0, 10.0}, {-1.0, 25.0}}, 1e-2, 3);
  EstimatorParams p;
  p.delta0 = 2.0;
  p.propagate_first = false;
  const auto st = small_state(g, p, {0.0, 0.0}, {0.0, 0.0, 0.0}, {{true, true}, {true, true}, {true, true}});
  const CVector y = compute_y(st, st.window.sign_values(), p);
  for (int i = 0; i < 2; ++i) {
    cplx sum(0.0, 0.0);
    for (int k = 0; k < 3; ++k) sum += std::conj(std::exp(-g.exponent(i) * double(k) * 1e-2));
    const cplx expect = 4.0 * 2.0 / std::numbers::pi * cplx(1.0, 1.0) * sum;
    EXPECT_LT(std::abs(y[i] - expect), 1e-12);
  }
}

TEST(ComputeY, MatchesDirectEvaluation) {
  const std::vector<cplx> z{{0.0, 10.0}, {-1.0, 25.0}};
  const FrequencyGrid g(z, 1e-2, 3);
  const std::vector<cplx> s_prev{{0.3, -0.2}, {-0.1, 0.5}};
  const std::vector<cplx> levels{{0.1, 0.2}, {-0.3, 0.05}, {0.2, -0.4}};
  const std::vector<SignSymbol> signs{{true, false}, {false, false}, {true, true}};
  std::vector<cplx> sv;
  for (auto s : signs) sv.push_back(s.value());
  for (bool prop : {false, true}) {
    EstimatorParams p;
    p.lambda1 = 0.7;
    p.delta0 = 3.0;
    p.propagate_first = prop;
    const auto st = small_state(g, p, s_prev, levels, signs);
    std::vector<cplx> s_lin = s_prev;
    if (prop)
      for (std::size_t i = 0; i < 2; ++i) s_lin[i] *= std::exp(z[i] * 1e-2);
    const CVector expect = direct_y(z, 1e-2, s_lin, s_prev, levels, sv, 0.7, 3.0);
    const CVector y = compute_y(st, st.window.sign_values(), p);
    EXPECT_LT((y - expect).norm(), 1e-12 * std::max(1.0, expect.norm()));
  }
}

TEST(ComputeY, SaturatedConsistencyLeavesPrior) {
  // |U| huge and consistent with B: the data term vanishes.
  const FrequencyGrid g({{0.0, 10.0}}, 1e-2, 2);
  EstimatorParams p;
  p.delta0 = 1e6;
  p.delta_cap = 1e6;
  p.propagate_first = false;
  const auto st = small_state(g, p, {{100.0, 100.0}}, {0.0, 0.0}, {{true, true}, {true, true}});
  const CVector y = compute_y(st, st.window.sign_values(), p);
  const cplx prior = 2.0 * p.lambda1 * std::exp(g.exponent(0) * 1e-2) * cplx(100.0, 100.0);
  EXPECT_LT(std::abs(y[0] - prior), 1e-6 * std::abs(prior));
}

TEST(ComputeY, PartialWindowUsesFilledRows) {
  const FrequencyGrid g({{0.0, 10.0}, {0.0, 20.0}}, 1e-2, 5);
  EstimatorParams p;
  p.propagate_first = false;
  const auto st = small_state(g, p, {{0.1, 0.0}, {0.0, 0.2}}, {{0.5, 0.0}, {0.0, 0.3}}, {{true, false}, {false, true}});
  const CVector y = compute_y(st, st.window.sign_values(), p);
  const CVector expect = direct_y(g.exponents(), 1e-2, {{0.1, 0.0}, {0.0, 0.2}}, {{0.1, 0.0}, {0.0, 0.2}},
                                  {{0.5, 0.0}, {0.0, 0.3}}, {{1.0, -1.0}, {-1.0, 1.0}}, p.lambda1, p.delta0);
  EXPECT_LT((y - expect).norm(), 1e-12);
  EXPECT_THROW(compute_y(st, CVector::Ones(3), p), invalid_argument);
}

TEST(CostGradient, MatchesFiniteDifferencesOfIndependentCost) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> un(1, 8), um(1, 6);
  for (int t = 0; t < 50; ++t) {
    const int n = un(rng), m = um(rng);
    std::vector<cplx> z;
    for (int i = 0; i < n; ++i) z.push_back({-std::abs(u(rng)) * 5.0, 40.0 * (i + 1) + u(rng)});
    oracle::CostInstance c;
    c.z = z;
    c.tau = 1e-2;
    c.lambda1 = 0.5 + std::abs(u(rng));
    c.lambda2 = 0.1 + std::abs(u(rng));
    c.sigma = 1.0 + 3.0 * std::abs(u(rng));
    c.delta = 1.0 + 3.0 * std::abs(u(rng));
    std::vector<SignSymbol> signs;
    for (int k = 0; k < m; ++k) {
      c.levels.push_back({u(rng), u(rng)});
      signs.push_back({u(rng) > 0, u(rng) > 0});
      c.signs.push_back(signs.back().value());
    }
    for (int i = 0; i < n; ++i) c.s_prev.push_back({u(rng), u(rng)});

    EstimatorParams p;
    p.lambda1 = c.lambda1;
    p.lambda2 = c.lambda2;
    const FrequencyGrid g(z, c.tau, static_cast<std::size_t>(m));
    EstimatorState st = small_state(g, p, c.s_prev, c.levels, signs);
    st.sigma = c.sigma;
    st.delta = c.delta;

    std::vector<cplx> s(n);
    CVector sv(n);
    for (int i = 0; i < n; ++i) sv[i] = s[i] = {u(rng), u(rng)};
    const CVector grad = cost_gradient(st, sv, st.window.sign_values(), p);
    EXPECT_NEAR(surrogate_cost(st, sv, st.window.sign_values(), p), c.cost(s), 1e-12 * std::max(1.0, c.cost(s)));

    const double h = 1e-6;
    for (int i = 0; i < n; ++i)
      for (int axis = 0; axis < 2; ++axis) {
        auto sp = s, sm = s;
        const cplx dir = axis == 0 ? cplx(h, 0.0) : cplx(0.0, h);
        sp[i] += dir;
        sm[i] -= dir;
        const double fd = (c.cost(sp) - c.cost(sm)) / (2.0 * h);
        const double an = axis == 0 ? grad[i].real() : grad[i].imag();
        EXPECT_LT(std::abs(an - fd), 1e-5 * std::max(1.0, std::abs(fd))) << "instance " << t << " i " << i;
      }
  }
}

TEST(Update, ZeroDrivingVectorGivesZeroState) {
  // Zero prior and one row so far on the consistent side that f' underflows
  // to 0: Y is exactly zero and so is the update.
  const FrequencyGrid g({{0.0, 10.0}, {0.0, 20.0}}, 1e-2, 1);
  EstimatorParams p;
  EstimatorState st = make_estimator_state(g, p);
  st.window.push({true, true}, {-1e300, -1e300});
  st = update(std::move(st), st.window.sign_values(), p);
  EXPECT_EQ(st.s_hat.amps, CVector::Zero(2));
}

TEST(Update, PhaseFollowsDrivingVector) {
  const FrequencyGrid g({{0.0, 10.0}, {0.0, 20.0}, {0.0, 30.0}}, 1e-3, 4);
  EstimatorParams p;
  p.lambda1 = 1.0;
  p.lambda2 = 0.01;
  p.propagate_first = false;
  EstimatorState st = make_estimator_state(g, p);
  st.s_hat.amps << cplx(0.5, 0.1), cplx(-0.2, 0.4), cplx(0.0, -0.3);
  st.window.push({true, false}, {0.1, 0.0});
  st.window.push({false, true}, {0.0, 0.1});
  const CVector y = compute_y(st, st.window.sign_values(), p);
  const auto next = update(st, st.window.sign_values(), p);
  int nonzero = 0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(next.s_hat.amps[i]) == 0.0) continue;
    ++nonzero;
    EXPECT_LT(std::abs(next.s_hat.amps[i] / std::abs(next.s_hat.amps[i]) - y[i] / std::abs(y[i])), 1e-12);
  }
  EXPECT_GT(nonzero, 0);
  EXPECT_EQ(next.s_hat.time_index, st.s_hat.time_index + 1);
}

TEST(Update, MagnitudesSolveTheStationarityCondition) {
  // 2 l1 r + beta / (1 + sigma^2 r^2) = |Y| for every nonzero component.
  const FrequencyGrid g({{0.0, 10.0}, {0.0, 20.0}, {0.0, 30.0}}, 1e-3, 4);
  EstimatorParams p;
  p.lambda1 = 1.0;
  p.lambda2 = 0.01;
  EstimatorState st = make_estimator_state(g, p);
  st.s_hat.amps << cplx(0.5, 0.1), cplx(-0.2, 0.4), cplx(0.0, -0.3);
  st.window.push({true, false}, {0.1, 0.0});
  const CVector y = compute_y(st, st.window.sign_values(), p);
  const auto next = update(st, st.window.sign_values(), p);
  const double sigma = next.sigma / p.sigma_growth;
  const double beta = p.lambda2 / std::atan(sigma);
  for (int i = 0; i < 3; ++i) {
    const double r = std::abs(next.s_hat.amps[i]);
    if (r == 0.0) continue;
    EXPECT_NEAR(2.0 * p.lambda1 * r + beta / (1.0 + sigma * sigma * r * r), std::abs(y[i]), 1e-9 * std::max(1.0, std::abs(y[i])));
  }
}

TEST(Update, SchedulesAdvanceAndRespectCaps) {
  const FrequencyGrid g({{0.0, 10.0}}, 1e-3, 2);
  EstimatorParams p;
  p.sigma_cap = 1.5;
  p.delta_cap = 1.02;
  EstimatorState st = make_estimator_state(g, p);
  double prev_sigma = st.sigma, prev_delta = st.delta;
  for (int k = 0; k < 20; ++k) {
    st.window.push({k % 2 == 0, k % 3 == 0}, predict_level(st.s_hat, st.ops->p));
    st = update(std::move(st), st.window.sign_values(), p);
    EXPECT_GE(st.sigma, prev_sigma);
    EXPECT_GE(st.delta, prev_delta);
    EXPECT_LE(st.sigma, p.sigma_cap);
    EXPECT_LE(st.delta, p.delta_cap);
    EXPECT_TRUE(st.s_hat.all_finite());
    prev_sigma = st.sigma;
    prev_delta = st.delta;
  }
  EXPECT_EQ(st.sigma, 1.5);
  EXPECT_EQ(st.delta, 1.02);
}

TEST(Update, LargerLambda2NeverIncreasesMagnitudes) {
  const FrequencyGrid g({{0.0, 10.0}, {0.0, 20.0}, {0.0, 30.0}}, 1e-3, 4);
  for (double l2a : {0.01, 0.1}) {
    EstimatorParams a;
    a.lambda1 = 1.0;
    a.lambda2 = l2a;
    a.sigma0 = 3.0;
    EstimatorParams b = a;
    b.lambda2 = l2a * 3.0;
    EstimatorState sa = make_estimator_state(g, a), sb = make_estimator_state(g, b);
    CVector s0(3);
    s0 << cplx(0.5, 0.1), cplx(-0.2, 0.4), cplx(0.0, -0.3);
    sa.s_hat.amps = sb.s_hat.amps = s0;
    sa.window.push({true, false}, {0.1, 0.0});
    sb.window.push({true, false}, {0.1, 0.0});
    const auto na = update(sa, sa.window.sign_values(), a), nb = update(sb, sb.window.sign_values(), b);
    if (na.sigma != nb.sigma) continue;  // different escalation; not comparable
    for (int i = 0; i < 3; ++i) EXPECT_LE(std::abs(nb.s_hat.amps[i]), std::abs(na.s_hat.amps[i]) + 1e-15);
  }
}

TEST(Update, EmptyWindowIsAnError) {
  const FrequencyGrid g({{0.0, 10.0}}, 1e-3, 2);
  EstimatorState st = make_estimator_state(g, EstimatorParams{});
  EXPECT_THROW(update(st, CVector(0), EstimatorParams{}), invalid_argument);
}

TEST(Params, Validation) {
  EstimatorParams p;
  EXPECT_NO_THROW(p.validate());
  p.sigma_growth = 1.0;
  EXPECT_THROW(p.validate(), invalid_argument);
  p = {};
  p.delta_cap = 0.5 * p.delta0;
  EXPECT_THROW(p.validate(), invalid_argument);
  p = {};
  p.lambda2 = 0.0;
  EXPECT_THROW(p.validate(), invalid_argument);
}

TEST(EndToEnd, SmallInstanceConverges) {
  // Regression anchor: N = 20, M = 10, k = 0.1 on the grid omega0 = 2 pi /
  // (N tau), default estimator settings. Measured mean about -21 dB.
  const double tau = 5e-4;
  const auto g = FrequencyGrid::uniform_imaginary(20, 2.0 * std::numbers::pi / (20 * tau), tau, 10);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SignalSpec spec{g};
    spec.sparsity_factor = 0.1;
    spec.num_samples = 2000;
    spec.seed = seed;
    const auto sig = generate(spec);
    const auto enc = encode(sig.samples, g, EstimatorParams{}, true);
    total += mse_db(sig.true_state(1999), enc.state_trace->back());
  }
  EXPECT_LE(total / 5.0, -15.0);
}
