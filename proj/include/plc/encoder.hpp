#pragma once

// Transmitter-side feedback loop: compare each sample against the predicted
// level, emit the complex sign, update the estimator and predict the next
// level.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plc/core.hpp"
#include "plc/estimator.hpp"

namespace plc {

struct EncodeResult {
  SignStream stream;
  std::vector<cplx> level_trace;  // level used for sample m
  std::optional<std::vector<SpectralState>> state_trace;
};

inline EncodeResult encode(std::span<const cplx> samples, const FrequencyGrid& grid, const EstimatorParams& params,
                           bool record_states = false) {
  EstimatorState est = make_estimator_state(grid, params);
  EncodeResult out;
  out.stream.reserve(samples.size());
  out.level_trace.reserve(samples.size());
  if (record_states) out.state_trace.emplace().reserve(samples.size());

  cplx level(0.0, 0.0);
  for (std::size_t m = 0; m < samples.size(); ++m) {
    try {
      const SignSymbol b = csgn(samples[m] - level);
      out.stream.push_back(b);
      out.level_trace.push_back(level);
      est.window.push(b, level);
      est = update(std::move(est), est.window.sign_values(), params);
      if (!est.s_hat.all_finite()) throw numeric_error("estimate became non-finite");
      level = predict_level(est.s_hat, est.ops->p);
    } catch (const std::exception& e) {
      throw numeric_error("encode failed at sample " + std::to_string(m) + ": " + e.what());
    }
    if (record_states) out.state_trace->push_back(est.s_hat);
  }
  return out;
}

}  // namespace plc
