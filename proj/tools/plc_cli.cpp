// Command-line front end: signal generation, encoding, the bit-flip channel,
// decoding with optional error correction, and the benchmark sweeps.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "plc/bench.hpp"
#include "plc/channel.hpp"
#include "plc/decoder.hpp"
#include "plc/encoder.hpp"
#include "plc/signal_io.hpp"
#include "plc/stream_io.hpp"

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  return f;
}

plc::ExperimentConfig config_or_default(const std::string& path) {
  return path.empty() ? plc::ExperimentConfig::desk() : plc::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-bit feedback acquisition and reconstruction of spectrum-sparse signals"};
  app.require_subcommand(1);

  // generate
  std::string gen_config, gen_out;
  std::size_t gen_run = 0;
  auto* gen = app.add_subcommand("generate", "Synthesize a test signal (first sparsity factor of the config)");
  gen->add_option("--config", gen_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "Output signal file (JSON)")->required();
  gen->add_option("--run", gen_run, "Run index; the signal equals that run of `bench table1`");

  // encode
  std::string enc_signal, enc_out, enc_config;
  auto* enc = app.add_subcommand("encode", "Run the transmitter loop over a signal and write the sign stream");
  enc->add_option("--signal", enc_signal, "Input signal file (JSON)")->required()->check(CLI::ExistingFile);
  enc->add_option("--out", enc_out, "Output stream file (LCSB)")->required();
  enc->add_option("--config", enc_config, "Experiment config supplying estimator settings")->check(CLI::ExistingFile);

  // corrupt
  std::string cor_in, cor_out, cor_flips;
  double cor_p = 0.0;
  std::uint64_t cor_seed = 0;
  auto* cor = app.add_subcommand("corrupt", "Flip stream bits independently with probability p");
  cor->add_option("--in", cor_in, "Input stream (LCSB)")->required()->check(CLI::ExistingFile);
  cor->add_option("--p", cor_p, "Flip probability per bit")->required()->check(CLI::Range(0.0, 0.5));
  cor->add_option("--seed", cor_seed, "Channel seed")->required();
  cor->add_option("--out", cor_out, "Output stream (LCSB)")->required();
  cor->add_option("--flips", cor_flips, "Optional CSV of true flip indicators (sample_index,re,im)");

  // decode
  std::string dec_in, dec_truth, dec_trace, dec_config;
  bool dec_ec = false;
  std::uint64_t dec_ec_seed = 0;
  auto* dec = app.add_subcommand("decode", "Reconstruct from a received stream");
  dec->add_option("--in", dec_in, "Input stream (LCSB)")->required()->check(CLI::ExistingFile);
  dec->add_flag("--ec", dec_ec, "Enable sign-flip error correction");
  dec->add_option("--ec-seed", dec_ec_seed, "Seed for the error-correction rounding");
  dec->add_option("--truth", dec_truth, "Ground-truth signal (JSON) for the mse_db column")->check(CLI::ExistingFile);
  dec->add_option("--trace", dec_trace, "Output CSV trace")->required();
  dec->add_option("--config", dec_config, "Experiment config supplying settings not stored in the stream")
      ->check(CLI::ExistingFile);

  // bench
  auto* bench = app.add_subcommand("bench", "Monte Carlo experiments");
  bench->require_subcommand(1);
  std::string t1_config, t1_out, og_config, og_out;
  auto* t1 = bench->add_subcommand("table1", "Mean final MSE per (k, p, EC) cell");
  t1->add_option("--config", t1_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  t1->add_option("--out", t1_out, "Output CSV")->required();
  auto* og = bench->add_subcommand("offgrid", "MSE trace with off-grid components");
  og->add_option("--config", og_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  og->add_option("--out", og_out, "Output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto cfg = plc::load_config(gen_config);
      const auto sig = plc::generate(cfg.signal_spec(cfg.sparsity_factors.front(), plc::signal_seed(cfg.master_seed, 0, gen_run)));
      plc::save_signal(gen_out, sig);
    } else if (*enc) {
      const auto cfg = config_or_default(enc_config);
      const auto sig = plc::load_signal(enc_signal);
      const auto res = plc::encode(sig.samples, sig.spec.grid, cfg.estimator);
      plc::save_stream(enc_out, {sig.spec.grid, cfg.estimator, res.stream.size()}, res.stream);
    } else if (*cor) {
      const auto parsed = plc::load_stream(cor_in);
      const auto res = plc::corrupt(parsed.stream, {cor_p, cor_seed});
      plc::save_stream(cor_out, parsed.header, res.corrupted);
      if (!cor_flips.empty()) {
        auto f = open_out(cor_flips);
        f << "sample_index,re,im\n";
        for (std::size_t m = 0; m < res.flips.size(); ++m)
          f << m << ',' << int(res.flips[m].re) << ',' << int(res.flips[m].im) << '\n';
      }
    } else if (*dec) {
      const auto cfg = config_or_default(dec_config);
      const auto parsed = plc::load_stream(dec_in, cfg.estimator);
      std::optional<plc::GeneratedSignal> truth;
      if (!dec_truth.empty()) {
        truth = plc::load_signal(dec_truth);
        if (!(truth->spec.grid == parsed.header.grid)) throw plc::invalid_argument("truth signal grid differs from stream grid");
        if (truth->size() < parsed.stream.size()) throw plc::invalid_argument("truth signal is shorter than the stream");
      }
      plc::EcParams ec = cfg.ec;
      ec.enabled = dec_ec;
      ec.seed = dec_ec_seed;
      std::vector<double> mse;
      plc::DecodeOptions opts;
      opts.record_states = false;
      if (truth) opts.on_state = [&](std::size_t m, const plc::SpectralState& s) { mse.push_back(plc::mse_db(truth->true_state(m), s)); };
      const auto res = plc::decode(parsed.stream, parsed.header.grid, parsed.header.params, ec, opts);
      auto f = open_out(dec_trace);
      f << "sample_index" << (truth ? ",mse_db" : "") << ",level_re,level_im,num_flips_estimated\n";
      for (std::size_t m = 0; m < res.level_trace.size(); ++m) {
        f << m;
        if (truth) f << ',' << plc::format_double(mse[m]);
        f << ',' << plc::format_double(res.level_trace[m].real()) << ',' << plc::format_double(res.level_trace[m].imag())
          << ',' << res.flips_estimated[m] << '\n';
      }
    } else if (*t1) {
      const auto cfg = plc::load_config(t1_config);
      const auto table = plc::run_table1(cfg);
      auto f = open_out(t1_out);
      plc::write_table1_csv(f, table);
    } else if (*og) {
      const auto cfg = plc::load_config(og_config);
      const auto res = plc::run_offgrid(cfg);
      auto f = open_out(og_out);
      plc::write_offgrid_csv(f, res);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
