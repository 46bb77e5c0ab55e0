#pragma once

// Binary sign-stream container ("LCSB").
//
// All integers and floats are little-endian:
//
//   "LCSB"            4 bytes
//   version           u16 (= 1)
//   N                 u32
//   M                 u32
//   tau               f64
//   grid tag          u8   0: uniform imaginary grid -> omega0 f64, count u32
//                          1: explicit list          -> N x (re f64, im f64)
//   lambda1 lambda2 sigma0 delta0 sigma_growth delta_growth   6 x f64
//   sample_count      u64
//   payload           2 bits per sample, 4 samples per byte, LSB first;
//                     bit0 = real sign, bit1 = imaginary sign (1 => +1)

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "plc/core.hpp"
#include "plc/estimator.hpp"

namespace plc {

class format_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a receiver needs besides the bits. Estimator settings that
/// are not stored (caps, linearization point, case-2 rule) take the values
/// passed as `defaults` when reading.
struct StreamHeader {
  FrequencyGrid grid;
  EstimatorParams params;
  std::uint64_t sample_count = 0;
};

inline constexpr std::array<char, 4> kStreamMagic{'L', 'C', 'S', 'B'};
inline constexpr std::uint16_t kStreamVersion = 1;

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  std::uint64_t bits = 0;
  if constexpr (std::is_floating_point_v<T>)
    bits = std::bit_cast<std::uint64_t>(static_cast<double>(value));
  else
    bits = static_cast<std::uint64_t>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > data_.size()) throw format_error("stream truncated");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    if constexpr (std::is_same_v<T, double>)
      return std::bit_cast<double>(bits);
    else
      return static_cast<T>(bits);
  }

  [[nodiscard]] std::size_t remaining() const { return data_.size() - pos_; }
  [[nodiscard]] std::span<const std::uint8_t> rest() const { return data_.subspan(pos_); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> write_stream(const StreamHeader& header, const SignStream& stream) {
  if (header.sample_count != stream.size()) throw invalid_argument("write_stream: header sample count differs from stream length");
  const FrequencyGrid& g = header.grid;
  std::vector<std::uint8_t> out(kStreamMagic.begin(), kStreamMagic.end());
  detail::put_le<std::uint16_t>(out, kStreamVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.n()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.window_len()));
  detail::put_le<double>(out, g.tau());
  if (g.is_uniform_imaginary()) {
    detail::put_le<std::uint8_t>(out, 0);
    detail::put_le<double>(out, g.omega0());
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.n()));
  } else {
    detail::put_le<std::uint8_t>(out, 1);
    for (cplx z : g.exponents()) {
      detail::put_le<double>(out, z.real());
      detail::put_le<double>(out, z.imag());
    }
  }
  const EstimatorParams& p = header.params;
  for (double v : {p.lambda1, p.lambda2, p.sigma0, p.delta0, p.sigma_growth, p.delta_growth})
    detail::put_le<double>(out, v);
  detail::put_le<std::uint64_t>(out, header.sample_count);

  const std::size_t payload_start = out.size();
  out.resize(payload_start + (stream.size() + 3) / 4, 0);
  for (std::size_t m = 0; m < stream.size(); ++m) {
    const unsigned bits = (stream[m].re_positive ? 1u : 0u) | (stream[m].im_positive ? 2u : 0u);
    out[payload_start + m / 4] |= static_cast<std::uint8_t>(bits << (2 * (m % 4)));
  }
  return out;
}

struct ParsedStream {
  StreamHeader header;
  SignStream stream;
};

inline ParsedStream read_stream(std::span<const std::uint8_t> bytes, const EstimatorParams& defaults = {}) {
  if (bytes.size() < 4 || !std::equal(kStreamMagic.begin(), kStreamMagic.end(), bytes.begin()))
    throw format_error("bad magic: not an LCSB stream");
  detail::Reader in(bytes.subspan(4));
  if (const auto version = in.get<std::uint16_t>(); version != kStreamVersion)
    throw format_error("unsupported stream version " + std::to_string(version));
  const auto n = in.get<std::uint32_t>();
  const auto m = in.get<std::uint32_t>();
  const double tau = in.get<double>();
  const auto tag = in.get<std::uint8_t>();

  std::optional<FrequencyGrid> grid;
  try {
    if (tag == 0) {
      const double omega0 = in.get<double>();
      const auto count = in.get<std::uint32_t>();
      if (count != n) throw format_error("uniform grid count differs from N");
      grid = FrequencyGrid::uniform_imaginary(n, omega0, tau, m);
    } else if (tag == 1) {
      std::vector<cplx> z(n);
      for (auto& v : z) {
        const double re = in.get<double>();
        const double im = in.get<double>();
        v = cplx(re, im);
      }
      grid.emplace(std::move(z), tau, m);
    } else {
      throw format_error("unknown grid encoding tag " + std::to_string(tag));
    }
  } catch (const invalid_argument& e) {
    throw format_error(std::string("invalid grid in stream header: ") + e.what());
  }

  EstimatorParams params = defaults;
  params.lambda1 = in.get<double>();
  params.lambda2 = in.get<double>();
  params.sigma0 = in.get<double>();
  params.delta0 = in.get<double>();
  params.sigma_growth = in.get<double>();
  params.delta_growth = in.get<double>();
  const auto count = in.get<std::uint64_t>();

  const std::size_t payload = (count + 3) / 4;
  if (in.remaining() != payload)
    throw format_error("payload is " + std::to_string(in.remaining()) + " bytes, expected " + std::to_string(payload));
  const auto data = in.rest();
  ParsedStream out{StreamHeader{std::move(*grid), params, count}, {}};
  out.stream.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const unsigned bits = (data[k / 4] >> (2 * (k % 4))) & 3u;
    out.stream[k] = SignSymbol{(bits & 1u) != 0, (bits & 2u) != 0};
  }
  return out;
}

inline void save_stream(const std::string& path, const StreamHeader& header, const SignStream& stream) {
  const auto bytes = write_stream(header, stream);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

inline ParsedStream load_stream(const std::string& path, const EstimatorParams& defaults = {}) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return read_stream(bytes, defaults);
}

}  // namespace plc
