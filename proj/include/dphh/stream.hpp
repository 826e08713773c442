#pragma once

// Stream ingestion and synthetic stream generation.
//
// Text format: one decimal item id per line, 1-based, values in [1, n].
// Binary format: 8-byte magic "DPHHSTR1" followed by little-endian unsigned
// 32-bit item ids.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dphh/prng.hpp"

namespace dphh {

inline constexpr char kStreamMagic[8] = {'D', 'P', 'H', 'H', 'S', 'T', 'R', '1'};

/// Input-layer failure: malformed lines, out-of-range ids, bad magic.
struct StreamIoError : std::runtime_error {
  explicit StreamIoError(const std::string& what) : std::runtime_error(what) {}
};

using Stream = std::vector<std::uint64_t>;

namespace detail {

inline Stream parse_text_stream(const std::string& text, std::uint64_t universe) {
  Stream out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos
                                                                 : eol - pos);
    pos = eol == std::string::npos ? text.size() : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (pos >= text.size()) break;  // trailing newline
      throw StreamIoError("line " + std::to_string(line_no) + ": empty line");
    }
    std::uint64_t value = 0;
    for (char c : line) {
      if (c < '0' || c > '9') {
        throw StreamIoError("line " + std::to_string(line_no) +
                            ": not a decimal unsigned integer: '" + line + "'");
      }
      value = value * 10 + static_cast<std::uint64_t>(c - '0');
      if (value > (std::uint64_t{1} << 62)) {
        throw StreamIoError("line " + std::to_string(line_no) + ": value overflow");
      }
    }
    if (value < 1 || value > universe) {
      throw StreamIoError("line " + std::to_string(line_no) + ": item " +
                          std::to_string(value) + " outside [1, " +
                          std::to_string(universe) + "]");
    }
    out.push_back(value);
  }
  return out;
}

inline Stream parse_binary_stream(const std::string& bytes, std::uint64_t universe) {
  if ((bytes.size() - 8) % 4 != 0) {
    throw StreamIoError("binary stream payload is not a whole number of records");
  }
  Stream out;
  out.reserve((bytes.size() - 8) / 4);
  for (std::size_t i = 8; i + 3 < bytes.size(); i += 4) {
    std::uint32_t v = static_cast<std::uint8_t>(bytes[i]) |
                      (static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[i + 1])) << 8) |
                      (static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[i + 2])) << 16) |
                      (static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[i + 3])) << 24);
    if (v < 1 || v > universe) {
      throw StreamIoError("record " + std::to_string((i - 8) / 4 + 1) + ": item " +
                          std::to_string(v) + " outside [1, " +
                          std::to_string(universe) + "]");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace detail

/// Parses either format, sniffing the binary magic. A file that begins with
/// the magic but is malformed is an error, not text.
inline Stream parse_stream(std::istream& in, std::uint64_t universe) {
  std::string bytes(std::istreambuf_iterator<char>(in), {});
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kStreamMagic, 8) == 0) {
    return detail::parse_binary_stream(bytes, universe);
  }
  // Reject binary-looking garbage early so the error names the right format.
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), "DPHH", 4) == 0) {
    throw StreamIoError("bad magic header");
  }
  return detail::parse_text_stream(bytes, universe);
}

inline void write_text_stream(std::ostream& out, const Stream& s) {
  for (auto v : s) out << v << '\n';
}

inline void write_binary_stream(std::ostream& out, const Stream& s) {
  out.write(kStreamMagic, 8);
  for (auto v : s) {
    if (v > 0xffffffffull) {
      throw StreamIoError("binary format holds 32-bit ids; item too large");
    }
    char rec[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                   static_cast<char>((v >> 16) & 0xff),
                   static_cast<char>((v >> 24) & 0xff)};
    out.write(rec, 4);
  }
}

struct GeneratorSpec {
  enum class Kind { kUniform, kZipf, kPlanted, kAllDistinct };

  Kind kind = Kind::kUniform;
  double zipf_exponent = 1.1;
  std::uint64_t planted_item = 1;
  double planted_mass = 0.5;
  std::uint64_t length = 0;
  std::uint64_t universe = 0;
  std::uint64_t seed = 0;

  /// Accepts "uniform", "zipf:<s>", "planted:<item>:<mass>", "all-distinct".
  static GeneratorSpec parse(const std::string& text) {
    GeneratorSpec spec;
    auto field = [&](const std::string& s, std::size_t from) {
      std::size_t colon = s.find(':', from);
      return std::pair{s.substr(from, colon == std::string::npos
                                          ? std::string::npos
                                          : colon - from),
                       colon == std::string::npos ? std::string::npos : colon + 1};
    };
    auto [head, rest] = field(text, 0);
    try {
      if (head == "uniform") {
        spec.kind = Kind::kUniform;
      } else if (head == "all-distinct" || head == "distinct") {
        spec.kind = Kind::kAllDistinct;
      } else if (head == "zipf") {
        spec.kind = Kind::kZipf;
        if (rest == std::string::npos) throw std::invalid_argument("zipf needs an exponent");
        spec.zipf_exponent = std::stod(text.substr(rest));
      } else if (head == "planted") {
        spec.kind = Kind::kPlanted;
        if (rest == std::string::npos) throw std::invalid_argument("planted needs item:mass");
        auto [item_s, rest2] = field(text, rest);
        if (rest2 == std::string::npos) throw std::invalid_argument("planted needs item:mass");
        spec.planted_item = std::stoull(item_s);
        spec.planted_mass = std::stod(text.substr(rest2));
      } else {
        throw std::invalid_argument("unknown generator kind '" + head + "'");
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed generator spec '" + text + "'");
    }
    return spec;
  }

  void validate() const {
    if (universe == 0) throw std::invalid_argument("generator universe must be >= 1");
    if (kind == Kind::kZipf && !(zipf_exponent > 0.0)) {
      throw std::invalid_argument("zipf exponent must be > 0");
    }
    if (kind == Kind::kPlanted) {
      if (planted_mass < 0.0 || planted_mass > 1.0) {
        throw std::invalid_argument("planted mass must be in [0, 1]");
      }
      if (planted_item < 1 || planted_item > universe) {
        throw std::invalid_argument("planted item outside universe");
      }
    }
  }
};

/// Deterministic function of the spec (including its seed).
inline Stream generate_stream(const GeneratorSpec& spec) {
  spec.validate();
  Splitmix64 g(derive_seed(spec.seed, 0x57e4, static_cast<std::uint64_t>(spec.kind)));
  Stream out(spec.length);
  switch (spec.kind) {
    case GeneratorSpec::Kind::kUniform: {
      for (auto& v : out) v = 1 + g.next_below(spec.universe);
      break;
    }
    case GeneratorSpec::Kind::kAllDistinct: {
      for (std::uint64_t i = 0; i < spec.length; ++i) {
        out[i] = 1 + (i % spec.universe);
      }
      break;
    }
    case GeneratorSpec::Kind::kZipf: {
      // Inverse-CDF sampling over rank weights j^(-s); item id equals rank.
      std::vector<double> cdf(spec.universe);
      double acc = 0.0;
      for (std::uint64_t j = 0; j < spec.universe; ++j) {
        acc += std::pow(static_cast<double>(j + 1), -spec.zipf_exponent);
        cdf[j] = acc;
      }
      for (auto& v : out) {
        double u = g.next_unit() * acc;
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        v = 1 + static_cast<std::uint64_t>(it - cdf.begin());
        if (v > spec.universe) v = spec.universe;
      }
      break;
    }
    case GeneratorSpec::Kind::kPlanted: {
      for (auto& v : out) v = 1 + g.next_below(spec.universe);
      auto copies = static_cast<std::uint64_t>(
          std::ceil(spec.planted_mass * static_cast<double>(spec.length)));
      copies = std::min(copies, spec.length);
      // Partial Fisher-Yates over positions: the first `copies` slots of a
      // virtual shuffle receive the planted item.
      std::vector<std::uint64_t> positions(spec.length);
      for (std::uint64_t i = 0; i < spec.length; ++i) positions[i] = i;
      for (std::uint64_t i = 0; i < copies; ++i) {
        std::uint64_t j = i + g.next_below(spec.length - i);
        std::swap(positions[i], positions[j]);
        out[positions[i]] = spec.planted_item;
      }
      break;
    }
  }
  return out;
}

}  // namespace dphh
