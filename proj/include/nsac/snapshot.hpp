#pragma once
// Binary state snapshots.  Little-endian, explicit layout, trailing FNV-1a
// checksum over everything before it.  A snapshot pins the model parameters
// it was produced with; restarting against a different configuration is an
// error rather than a silent reinterpretation.
//
//   8   magic "NSACSNAP"
//   u32 version (currently 1)
//   u32 dim, u32 n
//   f64 t
//   f64 kappa, delta, sigma, epsilon
//   u32 reg_mode, u32 truncation_n, u32 potential_kind, u32 ncoeff
//   f64 coeffs[ncoeff]
//   u64 payload_bytes
//   payload: u components, then phi, then pi; each coefficient re,im as f64
//   u64 checksum

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include <nsac/errors.hpp>
#include <nsac/ioutil.hpp>
#include <nsac/model.hpp>

namespace nsac {

namespace detail {

inline constexpr char kSnapshotMagic[8] = {'N', 'S', 'A', 'C', 'S', 'N', 'A', 'P'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

inline std::uint64_t fnv1a64(const unsigned char* p, std::size_t len) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline void append_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b += static_cast<char>((v >> (8 * i)) & 0xff);
}

inline void append_u64(std::string& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b += static_cast<char>((v >> (8 * i)) & 0xff);
}

inline void append_f64(std::string& b, double v) {
  append_u64(b, std::bit_cast<std::uint64_t>(v));
}

struct ByteReader {
  const unsigned char* p;
  std::size_t size;
  std::size_t pos = 0;

  void need(std::size_t k) const {
    if (pos + k > size) throw SnapshotError("snapshot: truncated file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
};

}  // namespace detail

struct SnapshotHeader {
  std::uint32_t version = 0;
  int dim = 0;
  int n = 0;
  double t = 0.0;
  ModelParams params;
};

inline std::string serialize_snapshot(const SystemState& s, const ModelParams& mp) {
  using namespace detail;
  const Grid& g = s.grid();
  std::string b;
  b.append(kSnapshotMagic, sizeof kSnapshotMagic);
  append_u32(b, kSnapshotVersion);
  append_u32(b, static_cast<std::uint32_t>(g.dim()));
  append_u32(b, static_cast<std::uint32_t>(g.n()));
  append_f64(b, s.t);
  append_f64(b, mp.kappa);
  append_f64(b, mp.delta);
  append_f64(b, mp.sigma);
  append_f64(b, mp.epsilon);
  append_u32(b, mp.reg_mode == RegMode::linear ? 0u : 1u);
  append_u32(b, static_cast<std::uint32_t>(mp.truncation_n));
  append_u32(b, mp.potential.kind() == PotentialKind::double_well ? 0u : 1u);
  append_u32(b, static_cast<std::uint32_t>(mp.potential.coeffs().size()));
  for (double c : mp.potential.coeffs()) append_f64(b, c);
  const std::uint64_t nfields = static_cast<std::uint64_t>(g.dim()) + 2;
  append_u64(b, nfields * g.size() * 16);
  auto put_field = [&](const SpectralField& f) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      append_f64(b, f[i].real());
      append_f64(b, f[i].imag());
    }
  };
  for (int a = 0; a < g.dim(); ++a) put_field(s.u.comp(a));
  put_field(s.phi);
  put_field(s.pi);
  append_u64(b, fnv1a64(reinterpret_cast<const unsigned char*>(b.data()), b.size()));
  return b;
}

inline void write_snapshot(const std::string& path, const SystemState& s, const ModelParams& mp) {
  ioutil::write_text_file(path, serialize_snapshot(s, mp));
}

namespace detail {

// Verifies magic, version, and checksum; leaves the reader at the coefficient
// payload and fills the header.
inline ByteReader open_snapshot(const std::string& bytes, SnapshotHeader& h) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < sizeof kSnapshotMagic + 8)
    throw SnapshotError("snapshot: truncated file");
  if (!std::equal(kSnapshotMagic, kSnapshotMagic + sizeof kSnapshotMagic, bytes.data()))
    throw SnapshotError("snapshot: bad magic (not a snapshot file)");
  const std::size_t body = bytes.size() - 8;
  ByteReader tail{p, bytes.size(), body};
  if (tail.u64() != fnv1a64(p, body))
    throw SnapshotError("snapshot: checksum mismatch (file is corrupt)");
  ByteReader r{p, body, sizeof kSnapshotMagic};
  h.version = r.u32();
  if (h.version != kSnapshotVersion)
    throw SnapshotError("snapshot: unsupported version " + std::to_string(h.version));
  h.dim = static_cast<int>(r.u32());
  h.n = static_cast<int>(r.u32());
  h.t = r.f64();
  h.params.kappa = r.f64();
  h.params.delta = r.f64();
  h.params.sigma = r.f64();
  h.params.epsilon = r.f64();
  const std::uint32_t reg = r.u32();
  if (reg > 1) throw SnapshotError("snapshot: bad regularization tag");
  h.params.reg_mode = reg == 0 ? RegMode::linear : RegMode::variational;
  h.params.truncation_n = static_cast<int>(r.u32());
  const std::uint32_t pk = r.u32();
  if (pk > 1) throw SnapshotError("snapshot: bad potential tag");
  const std::uint32_t nc = r.u32();
  if (nc > 64) throw SnapshotError("snapshot: implausible coefficient count");
  std::vector<double> coeffs(nc);
  for (auto& c : coeffs) c = r.f64();
  if (pk == 0) {
    h.params.potential = Potential::double_well();
    if (coeffs != h.params.potential.coeffs())
      throw SnapshotError("snapshot: double-well tag with foreign coefficients");
  } else {
    try {
      h.params.potential = Potential::polynomial(coeffs);
    } catch (const std::invalid_argument& e) {
      throw SnapshotError(std::string("snapshot: ") + e.what());
    }
  }
  return r;
}

}  // namespace detail

inline SnapshotHeader read_snapshot_header(const std::string& path) {
  SnapshotHeader h;
  detail::open_snapshot(ioutil::read_text_file(path), h);
  return h;
}

// Restores a state.  The snapshot must have been produced on the same grid
// with the same model parameters; anything else throws.
inline SystemState read_snapshot(const std::string& path, const Grid& g, const ModelParams& mp) {
  const std::string bytes = ioutil::read_text_file(path);
  SnapshotHeader h;
  detail::ByteReader r = detail::open_snapshot(bytes, h);
  if (h.dim != g.dim() || h.n != g.n())
    throw SnapshotError("snapshot: grid " + std::to_string(h.dim) + "d n=" + std::to_string(h.n) +
                        " does not match requested " + std::to_string(g.dim()) +
                        "d n=" + std::to_string(g.n()));
  const bool same = h.params.kappa == mp.kappa && h.params.delta == mp.delta &&
                    h.params.sigma == mp.sigma && h.params.epsilon == mp.epsilon &&
                    h.params.reg_mode == mp.reg_mode &&
                    h.params.truncation_n == mp.truncation_n &&
                    h.params.potential == mp.potential;
  if (!same)
    throw SnapshotError("snapshot: model parameters differ from the requested configuration");
  const std::uint64_t expect = (std::uint64_t(g.dim()) + 2) * g.size() * 16;
  if (r.u64() != expect) throw SnapshotError("snapshot: payload size mismatch");
  SystemState s(g);
  s.t = h.t;
  auto get_field = [&](SpectralField& f) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double re = r.f64();
      const double im = r.f64();
      f[i] = cplx{re, im};
    }
  };
  for (int a = 0; a < g.dim(); ++a) get_field(s.u.comp(a));
  get_field(s.phi);
  get_field(s.pi);
  return s;
}

}  // namespace nsac
