#include "helicoid/wavepackets.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <cmath>
#include <stdexcept>

namespace helicoid {

namespace {

// Integer test for m in the concentric (num/den)-dilate of the axis
// interval of omega: |m - c| < (num/den) * ell/2, cleared of denominators.
// All quantities fit comfortably in int64 at desk scales.
bool bin_in_core(const DyadicCube& omega, int axis, long long m, long long num,
                 long long den) {
  // c = 2^s (lo3 + 1.5)/3, ell = 2^s; condition times 6*den:
  // |6*den*m - den*2^s*(2*lo3+3)| < 3*num*2^s
  long long s2 = 1LL << omega.scale;
  long long lhs = 6 * den * m - den * s2 * (2 * omega.lo3(axis) + 3);
  long long rhs = 3 * num * s2;
  return std::llabs(lhs) < rhs;
}

bool bin_in_cube(const DyadicCube& omega, int axis, long long m) {
  // m >= lo  <=>  3m >= lo3 * 2^s ; m < hi likewise
  long long s2 = 1LL << omega.scale;
  return 3 * m >= omega.lo3(axis) * s2 && 3 * m < omega.hi3(axis) * s2;
}

double profile_value(PacketProfile profile, double u) {
  switch (profile) {
    case PacketProfile::RaisedCosine: {
      double c = std::cos(0.5 * M_PI * u);
      return c * c;
    }
    case PacketProfile::GaussianTruncated:
      return std::exp(-4.5 * u * u);
  }
  return 0.0;
}

}  // namespace

WavePacket build_packet(const GridGeometry& g, const Tile& tile, PacketOptions opt) {
  const long long N = g.points_per_axis();
  const DyadicCube& omega = tile.freq;
  if (omega.scale < 0 || omega.scale > g.J)
    throw std::invalid_argument("resolution: frequency scale outside [0,J]");
  for (int i = 0; i < g.d; ++i) {
    long long s2 = 1LL << omega.scale;
    if (omega.lo3(i) * s2 < -3 * (N / 2) || omega.hi3(i) * s2 > 3 * (N / 2))
      throw std::invalid_argument("resolution: frequency cube beyond Nyquist");
  }

  // enumerate admissible bins per axis
  std::vector<std::vector<long long>> axis_bins(g.d);
  std::vector<std::vector<double>> axis_values(g.d);
  const bool degenerate = (omega.scale == 0);
  for (int i = 0; i < g.d; ++i) {
    double c = omega.center(i);
    double halfcore = (double)opt.dilate_num / (double)opt.dilate_den *
                      std::ldexp(0.5, omega.scale);
    long long lo = (long long)std::floor(c - halfcore) - 1;
    long long hi = (long long)std::ceil(c + halfcore) + 1;
    for (long long m = lo; m <= hi; ++m) {
      if (!bin_in_cube(omega, i, m)) continue;
      if (degenerate) {
        axis_bins[i].push_back(m);
        axis_values[i].push_back(1.0);
        continue;
      }
      if (!bin_in_core(omega, i, m, opt.dilate_num, opt.dilate_den)) continue;
      double u = (m - c) / halfcore;
      axis_bins[i].push_back(m);
      axis_values[i].push_back(profile_value(opt.profile, u));
    }
    if (axis_bins[i].empty())
      throw std::invalid_argument("resolution: no admissible bins for the frequency cube");
  }

  // spatial center in torus units
  std::vector<double> cR(g.d);
  for (int i = 0; i < g.d; ++i)
    cR[i] = ((double)tile.spatial.corner[i] + 0.5) * std::ldexp(1.0, tile.spatial.scale) /
            (double)N;

  WavePacket pk;
  pk.geom = g;
  pk.tile = tile;
  Spectrum spec = Spectrum::zeros(g);
  double norm2 = 0.0;
  std::vector<size_t> pos(g.d, 0);
  for (;;) {
    std::vector<long long> m(g.d);
    double amp = 1.0;
    double phase = 0.0;
    for (int i = 0; i < g.d; ++i) {
      m[i] = axis_bins[i][pos[i]];
      amp *= axis_values[i][pos[i]];
      phase -= 2.0 * M_PI * (double)m[i] * cR[i];
    }
    if (amp != 0.0) {
      Complex v = amp * std::exp(Complex(0.0, phase));
      long long b = bin_of_freq(g, m);
      spec.bins[0](b) = v;
      pk.freq_coeffs.emplace_back(b, v);
      norm2 += std::norm(v);
    }
    int axis = g.d - 1;
    for (; axis >= 0; --axis) {
      if (++pos[axis] < axis_bins[axis].size()) break;
      pos[axis] = 0;
    }
    if (axis < 0) break;
  }
  if (norm2 == 0.0) throw std::invalid_argument("resolution: empty packet");
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& [b, v] : pk.freq_coeffs) v *= inv;
  std::sort(pk.freq_coeffs.begin(), pk.freq_coeffs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (opt.light) return pk;
  spec.bins[0] *= inv;
  pk.values = ifft(spec);

  // measured spatial adaptedness. Distances here are to the continuum
  // closure of the cube (not between sample cells): matched sample points
  // then carry identical weights across refinements, which is what makes
  // the measured constants refinement-stable.
  const double elld2 = std::ldexp(1.0, -(tile.spatial.scale - g.J) * g.d);  // ell^{-d}
  const double ell = std::ldexp(1.0, tile.spatial.scale - g.J);
  for (int M : {2, 4, 8}) {
    double worst = 0.0;
    for (long long i = 0; i < pk.values.npoints(); ++i) {
      auto coords = grid_coords(g, i);
      double d2 = 0.0;
      for (int ax = 0; ax < g.d; ++ax) {
        double x = (double)coords[ax] / (double)N;
        double lo = (double)(tile.spatial.corner[ax] << tile.spatial.scale) / (double)N;
        double hi = lo + ell;
        double gap = 1.0;
        for (int t = -1; t <= 1; ++t) {
          double xs = x + t;
          double gg = xs < lo ? lo - xs : (xs > hi ? xs - hi : 0.0);
          gap = std::min(gap, gg);
        }
        d2 += gap * gap;
      }
      double weight = std::pow(1.0 + std::sqrt(d2) / ell, (double)M);
      worst = std::max(worst, std::abs(pk.values.data[0](i)) * weight);
    }
    pk.adaptedness.constants[M] = worst / std::sqrt(elld2);
  }
  // difference-quotient adaptedness up to order 2 (axis 0, M' = 4)
  {
    const long long stride = [&] {
      long long st = 1;
      for (int i = 1; i < g.d; ++i) st *= N;
      return st;
    }();
    auto sample = [&](long long i, int order) {
      const auto& a = pk.values.data[0];
      long long n1 = (i + stride) % a.size();
      if (order == 1) return (a(n1) - a(i)) * (double)N;
      long long n2 = (i + 2 * stride) % a.size();
      return (a(n2) - 2.0 * a(n1) + a(i)) * (double)N * (double)N;
    };
    for (int order : {1, 2}) {
      double worst = 0.0;
      for (long long i = 0; i < pk.values.npoints(); ++i) {
        auto coords = grid_coords(g, i);
        double x = (double)coords[0] / (double)N;
        double lo = (double)(tile.spatial.corner[0] << tile.spatial.scale) / (double)N;
        double hi = lo + ell;
        double gap = 1.0;
        for (int t = -1; t <= 1; ++t) {
          double xs = x + t;
          double gg = xs < lo ? lo - xs : (xs > hi ? xs - hi : 0.0);
          gap = std::min(gap, gg);
        }
        double weight = std::pow(1.0 + gap / ell, 4.0);
        worst = std::max(worst, std::abs(sample(i, order)) * weight);
      }
      pk.adaptedness.derivative_constants[order] =
          worst / (std::sqrt(elld2) * std::pow(ell, -(double)order));
    }
  }
  return pk;
}

std::vector<Complex> coefficient(const Spectrum& fhat, const WavePacket& packet) {
  if (fhat.geom.d != packet.geom.d || fhat.geom.J != packet.geom.J)
    throw std::invalid_argument("resolution mismatch");
  std::vector<Complex> out(fhat.bins.size(), Complex(0, 0));
  for (size_t w = 0; w < fhat.bins.size(); ++w)
    for (const auto& [b, v] : packet.freq_coeffs) out[w] += fhat.bins[w](b) * std::conj(v);
  return out;
}

Complex coefficient_scalar(const Spectrum& fhat, const WavePacket& packet) {
  return coefficient(fhat, packet)[0];
}

Complex packet_inner(const WavePacket& a, const WavePacket& b) {
  // both supports are sparse; walk the shorter one through a map-free merge
  Complex acc(0, 0);
  size_t i = 0, j = 0;
  while (i < a.freq_coeffs.size() && j < b.freq_coeffs.size()) {
    long long ba = a.freq_coeffs[i].first, bb = b.freq_coeffs[j].first;
    if (ba == bb) {
      acc += a.freq_coeffs[i].second * std::conj(b.freq_coeffs[j].second);
      ++i;
      ++j;
    } else if (ba < bb) {
      ++i;
    } else {
      ++j;
    }
  }
  return acc;
}

PacketCache::TileKey PacketCache::key_of(const Tile& t) {
  TileKey k;
  k.v.push_back(t.spatial.scale);
  for (auto c : t.spatial.corner) k.v.push_back(c);
  k.v.push_back(t.freq.scale);
  for (int i = 0; i < t.freq.dim; ++i) {
    k.v.push_back(t.freq.corner[i]);
    k.v.push_back(t.freq.shift_at(i));
  }
  return k;
}

namespace {

// best-effort disk persistence under HELICOID_CACHE: frequency coefficients
// only (complex128); the spatial samples are re-synthesized on load
std::string cache_path(const GridGeometry& g, const PacketOptions& opt,
                       const std::vector<long long>& key) {
  const char* dir = std::getenv("HELICOID_CACHE");
  if (!dir || !*dir) return {};
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](long long v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (unsigned char)(v >> (8 * b));
      h *= 1099511628211ull;
    }
  };
  mix(g.d);
  mix(g.J);
  mix((int)opt.profile);
  mix(opt.dilate_num);
  mix(opt.dilate_den);
  for (long long v : key) mix(v);
  return std::string(dir) + "/pk_" + std::to_string(h) + ".bin";
}

bool load_cached_packet(const std::string& path, const GridGeometry& g, const Tile& t,
                        WavePacket& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in || count == 0 || count > (std::uint64_t)g.total_points()) return false;
  Spectrum spec = Spectrum::zeros(g);
  out.geom = g;
  out.tile = t;
  out.freq_coeffs.clear();
  for (std::uint64_t i = 0; i < count; ++i) {
    long long bin = 0;
    double re = 0, im = 0;
    in.read(reinterpret_cast<char*>(&bin), sizeof(bin));
    in.read(reinterpret_cast<char*>(&re), sizeof(re));
    in.read(reinterpret_cast<char*>(&im), sizeof(im));
    if (!in || bin < 0 || bin >= g.total_points()) return false;
    Complex v(re, im);
    spec.bins[0](bin) = v;
    out.freq_coeffs.emplace_back(bin, v);
  }
  int n_adapt = 0;
  in.read(reinterpret_cast<char*>(&n_adapt), sizeof(n_adapt));
  if (!in) return false;
  for (int i = 0; i < n_adapt; ++i) {
    int M = 0;
    double c = 0;
    in.read(reinterpret_cast<char*>(&M), sizeof(M));
    in.read(reinterpret_cast<char*>(&c), sizeof(c));
    if (!in) return false;
    out.adaptedness.constants[M] = c;
  }
  out.values = ifft(spec);
  return true;
}

void store_cached_packet(const std::string& path, const WavePacket& pk) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return;
  std::uint64_t count = pk.freq_coeffs.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& [bin, v] : pk.freq_coeffs) {
    double re = v.real(), im = v.imag();
    out.write(reinterpret_cast<const char*>(&bin), sizeof(bin));
    out.write(reinterpret_cast<const char*>(&re), sizeof(re));
    out.write(reinterpret_cast<const char*>(&im), sizeof(im));
  }
  int n_adapt = (int)pk.adaptedness.constants.size();
  out.write(reinterpret_cast<const char*>(&n_adapt), sizeof(n_adapt));
  for (const auto& [M, c] : pk.adaptedness.constants) {
    out.write(reinterpret_cast<const char*>(&M), sizeof(M));
    out.write(reinterpret_cast<const char*>(&c), sizeof(c));
  }
}

}  // namespace

const WavePacket& PacketCache::get(const Tile& t) {
  TileKey k = key_of(t);
  auto it = cache_.find(k);
  if (it != cache_.end()) return it->second;
  std::string disk = opt_.light ? std::string() : cache_path(geom_, opt_, k.v);
  if (!disk.empty()) {
    WavePacket loaded;
    if (load_cached_packet(disk, geom_, t, loaded))
      return cache_.emplace(std::move(k), std::move(loaded)).first->second;
  }
  WavePacket built = build_packet(geom_, t, opt_);
  if (!disk.empty()) store_cached_packet(disk, built);
  return cache_.emplace(std::move(k), std::move(built)).first->second;
}

}  // namespace helicoid
