#pragma once

#include <map>
#include <utility>
#include <vector>

#include "helicoid/fourier.hpp"
#include "helicoid/gridfn.hpp"

namespace helicoid {

enum class PacketProfile { RaisedCosine, GaussianTruncated };

struct PacketOptions {
  PacketProfile profile = PacketProfile::RaisedCosine;
  // support dilate of the frequency cube, default 99/100
  long long dilate_num = 99;
  long long dilate_den = 100;
  // light packets carry only the frequency coefficients (no spatial samples,
  // no adaptedness report); enough for coefficient pairings and forms
  bool light = false;
};

struct AdaptednessReport {
  // measured sup_x |phi(x)| (1 + dist(x,R)/ell)^{M'} / ell^{-d/2}
  std::map<int, double> constants;  // M' in {2, 4, 8}
  // same at M' = 4 for forward difference quotients of orders 1 and 2,
  // normalized by ell^{-d/2 - order}
  std::map<int, double> derivative_constants;
};

// L^2-normalized wave packet adapted to a tile. The frequency content is
// stored explicitly: freq_coeffs are exactly the nonzero bins, all of them
// inside the dilated frequency cube, so the support condition is exact by
// construction. values = inverse DFT of those coefficients.
struct WavePacket {
  GridGeometry geom;
  Tile tile;
  GridFunction values;  // scalar; empty for light packets
  std::vector<std::pair<long long, Complex>> freq_coeffs;  // (bin index, coeff)
  AdaptednessReport adaptedness;
};

// Throws std::invalid_argument ("resolution") when the frequency cube does
// not fit inside [-N/2, N/2)^d. At unit frequency scale (sidelength 1) the
// integer lattice meets the open 99/100-core nowhere, so the packet
// degenerates to the pure exponential of the cube's corner bin.
WavePacket build_packet(const GridGeometry& g, const Tile& tile, PacketOptions opt = {});

// <f, phi> per w, via Parseval restricted to the packet's exact support.
std::vector<Complex> coefficient(const Spectrum& fhat, const WavePacket& packet);
Complex coefficient_scalar(const Spectrum& fhat, const WavePacket& packet);

// Exact inner product of two packets over the stored bins.
Complex packet_inner(const WavePacket& a, const WavePacket& b);

// Shared per-collection cache keyed by tile identity.
class PacketCache {
 public:
  explicit PacketCache(GridGeometry g, PacketOptions opt = {}) : geom_(g), opt_(opt) {}
  const WavePacket& get(const Tile& t);
  const GridGeometry& geom() const { return geom_; }

 private:
  struct TileKey {
    std::vector<long long> v;
    bool operator<(const TileKey& o) const { return v < o.v; }
  };
  static TileKey key_of(const Tile& t);

  GridGeometry geom_;
  PacketOptions opt_;
  std::map<TileKey, WavePacket> cache_;
};

}  // namespace helicoid
