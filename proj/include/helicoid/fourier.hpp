#pragma once

#include "helicoid/gridfn.hpp"

namespace helicoid {

// Frequency-side view; bins[w](b) is the normalized coefficient
//   fhat(m) = N^{-d} sum_x f(x) e^{-2 pi i m.x / N},
// stored with bin index b per axis in [0, N) and frequency m = b or b - N.
struct Spectrum {
  GridGeometry geom;
  VectorSpace W;
  std::vector<Eigen::ArrayXcd> bins;

  static Spectrum zeros(const GridGeometry& g, const VectorSpace& W = VectorSpace());
};

long long bin_of_freq(const GridGeometry& g, const std::vector<long long>& m);
std::vector<long long> freq_of_bin(const GridGeometry& g, long long bin_index);

Spectrum fft(const GridFunction& f);
GridFunction ifft(const Spectrum& s);

}  // namespace helicoid
