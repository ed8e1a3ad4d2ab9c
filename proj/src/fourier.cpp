#include "helicoid/fourier.hpp"

#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace helicoid {

Spectrum Spectrum::zeros(const GridGeometry& g, const VectorSpace& W) {
  Spectrum s;
  s.geom = g;
  s.W = W;
  s.bins.assign(W.total(), Eigen::ArrayXcd::Zero(g.total_points()));
  return s;
}

long long bin_of_freq(const GridGeometry& g, const std::vector<long long>& m) {
  const long long N = g.points_per_axis();
  long long idx = 0;
  for (int i = 0; i < g.d; ++i) {
    long long mi = m[i];
    if (mi < -N / 2 || mi >= N / 2) throw std::out_of_range("frequency beyond Nyquist");
    long long b = mi >= 0 ? mi : mi + N;
    idx = idx * N + b;
  }
  return idx;
}

std::vector<long long> freq_of_bin(const GridGeometry& g, long long bin_index) {
  const long long N = g.points_per_axis();
  std::vector<long long> m(g.d);
  for (int i = g.d - 1; i >= 0; --i) {
    long long b = bin_index % N;
    bin_index /= N;
    m[i] = b < N / 2 ? b : b - N;
  }
  return m;
}

namespace {

// In-place FFT along every axis of the flat array (last axis fastest).
void fft_all_axes(const GridGeometry& g, Eigen::ArrayXcd& a) {
  const long long N = g.points_per_axis();
  Eigen::FFT<double> fft;
  std::vector<Complex> line(N), out(N);
  for (int axis = g.d - 1; axis >= 0; --axis) {
    long long stride = 1;
    for (int i = axis + 1; i < g.d; ++i) stride *= N;
    const long long lines = a.size() / N;
    for (long long l = 0; l < lines; ++l) {
      // base index of the l-th line along this axis
      long long block = l / stride;
      long long offset = l % stride;
      long long base = block * stride * N + offset;
      for (long long i = 0; i < N; ++i) line[i] = a(base + i * stride);
      fft.fwd(out, line);
      for (long long i = 0; i < N; ++i) a(base + i * stride) = out[i];
    }
  }
}

}  // namespace

Spectrum fft(const GridFunction& f) {
  Spectrum s;
  s.geom = f.geom;
  s.W = f.W;
  s.bins.resize(f.data.size());
  const double scale = 1.0 / (double)f.geom.total_points();
  for (size_t w = 0; w < f.data.size(); ++w) {
    Eigen::ArrayXcd a = f.data[w];
    fft_all_axes(f.geom, a);
    s.bins[w] = a * scale;
  }
  return s;
}

GridFunction ifft(const Spectrum& s) {
  GridFunction f;
  f.geom = s.geom;
  f.W = s.W;
  f.data.resize(s.bins.size());
  for (size_t w = 0; w < s.bins.size(); ++w) {
    // sum_m fhat(m) e^{+2 pi i m.x/N} = conj(FFT(conj(fhat)))
    Eigen::ArrayXcd a = s.bins[w].conjugate();
    fft_all_axes(s.geom, a);
    f.data[w] = a.conjugate();
  }
  return f;
}

}  // namespace helicoid
