#include "helicoid/model.hpp"

#include <cmath>
#include <stdexcept>

namespace helicoid {

GridFunction apply(const ModelOperator& T, const std::vector<GridFunction>& fs) {
  const TileCollection& S = T.collection();
  if ((int)fs.size() != S.n) throw std::invalid_argument("apply: need n inputs");
  for (const auto& f : fs)
    if (f.geom.d != S.geom.d || f.geom.J != S.geom.J)
      throw std::invalid_argument("apply: resolution mismatch");
  const VectorSpace& W = fs[0].W;
  for (const auto& f : fs)
    if (f.W.total() != W.total()) throw std::invalid_argument("apply: W mismatch");

  GridFunction out = GridFunction::zeros(S.geom, W);
  const long long nw = W.total();
  for (long long w = 0; w < nw; ++w) {
    // spectra of the w-slices
    std::vector<Spectrum> fhat(S.n);
    for (int j = 0; j < S.n; ++j) {
      GridFunction slice = GridFunction::zeros(S.geom);
      slice.data[0] = fs[j].data[w];
      fhat[j] = fft(slice);
    }
    for (const auto& s : S.tiles) {
      Complex c(1, 0);
      for (int j = 0; j < S.n; ++j)
        c *= coefficient_scalar(fhat[j], T.cache().get(s.component(j)));
      if (c == Complex(0, 0)) continue;
      double vol = S.geom.spatial_cube_volume(s.spatial);
      c *= std::pow(vol, -0.5 * (S.n - 1));
      const WavePacket& pk = T.cache().get(s.component(S.n));
      out.data[w] += c * pk.values.data[0];
    }
  }
  return out;
}

namespace {

Complex plain_pair(const GridGeometry& g, const Spectrum& fhat, const WavePacket& pk) {
  const long long N = g.points_per_axis();
  Complex acc(0, 0);
  for (const auto& [b, v] : pk.freq_coeffs) {
    auto m = freq_of_bin(g, b);
    std::vector<long long> neg(m.size());
    for (size_t i = 0; i < m.size(); ++i) {
      neg[i] = -m[i];
      if (neg[i] == N / 2) neg[i] = -N / 2;
    }
    acc += fhat.bins[0](bin_of_freq(g, neg)) * v;
  }
  return acc;
}

}  // namespace

Complex form(const ModelOperator& T, const std::vector<GridFunction>& fs,
             const std::vector<size_t>& subset) {
  const TileCollection& S = T.collection();
  if ((int)fs.size() != S.n + 1) throw std::invalid_argument("form: need n+1 inputs");
  for (const auto& f : fs)
    if (!f.W.is_scalar()) throw std::invalid_argument("form: scalar inputs only");

  std::vector<Spectrum> fhat(S.n + 1);
  for (int j = 0; j <= S.n; ++j) fhat[j] = fft(fs[j]);

  // canonical order for a reproducible reduction
  std::vector<size_t> order = subset;
  std::sort(order.begin(), order.end());

  Complex acc(0, 0);
  for (size_t idx : order) {
    const MultiTile& s = S.tiles[idx];
    Complex c(1, 0);
    for (int j = 0; j < S.n; ++j)
      c *= coefficient_scalar(fhat[j], T.light_cache().get(s.component(j)));
    c *= plain_pair(S.geom, fhat[S.n], T.light_cache().get(s.component(S.n)));
    if (c == Complex(0, 0)) continue;
    acc += c * std::pow(S.geom.spatial_cube_volume(s.spatial), -0.5 * (S.n - 1));
  }
  return acc;
}

Complex form_full(const ModelOperator& T, const std::vector<GridFunction>& fs) {
  std::vector<size_t> all(T.collection().size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  return form(T, fs, all);
}

TreeFormResult tree_form_ratio(const ModelOperator& T, const Tree& tree,
                               const std::vector<GridFunction>& fs) {
  const TileCollection& S = T.collection();
  // the tree as its own collection: sizes are computed within the tree
  TileCollection sub;
  sub.geom = S.geom;
  sub.n = S.n;
  sub.k = S.k;
  sub.C0 = S.C0;
  sub.tiles = tree.members;
  sub.sort_canonical();
  ModelOperator Tsub(std::move(sub));
  std::vector<size_t> all(Tsub.collection().size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;

  TreeFormResult res;
  res.form_abs = std::abs(form(Tsub, fs, all));
  double bound = S.geom.spatial_cube_volume(tree.top.spatial);
  for (int j = 0; j <= S.n; ++j) {
    Eigen::ArrayXcd coefs =
        slot_coefficients(Tsub.collection(), Tsub.light_cache(), fs[j], j);
    bound *= size(Tsub.collection(), all, j, coefs, 0);
  }
  res.bound = bound;
  if (bound <= 0.0) {
    res.ratio = 0.0;
    res.anomaly = res.form_abs > 1e-14;
  } else {
    res.ratio = res.form_abs / bound;
  }
  return res;
}

}  // namespace helicoid
