#pragma once

#include <memory>

#include "helicoid/decomp.hpp"
#include "helicoid/wavepackets.hpp"

namespace helicoid {

// The discretized model operator attached to a finite rank-k collection:
//   T(f_1,...,f_n)(x) = sum_s |R_s|^{-(n-1)/2} prod_j <f_j, phi^j_{s_j}> phi^{n+1}_{s_{n+1}}(x).
class ModelOperator {
 public:
  explicit ModelOperator(TileCollection S, PacketOptions opt = {})
      : S_(std::move(S)), cache_(std::make_unique<PacketCache>(S_.geom, opt)) {
    PacketOptions light = opt;
    light.light = true;
    light_cache_ = std::make_unique<PacketCache>(S_.geom, light);
  }

  const TileCollection& collection() const { return S_; }
  PacketCache& cache() const { return *cache_; }
  // coefficient-only packets, enough for forms; spatial samples are never
  // synthesized on this path
  PacketCache& light_cache() const { return *light_cache_; }
  int n() const { return S_.n; }

 private:
  TileCollection S_;
  std::unique_ptr<PacketCache> cache_;
  std::unique_ptr<PacketCache> light_cache_;
};

// Exact sum over the finite collection; vector-valued inputs are handled per
// w independently. Tiles are accumulated in canonical order, so results are
// reproducible bitwise.
GridFunction apply(const ModelOperator& T, const std::vector<GridFunction>& fs);

// The (n+1)-linear form over a subset (indices into T.collection().tiles).
// Scalar inputs only.
Complex form(const ModelOperator& T, const std::vector<GridFunction>& fs,
             const std::vector<size_t>& subset);
Complex form_full(const ModelOperator& T, const std::vector<GridFunction>& fs);

struct TreeFormResult {
  double form_abs = 0.0;
  double bound = 0.0;  // prod_j size_T(<f_j,phi^j>) * |R_T|
  double ratio = 0.0;  // 0 when both vanish
  bool anomaly = false;
};

// Tree estimate as a measurable ratio (the implicit constant of the lemma).
TreeFormResult tree_form_ratio(const ModelOperator& T, const Tree& tree,
                               const std::vector<GridFunction>& fs);

}  // namespace helicoid
