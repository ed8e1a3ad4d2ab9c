#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace helicoid {

// Axis-aligned dyadic cube with optional per-axis thirds shift. A cube of
// shift family rho spans, on axis i,
//   [2^scale (corner_i + (-1)^scale rho_i/3), 2^scale (corner_i + 1 + (-1)^scale rho_i/3));
// the parity sign is what makes each fixed-shift family a lattice across
// scales. Endpoints times 3 are integers at the cube's own scale, so all
// lattice relations are decided in exact integer arithmetic.
struct DyadicCube {
  int dim = 0;
  int scale = 0;  // sidelength 2^scale in the ambient unit system
  std::vector<long long> corner;
  std::vector<std::int8_t> shift3;  // entries in {-1,0,1}; empty = unshifted

  static DyadicCube unit(int dim, int scale, std::vector<long long> corner);

  bool shifted() const;
  std::int8_t shift_at(int axis) const { return shift3.empty() ? 0 : shift3[axis]; }
  // Endpoints scaled by 3 at this cube's scale: value = lo3 * 2^scale / 3.
  long long lo3(int axis) const {
    int sign = (scale & 1) ? -1 : 1;
    return 3 * corner[axis] + sign * shift_at(axis);
  }
  long long hi3(int axis) const { return lo3(axis) + 3; }

  double sidelength() const;         // 2^scale
  double volume() const;             // 2^(scale*dim)
  double center(int axis) const;     // in ambient units
  double lo(int axis) const;
  double hi(int axis) const;

  friend bool operator==(const DyadicCube& a, const DyadicCube& b);
  friend bool operator<(const DyadicCube& a, const DyadicCube& b);  // canonical order
  std::string str() const;
};

// Exact interval/box relations (C is an odd concentric dilation factor).
bool cube_subset(const DyadicCube& inner, const DyadicCube& outer);
bool cube_strict_subset(const DyadicCube& inner, const DyadicCube& outer);
bool cube_disjoint(const DyadicCube& a, const DyadicCube& b);
bool cube_subset_of_dilate(const DyadicCube& inner, const DyadicCube& outer, int dilate);
bool axis_interval_subset_of_dilate(const DyadicCube& inner, const DyadicCube& outer,
                                    int axis, int dilate);
bool axis_intervals_disjoint(const DyadicCube& a, const DyadicCube& b, int axis);

// The fixed-shift lattice property: two cubes from the same shift family are
// disjoint or nested.
bool lattice_compatible(const DyadicCube& a, const DyadicCube& b);

// --- torus discretization -----------------------------------------------

// Torus [0,1)^d sampled at N = 2^J points per axis. Spatial cubes live in
// grid-cell units (sidelength 2^sg cells, scale sg in [0..J]); frequency
// cubes in integer-frequency units (sidelength 2^e, e = J - sg, so the
// spatial sidelength 2^(sg-J) times 2^e is exactly 1).
struct GridGeometry {
  int d = 1;
  int J = 4;

  long long points_per_axis() const { return 1LL << J; }
  long long total_points() const;
  double spatial_cube_volume(const DyadicCube& spatial) const;  // torus measure
  double spatial_sidelength(const DyadicCube& spatial) const;   // torus units
};

struct Tile {
  DyadicCube spatial;  // unshifted, grid units
  DyadicCube freq;     // shifted allowed, frequency units
};

struct MultiTile {
  DyadicCube spatial;
  std::vector<DyadicCube> freqs;  // n+1 components

  Tile component(int j) const { return Tile{spatial, freqs[j]}; }
  friend bool operator==(const MultiTile& a, const MultiTile& b);
  friend bool operator<(const MultiTile& a, const MultiTile& b);
};

// Validates the area-1 coupling and torus placement of a tile.
bool tile_well_formed(const GridGeometry& g, const Tile& t, std::string* why = nullptr);
bool multitile_well_formed(const GridGeometry& g, const MultiTile& s, std::string* why = nullptr);

struct TileCollection {
  GridGeometry geom;
  int n = 2;
  int k = 1;
  // Companion dilation constant of the collection: the generator sets it
  // large enough that the order-propagation clauses of the rank definition
  // hold for this geometry. 9 is the floor for hand-made collections.
  int C0 = 9;
  std::vector<MultiTile> tiles;

  int arity() const { return n + 1; }
  size_t size() const { return tiles.size(); }
  void sort_canonical();
};

// Smallest odd dilate C such that every pair satisfying the <=-hypothesis on
// some k slots (with nested spatial cubes) is lesssim-comparable in every
// slot at dilate C; floored at 9.
int companion_dilate(const TileCollection& S);

// --- order relations ------------------------------------------------------

enum class TileOrder { Lt, Le, Lesssim, LesssimPrime };

// tile_order(a, b, Lt) decides a < b:  R_a strictly inside R_b and
// omega_b inside 3*omega_a; Lesssim uses the configurable dilate C0.
bool tile_order(const Tile& a, const Tile& b, TileOrder rel, int C0 = 9);

// --- rank-k -----------------------------------------------------------------

struct RankCheckResult {
  bool ok = true;
  int condition = 0;      // 1..3, the violated clause of the definition
  size_t first = 0, second = 0;  // indices of the violating pair
  std::uint32_t subset = 0;      // the k-subset for which it fails
  std::string describe() const;
};

struct RankCheckOptions {
  int C0 = 0;  // 0 = use the collection's companion constant
  int much_smaller_log2 = 4;  // |R_{s'}| << |R_s| means volume ratio <= 2^-4
};

RankCheckResult rank_k_check(const TileCollection& S, RankCheckOptions opt = {});

// --- Whitney generator ------------------------------------------------------

struct WhitneyOptions {
  int window_lo = 6;   // band: max_i |A_i c| in [window_lo, window_hi) * 2^e
  int window_hi = 8;
  std::optional<std::vector<long long>> signature;  // doubled-units offsets
  size_t max_tiles = 10000;
};

// Pulls back the classical Whitney decomposition through the integer matrix
// A (d(n-k) x dn, block structure of d x d blocks). Enumerates frequency
// tuples at each scale in scale_range (frequency sidelength 2^e), closes
// under the zero-sum relation for the (n+1)-st cube, and crosses with every
// spatial cube of the dual scale. One signature component is kept so that
// condition (i) of the rank definition holds by construction.
// Throws std::invalid_argument for degenerate A (message names the subset).
TileCollection whitney_collection(const GridGeometry& g, int n, int k,
                                  const Eigen::MatrixXi& A,
                                  const std::vector<int>& scale_range,
                                  long long box_bound, WhitneyOptions opt = {});

// --- localization ------------------------------------------------------

TileCollection localize(const TileCollection& S, const DyadicCube& R0);
TileCollection localize_lower(const TileCollection& S, int d_lower, const DyadicCube& Rtilde);
// Spatial cubes of S inside R0, union {R0} (deduplicated, sorted).
std::vector<DyadicCube> spatial_projection(const TileCollection& S, const DyadicCube& R0);

// --- trees ----------------------------------------------------------------

enum class TreeType { Overlapping, Lacunary };

struct Tree {
  MultiTile top;
  std::vector<MultiTile> members;
  int slot = 0;           // j
  TreeType type = TreeType::Lacunary;
  int level = 0;          // forest level, filled by the decomposition
  int direction_axis = -1;  // lacunary separation axis for d >= 2
};

// Greedy maximal trees: candidate tops are taken in (scale descending,
// lexicographic) order; each tree collects every remaining tile related to
// the top in slot j by the type's relation (the top always joins its own
// tree). Trees partition the input.
std::vector<Tree> find_trees(const GridGeometry& g, const std::vector<MultiTile>& selection,
                             int j, TreeType type, int C0 = 9);

// Smallest axis on which the 3-dilate of the member's slot-j cube misses the
// top's; -1 when none exists.
int lacunary_direction_axis(const MultiTile& member, const MultiTile& top, int j);

// --- serialization ----------------------------------------------------------

std::string collection_to_text(const TileCollection& S);
TileCollection collection_from_text(const std::string& text);

}  // namespace helicoid
