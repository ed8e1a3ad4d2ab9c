#pragma once

#include <string>

#include "helicoid/gridfn.hpp"

namespace helicoid {

// Raw little-endian complex64 array (float32 re/im pairs, w-major, grid
// flat order) with a JSON sidecar <path>.json holding d, J and the W factor
// weights.
void save_gridfn(const GridFunction& f, const std::string& path);
GridFunction load_gridfn(const std::string& path);

// CSV sampler for small d: coordinates, re, im per row (scalar functions).
std::string gridfn_to_csv(const GridFunction& f);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace helicoid
