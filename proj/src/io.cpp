#include "helicoid/io.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace helicoid {

void save_gridfn(const GridFunction& f, const std::string& path) {
  std::ofstream raw(path, std::ios::binary);
  if (!raw) throw std::runtime_error("cannot open " + path);
  for (const auto& a : f.data)
    for (long long i = 0; i < a.size(); ++i) {
      float re = (float)a(i).real();
      float im = (float)a(i).imag();
      raw.write(reinterpret_cast<const char*>(&re), sizeof(float));
      raw.write(reinterpret_cast<const char*>(&im), sizeof(float));
    }
  nlohmann::json side;
  side["d"] = f.geom.d;
  side["J"] = f.geom.J;
  side["W"] = nlohmann::json::array();
  for (const auto& factor : f.W.factors) {
    nlohmann::json weights = nlohmann::json::array();
    for (long long i = 0; i < factor.size(); ++i) weights.push_back(factor(i));
    side["W"].push_back(weights);
  }
  std::ofstream meta(path + ".json");
  meta << side.dump(2) << "\n";
}

GridFunction load_gridfn(const std::string& path) {
  std::ifstream meta(path + ".json");
  if (!meta) throw std::runtime_error("missing sidecar " + path + ".json");
  nlohmann::json side = nlohmann::json::parse(meta);
  GridGeometry g{side.at("d").get<int>(), side.at("J").get<int>()};
  std::vector<Eigen::ArrayXd> factors;
  for (const auto& weights : side.at("W")) {
    Eigen::ArrayXd factor(weights.size());
    for (size_t i = 0; i < weights.size(); ++i) factor(i) = weights[i].get<double>();
    factors.push_back(factor);
  }
  GridFunction f = GridFunction::zeros(g, VectorSpace(factors));
  std::ifstream raw(path, std::ios::binary);
  if (!raw) throw std::runtime_error("cannot open " + path);
  for (auto& a : f.data)
    for (long long i = 0; i < a.size(); ++i) {
      float re = 0, im = 0;
      raw.read(reinterpret_cast<char*>(&re), sizeof(float));
      raw.read(reinterpret_cast<char*>(&im), sizeof(float));
      if (!raw) throw std::runtime_error("truncated gridfn file " + path);
      a(i) = Complex(re, im);
    }
  return f;
}

std::string gridfn_to_csv(const GridFunction& f) {
  if (f.geom.d > 2) throw std::invalid_argument("csv sampler supports d <= 2");
  if (!f.W.is_scalar()) throw std::invalid_argument("csv sampler: scalar only");
  std::ostringstream os;
  os << (f.geom.d == 1 ? "x1,re,im\n" : "x1,x2,re,im\n");
  for (long long idx = 0; idx < f.npoints(); ++idx) {
    auto c = grid_coords(f.geom, idx);
    for (int i = 0; i < f.geom.d; ++i) os << c[i] << ",";
    os << f.data[0](idx).real() << "," << f.data[0](idx).imag() << "\n";
  }
  return os.str();
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace helicoid
