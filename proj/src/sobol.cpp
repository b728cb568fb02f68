#include "bolab/sobol.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bolab/errors.hpp"

namespace bolab::local {
namespace {

constexpr int kBits = 32;

struct Primitive {
  int degree;
  std::uint32_t coeffs;  // interior polynomial coefficients a
  std::array<std::uint32_t, 6> m;
};

// new-joe-kuo-6.21201, dimensions 2..16.
constexpr std::array<Primitive, kSobolMaxDims - 1> kTable{{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
}};

std::array<std::uint32_t, kBits> direction_numbers(int dim) {
  std::array<std::uint32_t, kBits> v{};
  if (dim == 0) {
    for (int k = 0; k < kBits; ++k) v[k] = 1u << (kBits - 1 - k);
    return v;
  }
  const Primitive& p = kTable[static_cast<std::size_t>(dim - 1)];
  const int s = p.degree;
  for (int k = 0; k < s; ++k) v[k] = p.m[static_cast<std::size_t>(k)] << (kBits - 1 - k);
  for (int k = s; k < kBits; ++k) {
    std::uint32_t value = v[k - s] ^ (v[k - s] >> s);
    for (int j = 1; j < s; ++j) {
      if ((p.coeffs >> (s - 1 - j)) & 1u) value ^= v[k - j];
    }
    v[k] = value;
  }
  return v;
}

}  // namespace

Eigen::MatrixXd sobol_points(int n, int d) {
  if (d > kSobolMaxDims)
    throw DimensionTooLarge("sobol: dimension " + std::to_string(d) + " exceeds 16");
  if (d < 1 || n < 1) throw Error("sobol: need n >= 1 and d >= 1");
  Eigen::MatrixXd out(n, d);
  std::vector<std::array<std::uint32_t, kBits>> dirs;
  dirs.reserve(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) dirs.push_back(direction_numbers(j));

  std::vector<std::uint32_t> state(static_cast<std::size_t>(d), 0u);
  constexpr double kScale = 1.0 / 4294967296.0;
  // Point i+1 flips the direction number at the lowest zero bit of i.
  for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(n); ++i) {
    int c = 0;
    while ((i >> c) & 1u) ++c;
    for (int j = 0; j < d; ++j) {
      state[static_cast<std::size_t>(j)] ^= dirs[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
      out(i, j) = static_cast<double>(state[static_cast<std::size_t>(j)]) * kScale;
    }
  }
  return out;
}

}  // namespace bolab::local
