#include "pspin/random.hpp"

#include <cmath>
#include <numbers>

namespace pspin {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

double box_muller(double u1, double u2) noexcept {
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

double counter_normal(std::uint64_t seed, std::uint64_t counter) noexcept {
  const std::uint64_t key = mix64(seed);
  const double u1 = to_open_unit_interval(mix64(key ^ mix64(2 * counter)));
  const double u2 = to_unit_interval(mix64(key ^ mix64(2 * counter + 1)));
  return box_muller(u1, u2);
}

Xoshiro256::Xoshiro256(std::uint64_t seed) noexcept {
  std::uint64_t x = seed;
  for (auto& word : s_) {
    x += 0x9e3779b97f4a7c15ULL;
    word = mix64(x);
  }
}

Xoshiro256::result_type Xoshiro256::operator()() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256::normal() noexcept {
  const double u1 = to_open_unit_interval((*this)());
  const double u2 = uniform();
  return box_muller(u1, u2);
}

std::uint64_t Xoshiro256::below(std::uint64_t n) noexcept {
  // Lemire's multiply-shift; the bias is below 2^-64 * n and irrelevant here.
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
}

}  // namespace pspin
