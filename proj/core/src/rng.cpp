#include "nlsv/rng.hpp"

#include <cmath>
#include <numbers>

namespace nlsv {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_unit_open_closed(std::uint64_t bits) {
  // (0, 1]
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

inline double to_unit_closed_open(std::uint64_t bits) {
  // [0, 1)
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id,
                     std::uint32_t substream)
    : seed_(seed), stream_id_(stream_id), substream_(substream) {}

RngStream RngStream::null() {
  RngStream s(0, 0, 0);
  s.null_ = true;
  return s;
}

RngStream RngStream::substream(std::uint32_t index) const {
  RngStream s(seed_, stream_id_, index);
  s.null_ = null_;
  return s;
}

std::array<std::uint32_t, 4> RngStream::next_block() {
  const std::array<std::uint32_t, 4> ctr{
      block_++, substream_, static_cast<std::uint32_t>(stream_id_),
      static_cast<std::uint32_t>(stream_id_ >> 32)};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                         static_cast<std::uint32_t>(seed_ >> 32)};
  return philox4x32(ctr, key);
}

double RngStream::normal() {
  if (null_) return 0.0;
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const auto b = next_block();
  const std::uint64_t w0 = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
  const std::uint64_t w1 = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
  const double radius = std::sqrt(-2.0 * std::log(to_unit_open_closed(w0)));
  const double angle = 2.0 * std::numbers::pi * to_unit_closed_open(w1);
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

void RngStream::normals(std::span<double> out) {
  for (double& z : out) z = normal();
}

double RngStream::uniform() {
  if (null_) return 0.5;
  const auto b = next_block();
  const std::uint64_t w = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
  return to_unit_open_closed(w) * (1.0 - 0x1.0p-54);
}

}  // namespace nlsv
