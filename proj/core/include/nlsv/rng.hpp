#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace nlsv {

/// Philox4x32-10 counter-based block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Reproducible stream of standard normal draws.
///
/// The (seed, stream_id, substream) triple fully determines the sequence, so
/// work can be split across workers by stream without changing results.
/// Normals come from Box-Muller on 53-bit uniforms so the output does not
/// depend on the standard library implementation.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t substream = 0);

  /// A stream that only ever yields zeros. Turns every simulation into its
  /// deterministic skeleton.
  static RngStream null();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint32_t substream_index() const { return substream_; }
  bool is_null() const { return null_; }

  RngStream substream(std::uint32_t index) const;

  double normal();
  void normals(std::span<double> out);
  /// Uniform on (0, 1).
  double uniform();

  /// Number of 128-bit blocks consumed so far.
  std::uint32_t blocks_used() const { return block_; }

 private:
  std::array<std::uint32_t, 4> next_block();

  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint32_t substream_ = 0;
  std::uint32_t block_ = 0;
  bool null_ = false;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nlsv
