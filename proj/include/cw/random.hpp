#pragma once

// Counter-based random streams.
//
// Every random quantity in the library is drawn from a Stream identified by
// (master seed, substream id). The generator is Philox4x32-10 and normals are
// produced by the Box-Muller transform; together they are versioned as
// kNormalSamplerName so persisted runs can record exactly what produced them.
// Because a stream is a pure function of its id, replicas can be evaluated in
// any order on any number of threads and still produce identical numbers.

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace cw {

inline constexpr std::string_view kNormalSamplerName = "philox4x32-10/box-muller/v1";

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// One Philox4x32-10 block.
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

/// Purposes partition the substream space so that unrelated consumers never
/// share draws even when they use the same replica index.
enum class Purpose : std::uint32_t {
  generic = 0,
  entries = 1,
  rosenblatt_row = 2,
  goe = 3,
  rosenblatt_reference = 4,
  directions = 5,
  bootstrap = 6,
  gaussian_null = 7,
  test = 99,
};

/// 64-bit substream id; a documented mix of (purpose, index, sub).
std::uint64_t substream_id(Purpose purpose, std::uint64_t index, std::uint64_t sub = 0) noexcept;

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t id() const noexcept { return id_; }

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform() noexcept;
  double normal() noexcept;
  void fill_normal(std::span<double> out) noexcept;
  std::vector<double> normals(std::size_t count);

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t id_;
  PhiloxKey key_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  unsigned used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Convenience factory bound to one master seed.
class StreamFactory {
 public:
  explicit StreamFactory(std::uint64_t master_seed) noexcept : seed_(master_seed) {}
  std::uint64_t master_seed() const noexcept { return seed_; }
  Stream stream(Purpose purpose, std::uint64_t index, std::uint64_t sub = 0) const noexcept {
    return Stream(seed_, substream_id(purpose, index, sub));
  }

 private:
  std::uint64_t seed_;
};

}  // namespace cw
