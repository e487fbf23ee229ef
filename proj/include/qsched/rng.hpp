#pragma once

#include <cstdint>
#include <stdexcept>

namespace qsched {

// Purpose tag for deriving independent substreams. The numeric values are
// part of the output format: changing them reseeds every experiment.
enum class StreamPurpose : std::uint64_t {
  Channels = 1,
  Arrivals = 2,
  Policy = 3,
  Audit = 4,
};

struct StreamId {
  StreamPurpose purpose = StreamPurpose::Audit;
  std::uint64_t node = 0;
  std::uint64_t run = 0;
  std::uint64_t index = 0;
};

// Counter-based generator in splitmix64 form. The state is derived from
// (master_seed, purpose, node, run, index), so any substream can be
// reconstructed on its own regardless of how the others are consumed.
// Golden files depend on this exact construction.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, StreamId id) : state_(master_seed) {
    absorb(static_cast<std::uint64_t>(id.purpose));
    absorb(id.node);
    absorb(id.run);
    absorb(id.index);
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return finalize(state_);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_double(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform index in {0, ..., n-1}.
  int next_index(int n) {
    if (n <= 0) throw std::invalid_argument("next_index: n must be positive");
    return static_cast<int>(
        (static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n)) >> 64);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  void absorb(std::uint64_t field) { state_ = finalize(state_ + kGamma + field); }

  std::uint64_t state_;
};

// Binds (master_seed, node, run) and hands out purpose/index substreams.
class StreamFamily {
 public:
  StreamFamily(std::uint64_t master_seed, std::uint64_t node, std::uint64_t run)
      : master_seed_(master_seed), node_(node), run_(run) {}

  RngStream stream(StreamPurpose purpose, std::uint64_t index = 0) const {
    return RngStream(master_seed_, StreamId{purpose, node_, run_, index});
  }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t node() const { return node_; }
  std::uint64_t run() const { return run_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t node_;
  std::uint64_t run_;
};

}  // namespace qsched
