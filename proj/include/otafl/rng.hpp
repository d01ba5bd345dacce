#pragma once

#include <cstdint>
#include <random>

namespace otafl {

/// Named sub-streams derived from one master seed. Each stream is further
/// keyed by an index (round, UE, ...) so draws never depend on evaluation order.
enum class Stream : std::uint64_t {
  placement = 0x706c6163,
  fading = 0x66616465,
  noise = 0x6e6f6973,
  data = 0x64617461,
  minibatch = 0x62617463,
  montecarlo = 0x6d6f6e74,
};

std::uint64_t splitmix64(std::uint64_t x);

std::mt19937_64 make_stream(std::uint64_t master_seed, Stream stream,
                            std::uint64_t index = 0, std::uint64_t sub = 0);

}  // namespace otafl
