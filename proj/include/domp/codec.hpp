#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "domp/core.hpp"

namespace domp {

// Wire layout (little-endian): [tag u8][round u16][payload]
//   0x01 SupportBroadcast  [count u16][count x index u32]
//   0x02 Vote              [machine_id u32][index u32]
//   0x03 IndexListVote     [machine_id u32][count u16][count x index u32]
//   0x04 Final             [count u16][count x index u32]
// Decoding is strict: the frame must be consumed exactly.

struct SupportBroadcast {
  std::uint16_t round = 1;
  std::vector<Index> indices;
  bool operator==(const SupportBroadcast&) const = default;
};

struct Vote {
  std::uint16_t round = 1;
  std::uint32_t machine_id = 0;
  Index index = 0;
  bool operator==(const Vote&) const = default;
};

struct IndexListVote {
  std::uint16_t round = 1;
  std::uint32_t machine_id = 0;
  std::vector<Index> indices;
  bool operator==(const IndexListVote&) const = default;
};

struct Final {
  std::uint16_t round = 1;
  std::vector<Index> indices;
  bool operator==(const Final&) const = default;
};

using Message = std::variant<SupportBroadcast, Vote, IndexListVote, Final>;

enum class MessageTag : std::uint8_t {
  SupportBroadcast = 0x01,
  Vote = 0x02,
  IndexListVote = 0x03,
  Final = 0x04,
};

using Bytes = std::vector<std::uint8_t>;

/// Throws InvalidArgument for messages that cannot be framed (round 0,
/// index >= d, more than 65535 indices).
Bytes encode_message(const Message& m, Index d);

/// Throws MalformedFrame on unknown tag, truncation, trailing bytes,
/// round 0 or an index >= d.
Message decode_message(std::span<const std::uint8_t> bytes, Index d);

}  // namespace domp
