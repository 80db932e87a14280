#include "domp/codec.hpp"

#include <limits>
#include <string>

namespace domp {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) {
      out_.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFF));
    }
  }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(in_[pos_] | (in_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(in_[pos_ + b]) << (8 * b);
    pos_ += 4;
    return v;
  }
  void finish() const {
    if (pos_ != in_.size()) {
      throw Error(ErrorCode::MalformedFrame,
                  std::to_string(in_.size() - pos_) + " trailing bytes");
    }
  }

 private:
  void need(std::size_t k) const {
    if (in_.size() - pos_ < k) throw Error(ErrorCode::MalformedFrame, "truncated frame");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_index(Index j, Index d) {
  if (j >= d || j > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument,
                "index " + std::to_string(j) + " not encodable for d = " + std::to_string(d));
  }
  return static_cast<std::uint32_t>(j);
}

void write_list(Writer& w, const std::vector<Index>& indices, Index d) {
  if (indices.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "index list longer than 65535");
  }
  w.u16(static_cast<std::uint16_t>(indices.size()));
  for (Index j : indices) w.u32(checked_index(j, d));
}

Index read_index(Reader& r, Index d) {
  const std::uint32_t j = r.u32();
  if (j >= d) {
    throw Error(ErrorCode::MalformedFrame,
                "index " + std::to_string(j) + " out of range for d = " + std::to_string(d));
  }
  return j;
}

std::vector<Index> read_list(Reader& r, Index d) {
  const std::uint16_t count = r.u16();
  std::vector<Index> out;
  out.reserve(count);
  for (std::uint16_t p = 0; p < count; ++p) out.push_back(read_index(r, d));
  return out;
}

}  // namespace

Bytes encode_message(const Message& m, Index d) {
  Writer w;
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if (msg.round == 0) throw Error(ErrorCode::InvalidArgument, "round must be >= 1");
        if constexpr (std::is_same_v<T, SupportBroadcast>) {
          w.u8(static_cast<std::uint8_t>(MessageTag::SupportBroadcast));
          w.u16(msg.round);
          write_list(w, msg.indices, d);
        } else if constexpr (std::is_same_v<T, Vote>) {
          w.u8(static_cast<std::uint8_t>(MessageTag::Vote));
          w.u16(msg.round);
          w.u32(msg.machine_id);
          w.u32(checked_index(msg.index, d));
        } else if constexpr (std::is_same_v<T, IndexListVote>) {
          w.u8(static_cast<std::uint8_t>(MessageTag::IndexListVote));
          w.u16(msg.round);
          w.u32(msg.machine_id);
          write_list(w, msg.indices, d);
        } else {
          w.u8(static_cast<std::uint8_t>(MessageTag::Final));
          w.u16(msg.round);
          write_list(w, msg.indices, d);
        }
      },
      m);
  return w.take();
}

Message decode_message(std::span<const std::uint8_t> bytes, Index d) {
  Reader r(bytes);
  const std::uint8_t tag = r.u8();
  const std::uint16_t round = r.u16();
  if (round == 0) throw Error(ErrorCode::MalformedFrame, "round 0");

  Message out;
  switch (static_cast<MessageTag>(tag)) {
    case MessageTag::SupportBroadcast:
      out = SupportBroadcast{round, read_list(r, d)};
      break;
    case MessageTag::Vote: {
      const std::uint32_t machine = r.u32();
      out = Vote{round, machine, read_index(r, d)};
      break;
    }
    case MessageTag::IndexListVote: {
      const std::uint32_t machine = r.u32();
      out = IndexListVote{round, machine, read_list(r, d)};
      break;
    }
    case MessageTag::Final:
      out = Final{round, read_list(r, d)};
      break;
    default:
      throw Error(ErrorCode::MalformedFrame, "unknown tag " + std::to_string(tag));
  }
  r.finish();
  return out;
}

}  // namespace domp
