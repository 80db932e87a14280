#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "domp/codec.hpp"
#include "domp/core.hpp"
#include "domp/omp.hpp"

namespace domp {

/// ceil(log2 d): bits needed to name one of d indices.
std::uint64_t bits_per_index(Index d);

struct VoteTally {
  int round = 0;
  std::map<Index, Index> counts;

  Index total() const;
};

struct LedgerRound {
  int round = 0;
  std::uint64_t uplink_bits = 0;
  std::uint64_t downlink_bits = 0;
  // Bytes actually framed by the codec for the same exchanges.
  std::uint64_t uplink_bytes = 0;
  std::uint64_t downlink_bytes = 0;
};

/// Index-bit accounting (ceil(log2 d) per index) per round and direction.
class CommLedger {
 public:
  explicit CommLedger(Index d = 2) : bits_per_index_(domp::bits_per_index(d)) {}

  std::uint64_t bits_per_index() const noexcept { return bits_per_index_; }
  const std::vector<LedgerRound>& rounds() const noexcept { return rounds_; }

  LedgerRound& open_round(int round);
  std::uint64_t uplink_bits() const;
  std::uint64_t downlink_bits() const;
  std::uint64_t total_bits() const { return uplink_bits() + downlink_bits(); }
  std::uint64_t total_bytes() const;

 private:
  std::uint64_t bits_per_index_;
  std::vector<LedgerRound> rounds_;
};

struct ProtocolResult {
  SupportSet estimate;
  CommLedger ledger;
  int rounds = 0;
  Index machines_used = 0;
  std::vector<VoteTally> tallies;
};

struct ProtocolOptions {
  LinalgOptions linalg;
  /// Worker threads for the per-machine computations of a round. Results do
  /// not depend on this value.
  unsigned threads = 1;
};

struct TallyResult {
  Index winner = 0;
  VoteTally tally;
};

/// Majority vote with smallest-index tie-break. Throws ProtocolViolation if
/// any vote is in `exclude` or out of range, NoVotes on an empty list.
TallyResult tally_and_select(std::span<const Index> votes, Index d,
                             const SupportSet& exclude, int round = 1);

/// One-shot: every machine runs L OMP steps and uploads its indices; the
/// center keeps the K indices with the most votes.
ProtocolResult ds_omp(std::span<const RegressionShard> shards, Index L, Index K,
                      const ProtocolOptions& opts = {});

/// K rounds of one OMP step per machine against the shared support, fused by
/// majority vote; the center broadcasts each new index.
ProtocolResult dj_omp(std::span<const RegressionShard> shards, Index K,
                      const ProtocolOptions& opts = {});

/// DJ with a disjoint slice of `per_round` fresh machines each round; the
/// center sends the full current support to each new slice.
ProtocolResult djf_omp(std::span<const RegressionShard> pool, Index K, Index per_round,
                       const ProtocolOptions& opts = {});

/// Baseline fusion: add every index with at least two votes, otherwise one
/// seeded-random singleton; truncate to the first K added.
ProtocolResult dc_omp(std::span<const RegressionShard> shards, Index K, std::uint64_t seed,
                      const ProtocolOptions& opts = {});

}  // namespace domp
