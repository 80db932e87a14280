#include "domp/protocol.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <string>
#include <thread>

#include "domp/rng.hpp"

namespace domp {

std::uint64_t bits_per_index(Index d) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  return d <= 1 ? 0 : static_cast<std::uint64_t>(std::bit_width(d - 1));
}

Index VoteTally::total() const {
  Index sum = 0;
  for (const auto& [index, count] : counts) sum += count;
  return sum;
}

LedgerRound& CommLedger::open_round(int round) {
  rounds_.push_back(LedgerRound{round});
  return rounds_.back();
}

std::uint64_t CommLedger::uplink_bits() const {
  std::uint64_t sum = 0;
  for (const auto& r : rounds_) sum += r.uplink_bits;
  return sum;
}

std::uint64_t CommLedger::downlink_bits() const {
  std::uint64_t sum = 0;
  for (const auto& r : rounds_) sum += r.downlink_bits;
  return sum;
}

std::uint64_t CommLedger::total_bytes() const {
  std::uint64_t sum = 0;
  for (const auto& r : rounds_) sum += r.uplink_bytes + r.downlink_bytes;
  return sum;
}

TallyResult tally_and_select(std::span<const Index> votes, Index d,
                             const SupportSet& exclude, int round) {
  if (votes.empty()) throw Error(ErrorCode::NoVotes, "round " + std::to_string(round));
  TallyResult out;
  out.tally.round = round;
  for (Index v : votes) {
    if (v >= d) {
      throw Error(ErrorCode::ProtocolViolation, "vote " + std::to_string(v) + " out of range");
    }
    if (exclude.contains(v)) {
      throw Error(ErrorCode::ProtocolViolation,
                  "vote for index " + std::to_string(v) + " already in the support");
    }
    ++out.tally.counts[v];
  }
  // std::map iterates in ascending index order, so strict > keeps the
  // smallest index among equal counts.
  Index best = 0;
  for (const auto& [index, count] : out.tally.counts) {
    if (count > best) {
      best = count;
      out.winner = index;
    }
  }
  return out;
}

namespace {

template <typename Fn>
void for_each_machine(Index count, unsigned threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (Index m = 0; m < count; ++m) fn(m);
    return;
  }
  const Index workers = std::min<Index>(threads, count);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (Index w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (Index m = w; m < count; m += workers) fn(m);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void check_nonempty(std::span<const RegressionShard> shards) {
  if (shards.empty()) throw Error(ErrorCode::EmptyList, "no machines");
  const Index d = shards.front().X().cols();
  for (const auto& s : shards) {
    if (s.X().cols() != d) throw Error(ErrorCode::DimensionMismatch, "machines differ in d");
  }
}

Index min_rows(std::span<const RegressionShard> shards) {
  Index n = shards.front().X().rows();
  for (const auto& s : shards) n = std::min(n, s.X().rows());
  return n;
}

[[noreturn]] void rethrow_for_machine(const RegressionShard& s, const Error& e) {
  throw Error(e.code(), "machine " + std::to_string(s.machine_id) + ": " + e.what());
}

/// A worker in the star: holds its shard and its view of the shared support.
struct Machine {
  const RegressionShard* shard = nullptr;
  SupportSet support;

  void receive(const Bytes& frame, Index d) {
    const Message msg = decode_message(frame, d);
    const auto* update = std::get_if<SupportBroadcast>(&msg);
    if (!update) throw Error(ErrorCode::ProtocolViolation, "machine expected a support broadcast");
    for (Index j : update->indices) support.insert(j);
  }

  Bytes vote(std::uint16_t round, Index d, const LinalgOptions& linalg) const {
    StepResult step;
    try {
      step = omp_step(*shard, support, linalg);
    } catch (const Error& e) {
      rethrow_for_machine(*shard, e);
    }
    return encode_message(
        Vote{round, static_cast<std::uint32_t>(shard->machine_id), step.index}, d);
  }
};

struct RoundVotes {
  std::vector<Index> votes;
  std::uint64_t bytes = 0;
};

/// Center side of one single-index voting round: machines vote concurrently,
/// the center decodes the frames in machine order.
RoundVotes collect_votes(std::span<Machine> machines, std::uint16_t round, Index d,
                         const ProtocolOptions& opts) {
  std::vector<Bytes> frames(machines.size());
  for_each_machine(machines.size(), opts.threads,
                   [&](Index m) { frames[m] = machines[m].vote(round, d, opts.linalg); });
  RoundVotes out;
  out.votes.reserve(frames.size());
  for (Index m = 0; m < frames.size(); ++m) {
    const Message msg = decode_message(frames[m], d);
    const auto* v = std::get_if<Vote>(&msg);
    if (!v || v->round != round ||
        v->machine_id != static_cast<std::uint32_t>(machines[m].shard->machine_id)) {
      throw Error(ErrorCode::ProtocolViolation, "unexpected frame from machine " + std::to_string(m));
    }
    out.votes.push_back(v->index);
    out.bytes += frames[m].size();
  }
  return out;
}

/// Sends `indices` to every machine in `targets`; returns framed bytes.
std::uint64_t broadcast(std::span<Machine> targets, std::uint16_t round,
                        const std::vector<Index>& indices, Index d) {
  const Bytes frame = encode_message(SupportBroadcast{round, indices}, d);
  for (auto& m : targets) m.receive(frame, d);
  return frame.size() * targets.size();
}

std::uint16_t round_tag(Index t) {
  if (t == 0 || t > 0xFFFF) throw Error(ErrorCode::InvalidArgument, "round out of range");
  return static_cast<std::uint16_t>(t);
}

std::vector<Machine> make_machines(std::span<const RegressionShard> shards) {
  std::vector<Machine> machines(shards.size());
  for (Index m = 0; m < shards.size(); ++m) machines[m].shard = &shards[m];
  return machines;
}

void check_rounds(std::span<const RegressionShard> shards, Index K) {
  const Index d = shards.front().X().cols();
  if (K == 0) throw Error(ErrorCode::InvalidArgument, "K must be positive");
  if (K > std::min(min_rows(shards), d)) {
    throw Error(ErrorCode::InvalidArgument, "K exceeds min(n, d)");
  }
}

}  // namespace

ProtocolResult ds_omp(std::span<const RegressionShard> shards, Index L, Index K,
                      const ProtocolOptions& opts) {
  check_nonempty(shards);
  const Index d = shards.front().X().cols();
  if (K == 0 || L < K) throw Error(ErrorCode::InvalidArgument, "DS needs 1 <= K <= L");
  if (L > std::min(min_rows(shards), d)) {
    throw Error(ErrorCode::InvalidArgument, "L exceeds min(n, d)");
  }

  std::vector<Bytes> frames(shards.size());
  for_each_machine(shards.size(), opts.threads, [&](Index m) {
    OmpTrace trace;
    try {
      trace = run_omp(shards[m], L, opts.linalg);
    } catch (const Error& e) {
      rethrow_for_machine(shards[m], e);
    }
    frames[m] = encode_message(
        IndexListVote{1, static_cast<std::uint32_t>(shards[m].machine_id), trace.chosen.indices()},
        d);
  });

  ProtocolResult out{SupportSet{}, CommLedger(d), 1, shards.size(), {}};
  LedgerRound& ledger = out.ledger.open_round(1);
  VoteTally tally{1, {}};
  for (const Bytes& frame : frames) {
    const Message msg = decode_message(frame, d);
    const auto* list = std::get_if<IndexListVote>(&msg);
    if (!list) throw Error(ErrorCode::ProtocolViolation, "DS expects index-list votes");
    for (Index j : list->indices) ++tally.counts[j];
    ledger.uplink_bits += list->indices.size() * out.ledger.bits_per_index();
    ledger.uplink_bytes += frame.size();
  }

  // Rank by (-votes, index).
  std::vector<std::pair<Index, Index>> ranked(tally.counts.begin(), tally.counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (Index p = 0; p < K; ++p) out.estimate.insert(ranked[p].first);
  out.tallies.push_back(std::move(tally));
  return out;
}

ProtocolResult dj_omp(std::span<const RegressionShard> shards, Index K,
                      const ProtocolOptions& opts) {
  check_nonempty(shards);
  check_rounds(shards, K);
  const Index d = shards.front().X().cols();
  const Index M = shards.size();
  const std::uint64_t bits = bits_per_index(d);

  std::vector<Machine> machines = make_machines(shards);
  ProtocolResult out{SupportSet{}, CommLedger(d), 0, M, {}};
  for (Index t = 1; t <= K; ++t) {
    const std::uint16_t round = round_tag(t);
    LedgerRound& ledger = out.ledger.open_round(round);
    const RoundVotes votes = collect_votes(machines, round, d, opts);
    ledger.uplink_bits = M * bits;
    ledger.uplink_bytes = votes.bytes;

    TallyResult fused = tally_and_select(votes.votes, d, out.estimate, round);
    out.estimate.insert(fused.winner);
    out.tallies.push_back(std::move(fused.tally));
    if (t < K) {
      // Only the new index goes out; machines extend their own copy.
      ledger.downlink_bytes = broadcast(machines, round, {fused.winner}, d);
      ledger.downlink_bits = M * bits;
    }
    out.rounds = static_cast<int>(t);
  }
  return out;
}

ProtocolResult djf_omp(std::span<const RegressionShard> pool, Index K, Index per_round,
                       const ProtocolOptions& opts) {
  check_nonempty(pool);
  if (per_round == 0) throw Error(ErrorCode::InvalidArgument, "per_round must be positive");
  if (K == 0) throw Error(ErrorCode::InvalidArgument, "K must be positive");
  if (pool.size() < K * per_round) {
    throw Error(ErrorCode::InsufficientMachines,
                "needed " + std::to_string(K * per_round) + ", have " + std::to_string(pool.size()));
  }
  const auto used = pool.first(K * per_round);
  check_rounds(used, K);
  const Index d = pool.front().X().cols();
  const std::uint64_t bits = bits_per_index(d);

  ProtocolResult out{SupportSet{}, CommLedger(d), 0, K * per_round, {}};
  for (Index t = 1; t <= K; ++t) {
    const std::uint16_t round = round_tag(t);
    LedgerRound& ledger = out.ledger.open_round(round);
    std::vector<Machine> fresh = make_machines(used.subspan((t - 1) * per_round, per_round));

    // Round t opens with the current support of size t-1 sent to each fresh
    // machine; nothing is sent while it is empty.
    if (!out.estimate.empty()) {
      ledger.downlink_bytes = broadcast(fresh, round, out.estimate.indices(), d);
    }
    ledger.downlink_bits = per_round * (t - 1) * bits;

    const RoundVotes votes = collect_votes(fresh, round, d, opts);
    ledger.uplink_bits = per_round * bits;
    ledger.uplink_bytes = votes.bytes;

    TallyResult fused = tally_and_select(votes.votes, d, out.estimate, round);
    out.estimate.insert(fused.winner);
    out.tallies.push_back(std::move(fused.tally));
    out.rounds = static_cast<int>(t);
  }
  return out;
}

ProtocolResult dc_omp(std::span<const RegressionShard> shards, Index K, std::uint64_t seed,
                      const ProtocolOptions& opts) {
  check_nonempty(shards);
  check_rounds(shards, K);
  const Index d = shards.front().X().cols();
  const Index M = shards.size();
  const std::uint64_t bits = bits_per_index(d);
  CounterStream rng(seed);

  std::vector<Machine> machines = make_machines(shards);
  ProtocolResult out{SupportSet{}, CommLedger(d), 0, M, {}};
  for (Index t = 1; out.estimate.size() < K; ++t) {
    const std::uint16_t round = round_tag(t);
    LedgerRound& ledger = out.ledger.open_round(round);
    const RoundVotes votes = collect_votes(machines, round, d, opts);
    ledger.uplink_bits = M * bits;
    ledger.uplink_bytes = votes.bytes;

    TallyResult fused = tally_and_select(votes.votes, d, out.estimate, round);
    std::vector<Index> added;
    std::vector<Index> singletons;
    for (const auto& [index, count] : fused.tally.counts) {
      (count >= 2 ? added : singletons).push_back(index);
    }
    if (added.empty()) added.push_back(singletons[rng.next_below(singletons.size())]);
    for (Index j : added) {
      if (out.estimate.size() == K) break;  // overshoot: keep insertion order
      out.estimate.insert(j);
    }
    out.tallies.push_back(std::move(fused.tally));
    out.rounds = static_cast<int>(t);

    if (out.estimate.size() < K) {
      ledger.downlink_bytes = broadcast(machines, round, added, d);
      ledger.downlink_bits = M * added.size() * bits;
    }
  }
  return out;
}

}  // namespace domp
