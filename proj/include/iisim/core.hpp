#pragma once

// Domain types shared by every simulation module: process sets, ordered
// partitions, IIS and AS traces, counter vectors and round-levels.

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace iisim {

// Largest system size supported by the bitmask process sets.
inline constexpr int kMaxProcesses = 16;

// Processes are numbered 1..n.
using ProcessId = int;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A caller broke a one-shot or single-writer contract.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A hard invariant of a simulation fired; always a bug in the simulation.
class SimulationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void check_system_size(int n) {
  if (n < 1 || n > kMaxProcesses) {
    throw InvalidInput("system size " + std::to_string(n) + " outside [1, " +
                       std::to_string(kMaxProcesses) + "]");
  }
}

inline void check_process(ProcessId id, int n) {
  if (id < 1 || id > n) {
    throw InvalidInput("process id " + std::to_string(id) + " outside [1, " +
                       std::to_string(n) + "]");
  }
}

// Set of process ids backed by a bitmask (bit id-1).
class ProcSet {
 public:
  constexpr ProcSet() = default;

  static constexpr ProcSet from_mask(std::uint32_t mask) {
    ProcSet s;
    s.mask_ = mask;
    return s;
  }
  static ProcSet of(std::initializer_list<ProcessId> ids) {
    ProcSet s;
    for (ProcessId id : ids) s.insert(id);
    return s;
  }
  static constexpr ProcSet all(int n) {
    return from_mask(n >= 32 ? ~0u : ((1u << n) - 1u));
  }

  constexpr bool contains(ProcessId id) const { return (mask_ >> (id - 1)) & 1u; }
  constexpr void insert(ProcessId id) { mask_ |= 1u << (id - 1); }
  constexpr void erase(ProcessId id) { mask_ &= ~(1u << (id - 1)); }
  constexpr int size() const { return std::popcount(mask_); }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr bool subset_of(ProcSet other) const { return (mask_ & ~other.mask_) == 0; }
  constexpr std::uint32_t mask() const { return mask_; }

  constexpr ProcSet operator|(ProcSet o) const { return from_mask(mask_ | o.mask_); }
  constexpr ProcSet operator&(ProcSet o) const { return from_mask(mask_ & o.mask_); }
  constexpr ProcSet operator-(ProcSet o) const { return from_mask(mask_ & ~o.mask_); }
  constexpr ProcSet& operator|=(ProcSet o) {
    mask_ |= o.mask_;
    return *this;
  }

  std::vector<ProcessId> members() const {
    std::vector<ProcessId> out;
    for (std::uint32_t m = mask_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m) + 1);
    return out;
  }

  std::string str() const {
    std::string s = "{";
    bool first = true;
    for (ProcessId id : members()) {
      if (!first) s += ",";
      s += std::to_string(id);
      first = false;
    }
    return s + "}";
  }

  constexpr auto operator<=>(const ProcSet&) const = default;

 private:
  std::uint32_t mask_ = 0;
};

using View = ProcSet;

// Blocks of one IIS round in invocation order.
struct OrderedPartition {
  std::vector<ProcSet> blocks;

  ProcSet participants() const {
    ProcSet all;
    for (ProcSet b : blocks) all |= b;
    return all;
  }

  // Views by process id (index id-1); empty set for non-participants.
  std::vector<View> views(int n) const {
    std::vector<View> out(static_cast<std::size_t>(n));
    ProcSet prefix;
    for (ProcSet b : blocks) {
      prefix |= b;
      for (ProcessId id : b.members()) out[static_cast<std::size_t>(id - 1)] = prefix;
    }
    return out;
  }

  std::string str() const {
    std::string s;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      if (k) s += " | ";
      bool first = true;
      for (ProcessId id : blocks[k].members()) {
        if (!first) s += " ";
        s += std::to_string(id);
        first = false;
      }
    }
    return s;
  }

  bool operator==(const OrderedPartition&) const = default;
};

// Throws InvalidInput unless blocks are non-empty, pairwise disjoint and in range.
inline void validate_partition(const OrderedPartition& p, int n) {
  ProcSet seen;
  for (ProcSet b : p.blocks) {
    if (b.empty()) throw InvalidInput("ordered partition has an empty block");
    if (!(b - ProcSet::all(n)).empty()) throw InvalidInput("block " + b.str() + " outside 1..n");
    if (!(b & seen).empty()) throw InvalidInput("blocks overlap on " + (b & seen).str());
    seen |= b;
  }
}

// Rounds are stored 0-based; round r lives at rounds[r-1].
struct IISTrace {
  int n = 0;
  std::vector<OrderedPartition> rounds;

  int length() const { return static_cast<int>(rounds.size()); }
  const OrderedPartition& round(int r) const { return rounds.at(static_cast<std::size_t>(r - 1)); }
  ProcSet participants(int r) const { return round(r).participants(); }
  View view(ProcessId i, int r) const {
    return round(r).views(n)[static_cast<std::size_t>(i - 1)];
  }

  bool operator==(const IISTrace&) const = default;
};

// Throws InvalidInput unless every round is a valid partition and participant
// sets are inclusion-decreasing.
inline void validate_iis_trace(const IISTrace& t) {
  check_system_size(t.n);
  for (int r = 1; r <= t.length(); ++r) {
    validate_partition(t.round(r), t.n);
    if (r > 1 && !t.participants(r).subset_of(t.participants(r - 1))) {
      throw InvalidInput("participants of round " + std::to_string(r) +
                         " not contained in round " + std::to_string(r - 1));
    }
  }
}

// ---------------------------------------------------------------------------
// Atomic-snapshot histories

template <class V>
struct Update {
  V value;
  bool operator==(const Update&) const = default;
};

// One entry per process; nullopt is the initial (bottom) register value.
template <class V>
struct SnapshotResult {
  std::vector<std::optional<V>> cells;
  bool operator==(const SnapshotResult&) const = default;
};

template <class V>
struct ASEvent {
  ProcessId actor = 0;
  std::variant<Update<V>, SnapshotResult<V>> op;

  bool is_update() const { return std::holds_alternative<Update<V>>(op); }
  bool operator==(const ASEvent&) const = default;
};

template <class V>
struct ASTrace {
  int n = 0;
  std::vector<ASEvent<V>> events;
  bool operator==(const ASTrace&) const = default;
};

// Replays the trace against a fresh register array. Returns a description of
// the first event whose snapshot result disagrees with the replayed memory.
template <class V>
std::optional<std::string> find_replay_violation(const ASTrace<V>& trace) {
  std::vector<std::optional<V>> cells(static_cast<std::size_t>(trace.n));
  for (std::size_t k = 0; k < trace.events.size(); ++k) {
    const auto& ev = trace.events[k];
    if (ev.actor < 1 || ev.actor > trace.n) {
      return "event " + std::to_string(k) + ": actor out of range";
    }
    if (const auto* up = std::get_if<Update<V>>(&ev.op)) {
      cells[static_cast<std::size_t>(ev.actor - 1)] = up->value;
      continue;
    }
    const auto& snap = std::get<SnapshotResult<V>>(ev.op);
    if (snap.cells.size() != cells.size()) {
      return "event " + std::to_string(k) + ": snapshot has wrong width";
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (snap.cells[j] != cells[j]) {
        return "event " + std::to_string(k) + ": snapshot by " + std::to_string(ev.actor) +
               " disagrees with register " + std::to_string(j + 1);
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Counter vectors

class CounterVector {
 public:
  CounterVector() = default;
  explicit CounterVector(std::size_t n) : counts_(n, 0) {}
  CounterVector(std::initializer_list<std::int64_t> v) : counts_(v) {}
  explicit CounterVector(std::vector<std::int64_t> v) : counts_(std::move(v)) {}

  // Initial state of process i: 1 at position i, 0 elsewhere.
  static CounterVector initial(int n, ProcessId i) {
    CounterVector c(static_cast<std::size_t>(n));
    c[i] = 1;
    return c;
  }

  std::size_t size() const { return counts_.size(); }
  std::int64_t& operator[](ProcessId i) { return counts_[static_cast<std::size_t>(i - 1)]; }
  std::int64_t operator[](ProcessId i) const { return counts_[static_cast<std::size_t>(i - 1)]; }
  const std::vector<std::int64_t>& values() const { return counts_; }

  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto v : counts_) s += v;
    return s;
  }

  // Pointwise <=.
  bool leq(const CounterVector& o) const {
    if (o.size() != size()) return false;
    for (std::size_t k = 0; k < counts_.size(); ++k)
      if (counts_[k] > o.counts_[k]) return false;
    return true;
  }
  bool comparable(const CounterVector& o) const { return leq(o) || o.leq(*this); }

  std::string str() const {
    std::string s = "[";
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      if (k) s += ",";
      s += std::to_string(counts_[k]);
    }
    return s + "]";
  }

  bool operator==(const CounterVector&) const = default;

 private:
  std::vector<std::int64_t> counts_;
};

// Pointwise maximum of a non-empty list of equal-length vectors.
inline CounterVector merge_counters(std::span<const CounterVector> vs) {
  if (vs.empty()) throw InvalidInput("merge_counters: empty input");
  CounterVector out = vs.front();
  for (const auto& v : vs.subspan(1)) {
    if (v.size() != out.size()) throw InvalidInput("merge_counters: length mismatch");
    for (ProcessId i = 1; i <= static_cast<int>(v.size()); ++i) out[i] = std::max(out[i], v[i]);
  }
  return out;
}

inline CounterVector merge_counters(std::initializer_list<CounterVector> vs) {
  return merge_counters(std::span<const CounterVector>(vs.begin(), vs.size()));
}

// ---------------------------------------------------------------------------
// Round-levels of the simulated IS construction

struct RoundLevel {
  int round = 1;
  int level = 1;
  bool operator==(const RoundLevel&) const = default;
};

// Progress order: a later round is ahead; within a round a lower level is ahead.
// Returns less when `a` is behind `b`.
constexpr std::strong_ordering progress_order(RoundLevel a, RoundLevel b) {
  if (a.round != b.round) return a.round <=> b.round;
  return b.level <=> a.level;
}

// Total order on (process, round-level): the most-behind process comes first;
// ties on round-level rotate with the round via (id + round) mod n.
inline std::strong_ordering compare_round_level(ProcessId a, RoundLevel ra, ProcessId b,
                                                RoundLevel rb, int n) {
  if (auto c = progress_order(ra, rb); c != 0) return c;
  return ((a + ra.round) % n) <=> ((b + ra.round) % n);
}

enum class Disposition : std::uint8_t { run, blocked };

struct StatusEntry {
  Disposition disposition = Disposition::run;
  RoundLevel at;
  bool operator==(const StatusEntry&) const = default;
};

inline std::string to_string(Disposition d) { return d == Disposition::run ? "run" : "blocked"; }

}  // namespace iisim
