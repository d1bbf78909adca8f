#pragma once

// Commit-adopt and the resolver agreement protocol (RAP) as step machines.
//
// The machines are storage-agnostic: a driver performs the write or snapshot a
// machine asks for and feeds back the instance's visible registers. The
// standalone RapProcess below drives one instance over the kernel; the AS->IIS
// simulator embeds the same machines in its own registers.

#include <optional>
#include <string>
#include <vector>

#include "iisim/core.hpp"
#include "iisim/kernel.hpp"

namespace iisim {

enum class Grade : std::uint8_t { commit, adopt };

struct CAOutcome {
  Grade grade = Grade::adopt;
  bool value = false;
  bool operator==(const CAOutcome&) const = default;
};

// Second-phase register content: the value and whether its writer saw only
// that value in the first phase.
struct GradedValue {
  bool candidate = false;
  bool value = false;
  bool operator==(const GradedValue&) const = default;
};

// What one participant sees of an instance after a snapshot.
struct InstanceView {
  std::vector<std::optional<bool>> proposals;
  std::vector<std::optional<GradedValue>> graded;
  std::optional<bool> resolution;
};

// Phase one: candidate iff every visible proposal equals ours.
inline GradedValue grade_proposals(const std::vector<std::optional<bool>>& visible, bool mine) {
  for (const auto& v : visible)
    if (v && *v != mine) return {false, mine};
  return {true, mine};
}

// Phase two: commit iff every visible graded value is a candidate for our value;
// otherwise adopt any visible candidate, else keep our value.
inline CAOutcome decide_graded(const std::vector<std::optional<GradedValue>>& visible, GradedValue mine) {
  bool unanimous = mine.candidate;
  std::optional<bool> seen_candidate;
  for (const auto& g : visible) {
    if (!g) continue;
    if (!g->candidate || g->value != mine.value) unanimous = false;
    if (g->candidate) seen_candidate = g->value;
  }
  if (unanimous) return {Grade::commit, mine.value};
  if (seen_candidate) return {Grade::adopt, *seen_candidate};
  return {Grade::adopt, mine.value};
}

class CommitAdopt {
 public:
  enum class Step : std::uint8_t { write_proposal, read_proposals, write_graded, read_graded, done };

  explicit CommitAdopt(bool proposal) : proposal_(proposal) {}

  Step step() const { return step_; }
  bool proposal() const { return proposal_; }
  GradedValue graded() const { return graded_; }
  const std::optional<CAOutcome>& outcome() const { return outcome_; }

  void wrote() {
    if (step_ == Step::write_proposal) step_ = Step::read_proposals;
    else if (step_ == Step::write_graded) step_ = Step::read_graded;
    else throw ContractViolation("commit-adopt: unexpected write");
  }

  void observe(const InstanceView& v) {
    if (step_ == Step::read_proposals) {
      graded_ = grade_proposals(v.proposals, proposal_);
      step_ = Step::write_graded;
    } else if (step_ == Step::read_graded) {
      outcome_ = decide_graded(v.graded, graded_);
      step_ = Step::done;
    } else {
      throw ContractViolation("commit-adopt: unexpected snapshot");
    }
  }

  bool operator==(const CommitAdopt&) const = default;

 private:
  bool proposal_;
  GradedValue graded_;
  Step step_ = Step::write_proposal;
  std::optional<CAOutcome> outcome_;
};

// A RAP result: a binary value or bottom (nullopt).
using RapResult = std::optional<bool>;

inline std::string to_string(const RapResult& r) { return r ? (*r ? "1" : "0") : "bot"; }

// One participant of a RAP instance. Runs commit-adopt; a commit returns the
// value. On adopt the resolver publishes its value in the resolution register
// and returns it; anyone else reads the resolution register and returns its
// content or bottom. The resolver also publishes committed values so late
// readers find them.
class RapParticipant {
 public:
  enum class Step : std::uint8_t {
    write_proposal,
    read_proposals,
    write_graded,
    read_graded,
    write_resolution,
    read_resolution,
    done
  };

  RapParticipant(bool resolver, bool proposal) : resolver_(resolver), ca_(proposal) {}

  Step step() const {
    if (!ca_.outcome()) return static_cast<Step>(ca_.step());
    return step_;
  }
  bool resolver() const { return resolver_; }
  bool proposal() const { return ca_.proposal(); }
  GradedValue graded() const { return ca_.graded(); }
  bool resolution_value() const { return ca_.outcome()->value; }
  const std::optional<CAOutcome>& ca_outcome() const { return ca_.outcome(); }
  bool finished() const { return step() == Step::done; }
  const RapResult& result() const { return result_; }

  void wrote() {
    if (!ca_.outcome()) {
      ca_.wrote();
      return;
    }
    if (step_ != Step::write_resolution) throw ContractViolation("rap: unexpected write");
    result_ = ca_.outcome()->value;
    step_ = Step::done;
  }

  void observe(const InstanceView& v) {
    if (!ca_.outcome()) {
      ca_.observe(v);
      if (ca_.outcome()) after_commit_adopt();
      return;
    }
    if (step_ != Step::read_resolution) throw ContractViolation("rap: unexpected snapshot");
    result_ = v.resolution;
    step_ = Step::done;
  }

  bool operator==(const RapParticipant&) const = default;

 private:
  void after_commit_adopt() {
    const CAOutcome o = *ca_.outcome();
    if (resolver_) {
      step_ = Step::write_resolution;
    } else if (o.grade == Grade::commit) {
      result_ = o.value;
      step_ = Step::done;
    } else {
      step_ = Step::read_resolution;
    }
  }

  bool resolver_;
  CommitAdopt ca_;
  Step step_ = Step::write_proposal;
  RapResult result_;
};

// ---------------------------------------------------------------------------
// Standalone single-instance drivers over the kernel

struct AgreementRegister {
  std::optional<bool> proposal;
  std::optional<GradedValue> graded;
  std::optional<bool> resolution;
  bool operator==(const AgreementRegister&) const = default;
};

inline InstanceView instance_view(const MemoryImage<AgreementRegister>& image, ProcessId resolver) {
  InstanceView v;
  for (const auto& cell : image) {
    v.proposals.push_back(cell ? cell->proposal : std::nullopt);
    v.graded.push_back(cell ? cell->graded : std::nullopt);
  }
  if (resolver >= 1 && resolver <= static_cast<int>(image.size())) {
    const auto& cell = image[static_cast<std::size_t>(resolver - 1)];
    if (cell) v.resolution = cell->resolution;
  }
  return v;
}

// Current content of the resolution register.
inline RapResult rap_read_resolution(const MemoryImage<AgreementRegister>& image, ProcessId resolver) {
  return instance_view(image, resolver).resolution;
}

// Identifies a RAP instance: its resolver and the round-level it decides.
struct RapInstanceId {
  ProcessId resolver = 1;
  RoundLevel at;
  bool operator==(const RapInstanceId&) const = default;
};

class RapProcess {
 public:
  using value_type = AgreementRegister;

  RapProcess(ProcessId self, RapInstanceId instance) : self_(self), instance_(instance) {}

  void propose(bool v) {
    if (machine_) throw ContractViolation("process " + std::to_string(self_) + " proposed twice");
    machine_.emplace(self_ == instance_.resolver, v);
  }

  std::optional<Primitive<value_type>> pending() const {
    if (!machine_) return std::nullopt;
    switch (machine_->step()) {
      case RapParticipant::Step::write_proposal: {
        AgreementRegister r = reg_;
        r.proposal = machine_->proposal();
        return WriteOp<value_type>{r};
      }
      case RapParticipant::Step::write_graded: {
        AgreementRegister r = reg_;
        r.graded = machine_->graded();
        return WriteOp<value_type>{r};
      }
      case RapParticipant::Step::write_resolution: {
        AgreementRegister r = reg_;
        r.resolution = machine_->resolution_value();
        return WriteOp<value_type>{r};
      }
      case RapParticipant::Step::done: return std::nullopt;
      default: return SnapshotOp{};
    }
  }

  void on_write_done() {
    switch (machine_->step()) {
      case RapParticipant::Step::write_proposal: reg_.proposal = machine_->proposal(); break;
      case RapParticipant::Step::write_graded: reg_.graded = machine_->graded(); break;
      default: reg_.resolution = machine_->resolution_value(); break;
    }
    machine_->wrote();
  }

  void on_snapshot(const MemoryImage<value_type>& image) {
    machine_->observe(instance_view(image, instance_.resolver));
  }

  bool proposed() const { return machine_.has_value(); }
  bool decided() const { return machine_ && machine_->finished(); }
  RapResult result() const { return machine_ ? machine_->result() : std::nullopt; }
  std::optional<CAOutcome> ca_outcome() const { return machine_ ? machine_->ca_outcome() : std::nullopt; }
  std::optional<bool> proposal() const {
    return machine_ ? std::optional<bool>(machine_->proposal()) : std::nullopt;
  }
  bool is_resolver() const { return self_ == instance_.resolver; }

  bool operator==(const RapProcess&) const = default;

 private:
  ProcessId self_;
  RapInstanceId instance_;
  AgreementRegister reg_;
  std::optional<RapParticipant> machine_;
};

// Processes 1..n for one instance; proposals[k] (if set) is process k+1's input.
inline std::vector<RapProcess> make_rap_instance(RapInstanceId instance,
                                                 const std::vector<std::optional<bool>>& proposals) {
  std::vector<RapProcess> procs;
  for (std::size_t k = 0; k < proposals.size(); ++k) {
    procs.emplace_back(static_cast<ProcessId>(k + 1), instance);
    if (proposals[k]) procs.back().propose(*proposals[k]);
  }
  return procs;
}

// Checks RAP properties (i)-(iv) over the decided participants of one run.
// Returns a description of the first violation.
inline std::optional<std::string> find_rap_violation(const std::vector<RapProcess>& procs) {
  bool any = false, unanimous = true, first = true, common = false;
  for (const auto& p : procs) {
    auto v = p.proposal();
    if (!v) continue;
    any = true;
    if (first) common = *v, first = false;
    else if (*v != common) unanimous = false;
  }
  std::optional<bool> returned;
  for (std::size_t k = 0; k < procs.size(); ++k) {
    const auto& p = procs[k];
    if (!p.decided()) continue;
    const std::string who = "process " + std::to_string(k + 1);
    RapResult r = p.result();
    if (r) {
      bool proposed_by_someone = false;
      for (const auto& q : procs)
        if (q.proposal() && *q.proposal() == *r) proposed_by_someone = true;
      if (!proposed_by_someone) return who + " returned an unproposed value";  // (i)
      if (returned && *returned != *r) return who + " returned a conflicting value";  // (iv)
      returned = r;
    } else {
      if (any && unanimous) return who + " returned bottom on unanimous proposals";  // (ii)
      if (p.is_resolver()) return who + " is the resolver and returned bottom";  // (iii)
    }
  }
  return std::nullopt;
}

}  // namespace iisim
