#pragma once

#include <algorithm>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "seqlogic/circuit.hpp"
#include "seqlogic/rng.hpp"

namespace seqlogic {

inline constexpr std::size_t kMaxTotalDim = std::size_t{1} << 20;  // 20 qubit-equivalents

/// Dense state over the live registers. Flat indexing is little-endian in
/// register order: the first live register varies fastest, the system
/// register (declared last) is slowest-varying. Amplitudes are renormalized
/// after every measurement; `accumulated_probability` carries the product of
/// all realized outcome probabilities.
struct SimState {
  std::vector<int> dims;        // per register, fixed
  std::vector<char> live;      // per register
  StateVector amps;            // over live registers only
  double accumulated_probability = 1.0;
  std::vector<int> outcomes;   // slot -> outcome index, -1 while unmeasured
  bool failed = false;         // a failure outcome was realized

  std::vector<std::size_t> live_strides() const {
    std::vector<std::size_t> s(dims.size(), 0);
    std::size_t acc = 1;
    for (std::size_t r = 0; r < dims.size(); ++r) {
      if (!live[r]) continue;
      s[r] = acc;
      acc *= static_cast<std::size_t>(dims[r]);
    }
    return s;
  }

  void apply_unitary(const std::vector<int>& targets, const ComplexMatrix& u) {
    apply_operator(targets, u);
  }

  std::vector<double> measurement_probabilities(const std::vector<int>& targets,
                                                const std::vector<ComplexMatrix>& ops) const {
    detail_block blk = make_block(targets);
    std::vector<double> probs(ops.size(), 0.0);
    StateVector v(blk.offsets.size());
    for (std::size_t base : blk.bases) {
      for (std::size_t j = 0; j < blk.offsets.size(); ++j)
        v[static_cast<Eigen::Index>(j)] = amps[static_cast<Eigen::Index>(base + blk.offsets[j])];
      for (std::size_t i = 0; i < ops.size(); ++i) probs[i] += (ops[i] * v).squaredNorm();
    }
    return probs;
  }

  /// Applies one measurement operator, renormalizes, and returns the realized
  /// probability. Throws ImpossibleBranchError below the pruning threshold.
  double collapse(const std::vector<int>& targets, const ComplexMatrix& op) {
    apply_operator(targets, op);
    double p = amps.squaredNorm();
    if (p < kBranchPruneTol)
      throw ImpossibleBranchError("measurement branch has probability " + std::to_string(p));
    amps /= std::sqrt(p);
    accumulated_probability *= p;
    return p;
  }

  /// Removes an unentangled register, contracting the amplitudes against its
  /// local pure state. The register's reduced density matrix must be rank one
  /// within 1e-9 (defect = 1 - largest eigenvalue).
  void discard_register(int reg) {
    if (reg < 0 || static_cast<std::size_t>(reg) >= dims.size() || !live[reg])
      throw Error("discard of a register that is not live");
    detail_block blk = make_block({reg});
    const int q = dims[reg];
    ComplexMatrix rho = ComplexMatrix::Zero(q, q);
    for (std::size_t base : blk.bases)
      for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b)
          rho(a, b) += amps[static_cast<Eigen::Index>(base + blk.offsets[a])] *
                       std::conj(amps[static_cast<Eigen::Index>(base + blk.offsets[b])]);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
    const double trace = rho.trace().real();
    const double defect = trace - es.eigenvalues().maxCoeff();
    if (defect > kAlgebraTol)
      throw EntangledDiscardError("register " + std::to_string(reg) + " is still entangled", defect);
    StateVector local = phase_fixed(es.eigenvectors().col(q - 1));
    StateVector rest = StateVector::Zero(static_cast<Eigen::Index>(blk.bases.size()));
    for (std::size_t b = 0; b < blk.bases.size(); ++b) {
      Complex acc = 0.0;
      for (int a = 0; a < q; ++a)
        acc += std::conj(local[a]) * amps[static_cast<Eigen::Index>(blk.bases[b] + blk.offsets[a])];
      rest[static_cast<Eigen::Index>(b)] = acc;
    }
    rest /= rest.norm();
    amps = std::move(rest);
    live[reg] = 0;
  }

 private:
  struct detail_block {
    std::vector<std::size_t> offsets;  // per joint target index, first target most significant
    std::vector<std::size_t> bases;    // bases[k] is the k-th flat index of the complement
  };

  // Offsets of the target subspace and the complementary bases. Bases are
  // generated so that bases[k] corresponds to flat index k of the state with
  // the targets removed — discard_register relies on that order.
  detail_block make_block(const std::vector<int>& targets) const {
    const std::vector<std::size_t> strides = live_strides();
    std::size_t blk_dim = 1;
    for (int t : targets) {
      if (t < 0 || static_cast<std::size_t>(t) >= dims.size() || !live[t])
        throw Error("instruction targets a register that is not live");
      blk_dim *= static_cast<std::size_t>(dims[t]);
    }
    detail_block blk;
    blk.offsets.assign(blk_dim, 0);
    for (std::size_t j = 0; j < blk_dim; ++j) {
      std::size_t rem = j, off = 0;
      for (std::size_t i = targets.size(); i-- > 0;) {
        const int t = targets[i];
        off += (rem % static_cast<std::size_t>(dims[t])) * strides[t];
        rem /= static_cast<std::size_t>(dims[t]);
      }
      blk.offsets[j] = off;
    }
    blk.bases.assign(1, 0);
    for (std::size_t r = 0; r < dims.size(); ++r) {
      if (!live[r]) continue;
      if (std::find(targets.begin(), targets.end(), static_cast<int>(r)) != targets.end()) continue;
      std::vector<std::size_t> grown;
      grown.reserve(blk.bases.size() * static_cast<std::size_t>(dims[r]));
      for (int digit = 0; digit < dims[r]; ++digit)
        for (std::size_t b : blk.bases) grown.push_back(b + static_cast<std::size_t>(digit) * strides[r]);
      blk.bases = std::move(grown);
    }
    return blk;
  }

  void apply_operator(const std::vector<int>& targets, const ComplexMatrix& op) {
    detail_block blk = make_block(targets);
    if (op.rows() != op.cols() || static_cast<std::size_t>(op.rows()) != blk.offsets.size())
      throw Error("operator dimension does not match its targets");
    StateVector v(op.rows()), w(op.rows());
    for (std::size_t base : blk.bases) {
      for (std::size_t j = 0; j < blk.offsets.size(); ++j)
        v[static_cast<Eigen::Index>(j)] = amps[static_cast<Eigen::Index>(base + blk.offsets[j])];
      w.noalias() = op * v;
      for (std::size_t j = 0; j < blk.offsets.size(); ++j)
        amps[static_cast<Eigen::Index>(base + blk.offsets[j])] = w[static_cast<Eigen::Index>(j)];
    }
  }
};

/// Full record of one protocol execution.
struct RunOutcome {
  bool success = false;
  std::optional<bool> truth_value;     // present iff success; true iff readout = 1
  double probability = 1.0;            // exact probability of this trajectory
  StateVector residual_system_state;   // system state after the readout; empty unless success
  std::vector<int> outcomes;           // slot -> outcome index, -1 if never reached
};

namespace detail {

inline const std::vector<int>* measurement_targets(const Instruction& ins) {
  if (const auto* m = std::get_if<ProjectiveMeasure>(&ins)) return &m->targets;
  if (const auto* g = std::get_if<GeneralizedMeasure>(&ins)) return &g->targets;
  return nullptr;
}

inline int measurement_slot(const Instruction& ins) {
  if (const auto* m = std::get_if<ProjectiveMeasure>(&ins)) return m->slot;
  if (const auto* g = std::get_if<GeneralizedMeasure>(&ins)) return g->slot;
  return -1;
}

inline SimState make_initial_state(const Circuit& c, const StateVector& psi) {
  SimState st;
  st.dims.reserve(c.registers.size());
  for (const auto& r : c.registers) st.dims.push_back(r.dim);
  st.live.assign(c.registers.size(), 1);
  st.outcomes.assign(static_cast<std::size_t>(c.num_slots), -1);

  std::size_t total = 1;
  for (int d : st.dims) {
    total *= static_cast<std::size_t>(d);
    if (total > kMaxTotalDim) throw Error("state exceeds the 20 qubit-equivalent cap");
  }

  if (c.input_register < 0) throw Error("circuit declares no input register");
  if (psi.size() != c.registers[c.input_register].dim)
    throw Error("input state dimension does not match the circuit layout");
  if (!is_normalized(psi)) throw Error("input state is not normalized");

  std::vector<const InitFactor*> by_first(c.registers.size(), nullptr);
  for (const auto& f : c.init) {
    if (f.regs.empty()) throw Error("empty init factor");
    int first = *std::min_element(f.regs.begin(), f.regs.end());
    by_first[first] = &f;
  }

  StateVector amps = StateVector::Ones(1);
  for (std::size_t r = 0; r < c.registers.size();) {
    const InitFactor* f = by_first[r];
    if (f == nullptr) throw Error("register " + std::to_string(r) + " has no init factor");
    StateVector part;
    std::size_t span = 1;
    switch (f->kind) {
      case InitKind::InputState:
        part = psi;
        break;
      case InitKind::GroundState:
        part = StateVector::Zero(c.registers[r].dim);
        part[0] = 1.0;
        break;
      case InitKind::BellPair: {
        if (f->regs.size() != 2 ||
            static_cast<std::size_t>(std::max(f->regs[0], f->regs[1])) != r + 1)
          throw Error("Bell init must cover two consecutive registers");
        part = StateVector::Zero(4);
        part[0] = part[3] = 1.0 / std::sqrt(2.0);
        span = 2;
        break;
      }
    }
    StateVector grown(amps.size() * part.size());
    for (Eigen::Index j = 0; j < part.size(); ++j)
      grown.segment(j * amps.size(), amps.size()) = part[j] * amps;
    amps = std::move(grown);
    r += span;
  }
  st.amps = std::move(amps);
  return st;
}

}  // namespace detail

/// Steps a Circuit instruction by instruction. Measurement outcomes are
/// chosen by the caller, so the same machinery serves seeded sampling,
/// forced-branch replay, and exhaustive trajectory enumeration. Executors are
/// value types; copy one to fork a trajectory.
class CircuitExecutor {
 public:
  CircuitExecutor(const Circuit& circuit, const StateVector& psi)
      : circuit_(&circuit), state_(detail::make_initial_state(circuit, psi)) {
    roles_.reserve(circuit.registers.size());
    for (const auto& r : circuit.registers) roles_.push_back(r.role);
    system_register_ = -1;
    for (std::size_t r = 0; r < circuit.registers.size(); ++r)
      if (circuit.registers[r].role.kind == RoleKind::System) system_register_ = static_cast<int>(r);
  }

  const Circuit& circuit() const { return *circuit_; }
  const SimState& state() const { return state_; }
  const std::vector<QubitRole>& roles() const { return roles_; }
  bool failed() const { return state_.failed; }

  bool is_measurement(std::size_t ip) const {
    return detail::measurement_targets(circuit_->instructions[ip]) != nullptr;
  }

  int slot_of(std::size_t ip) const { return detail::measurement_slot(circuit_->instructions[ip]); }

  std::vector<double> outcome_probabilities(std::size_t ip) const {
    const Instruction& ins = circuit_->instructions[ip];
    if (const auto* m = std::get_if<ProjectiveMeasure>(&ins))
      return state_.measurement_probabilities(m->targets, m->projectors);
    if (const auto* g = std::get_if<GeneralizedMeasure>(&ins))
      return state_.measurement_probabilities(g->targets, g->operators);
    throw Error("instruction is not a measurement");
  }

  void apply_outcome(std::size_t ip, int outcome) {
    const Instruction& ins = circuit_->instructions[ip];
    if (const auto* m = std::get_if<ProjectiveMeasure>(&ins)) {
      if (outcome < 0 || outcome >= static_cast<int>(m->projectors.size()))
        throw Error("measurement outcome out of range");
      state_.collapse(m->targets, m->projectors[outcome]);
      state_.outcomes[m->slot] = outcome;
    } else if (const auto* g = std::get_if<GeneralizedMeasure>(&ins)) {
      if (outcome < 0 || outcome >= static_cast<int>(g->operators.size()))
        throw Error("measurement outcome out of range");
      state_.collapse(g->targets, g->operators[outcome]);
      state_.outcomes[g->slot] = outcome;
      if (outcome == g->failure_index) state_.failed = true;
    } else {
      throw Error("instruction is not a measurement");
    }
  }

  void step(std::size_t ip) {
    const Instruction& ins = circuit_->instructions[ip];
    if (const auto* u = std::get_if<Unitary>(&ins)) {
      state_.apply_unitary(u->targets, u->matrix);
    } else if (const auto* cu = std::get_if<ConditionalUnitary>(&ins)) {
      int got = state_.outcomes.at(static_cast<std::size_t>(cu->condition_slot));
      if (got < 0) throw Error("conditional references a slot measured later");
      if (got == cu->condition_value) state_.apply_unitary(cu->targets, cu->matrix);
    } else if (const auto* d = std::get_if<Discard>(&ins)) {
      state_.discard_register(d->target);
    } else if (const auto* rl = std::get_if<Relabel>(&ins)) {
      if (!state_.live[rl->target]) throw Error("relabel of a register that is not live");
      roles_[rl->target] = rl->new_role;
    } else {
      throw Error("step on a measurement instruction");
    }
  }

  RunOutcome finish() const {
    RunOutcome out;
    out.outcomes = state_.outcomes;
    out.probability = state_.accumulated_probability;
    out.success = !state_.failed && circuit_->final_slot >= 0 &&
                  state_.outcomes[static_cast<std::size_t>(circuit_->final_slot)] >= 0;
    if (out.success) {
      out.truth_value = state_.outcomes[static_cast<std::size_t>(circuit_->final_slot)] == 1;
      SimState residual = state_;
      for (std::size_t r = 0; r < residual.dims.size(); ++r)
        if (residual.live[r] && static_cast<int>(r) != system_register_)
          residual.discard_register(static_cast<int>(r));
      out.residual_system_state = residual.amps;
    }
    return out;
  }

 private:
  const Circuit* circuit_;
  SimState state_;
  std::vector<QubitRole> roles_;
  int system_register_ = -1;
};

using OutcomeChooser = std::function<int(int slot, const std::vector<double>& probabilities)>;

inline RunOutcome run_with_chooser(const Circuit& c, const StateVector& psi,
                                   const OutcomeChooser& choose) {
  CircuitExecutor ex(c, psi);
  for (std::size_t ip = 0; ip < c.instructions.size(); ++ip) {
    if (ex.is_measurement(ip)) {
      ex.apply_outcome(ip, choose(ex.slot_of(ip), ex.outcome_probabilities(ip)));
      if (ex.failed()) break;
    } else {
      ex.step(ip);
    }
  }
  return ex.finish();
}

/// Seeded execution; deterministic given (circuit, psi, seed).
inline RunOutcome run(const Circuit& c, const StateVector& psi, std::uint64_t seed) {
  RandomStream rng(seed);
  return run_with_chooser(c, psi, [&rng](int, const std::vector<double>& probs) {
    return rng.pick(probs, kBranchPruneTol);
  });
}

/// Follows the specified branch; `forced` maps every result slot to an
/// outcome index. The returned probability is the exact joint probability of
/// the trajectory.
inline RunOutcome run_forced(const Circuit& c, const StateVector& psi,
                             const std::vector<int>& forced) {
  if (forced.size() != static_cast<std::size_t>(c.num_slots))
    throw Error("forced outcome list must cover every result slot");
  return run_with_chooser(
      c, psi, [&forced](int slot, const std::vector<double>&) { return forced[slot]; });
}

namespace detail {

template <typename Callback>
void enumerate_rec(CircuitExecutor ex, std::size_t ip, std::size_t end, const Callback& cb) {
  for (; ip < end; ++ip) {
    if (ex.is_measurement(ip)) {
      const std::vector<double> probs = ex.outcome_probabilities(ip);
      for (int k = 0; k < static_cast<int>(probs.size()); ++k) {
        if (probs[static_cast<std::size_t>(k)] <= kBranchPruneTol) continue;
        CircuitExecutor branch = ex;
        branch.apply_outcome(ip, k);
        if (branch.failed())
          cb(branch);
        else
          enumerate_rec(std::move(branch), ip + 1, end, cb);
      }
      return;
    }
    ex.step(ip);
  }
  cb(ex);
}

}  // namespace detail

/// Visits every trajectory with probability above the pruning threshold.
/// Probabilities of all visited trajectories sum to 1 (within tolerance).
inline void enumerate_trajectories(const Circuit& c, const StateVector& psi,
                                   const std::function<void(const RunOutcome&)>& cb) {
  detail::enumerate_rec(CircuitExecutor(c, psi), 0, c.instructions.size(),
                        [&cb](const CircuitExecutor& ex) { cb(ex.finish()); });
}

/// Enumerates the branches of the preparation stage only; the callback sees
/// the executor positioned right after stage 1 (teleport: one branch per
/// realized parity pattern; direct: a single branch).
inline void enumerate_stage1_branches(const Circuit& c, const StateVector& psi,
                                      const std::function<void(const CircuitExecutor&)>& cb) {
  detail::enumerate_rec(CircuitExecutor(c, psi), 0, c.stage1_end, cb);
}

/// Amplitude dump: one basis label + complex pair per line, flat order.
/// Digits are listed per live register in register order.
inline std::string dump_amplitudes(const SimState& st, const std::vector<QubitRole>& roles) {
  std::string out = "format_version 1\n";
  std::vector<int> live_regs;
  for (std::size_t r = 0; r < st.dims.size(); ++r)
    if (st.live[r]) live_regs.push_back(static_cast<int>(r));
  out += "registers";
  for (int r : live_regs) out += " | " + role_to_string(roles[static_cast<std::size_t>(r)]);
  out += '\n';
  char buf[96];
  for (Eigen::Index i = 0; i < st.amps.size(); ++i) {
    out += "basis";
    std::size_t rem = static_cast<std::size_t>(i);
    for (int r : live_regs) {
      out += ' ' + std::to_string(rem % static_cast<std::size_t>(st.dims[r]));
      rem /= static_cast<std::size_t>(st.dims[r]);
    }
    std::snprintf(buf, sizeof buf, " %.17g %.17g\n", st.amps[i].real(), st.amps[i].imag());
    out += buf;
  }
  return out;
}

}  // namespace seqlogic
