#pragma once

#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "seqlogic/oracle.hpp"
#include "seqlogic/prop.hpp"

namespace seqlogic {

enum class PreparationPath { Teleport, Direct };

inline const char* path_name(PreparationPath p) {
  return p == PreparationPath::Teleport ? "teleport" : "direct";
}

enum class RoleKind { LeafAncilla, PrimedAncilla, NodeAncilla, System };

/// Role of a register slot. Names: the elementary label for leaf/primed
/// ancillas (with a #k suffix when a label occurs more than once), the
/// printed sub-proposition for node ancillas, "f" for the system.
struct QubitRole {
  RoleKind kind;
  std::string name;

  friend bool operator==(const QubitRole& a, const QubitRole& b) {
    return a.kind == b.kind && a.name == b.name;
  }
};

inline std::string role_to_string(const QubitRole& r) {
  switch (r.kind) {
    case RoleKind::LeafAncilla:
      return "leaf " + r.name;
    case RoleKind::PrimedAncilla:
      return "prime " + r.name;
    case RoleKind::NodeAncilla:
      return "node " + r.name;
    case RoleKind::System:
      return "system " + r.name;
  }
  return "?";
}

struct RegisterDecl {
  QubitRole role;
  int dim;
};

/// How the initial state factorizes over the register list. InputState marks
/// the register that receives the run-time state; BellPair spans two qubit
/// registers prepared in (|00> + |11>)/sqrt(2); GroundState is |0>.
enum class InitKind { InputState, BellPair, GroundState };

struct InitFactor {
  InitKind kind;
  std::vector<int> regs;
};

// Instructions. Target lists name register slots; the first target is the
// most significant digit of the instruction matrix's basis index.
struct Unitary {
  std::vector<int> targets;
  ComplexMatrix matrix;
  std::string tag;
};

struct ProjectiveMeasure {
  std::vector<int> targets;
  std::vector<ComplexMatrix> projectors;
  int slot;
  std::string tag;
};

struct GeneralizedMeasure {
  std::vector<int> targets;
  std::vector<ComplexMatrix> operators;
  int slot;
  int failure_index;  // realizing this outcome aborts the run
  std::string tag;
};

struct ConditionalUnitary {
  int condition_slot;
  int condition_value;
  std::vector<int> targets;
  ComplexMatrix matrix;
  std::string tag;
};

struct Discard {
  int target;
};

struct Relabel {
  int target;
  QubitRole new_role;
};

using Instruction =
    std::variant<Unitary, ProjectiveMeasure, GeneralizedMeasure, ConditionalUnitary, Discard, Relabel>;

struct Circuit {
  PreparationPath path = PreparationPath::Direct;
  std::string proposition;  // canonical printed form
  int system_dim = 2;
  std::vector<RegisterDecl> registers;
  std::vector<InitFactor> init;
  std::vector<Instruction> instructions;
  std::size_t stage1_end = 0;  // instruction count of the preparation stage
  int num_slots = 0;
  std::vector<std::string> slot_tags;
  int final_slot = -1;     // readout on the root wire
  int root_register = -1;
  int input_register = -1;  // receives the run-time state

  /// Success predicate: slots whose failure outcome aborts the run.
  std::vector<std::pair<int, int>> failure_slots() const {
    std::vector<std::pair<int, int>> out;
    for (const auto& ins : instructions)
      if (const auto* g = std::get_if<GeneralizedMeasure>(&ins))
        out.emplace_back(g->slot, g->failure_index);
    return out;
  }
};

inline ComplexMatrix pauli_x() {
  ComplexMatrix x = ComplexMatrix::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1.0;
  return x;
}

/// CNOT with the first target as control.
inline ComplexMatrix cnot() {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

/// Two-qubit parity projectors: even {|00>,|11>}, odd {|01>,|10>}.
inline ComplexMatrix parity_even() {
  ComplexMatrix p = ComplexMatrix::Zero(4, 4);
  p(0, 0) = p(3, 3) = 1.0;
  return p;
}

inline ComplexMatrix parity_odd() {
  ComplexMatrix p = ComplexMatrix::Zero(4, 4);
  p(1, 1) = p(2, 2) = 1.0;
  return p;
}

inline ComplexMatrix ket_projector(int value) {
  ComplexMatrix p = ComplexMatrix::Zero(2, 2);
  p(value, value) = 1.0;
  return p;
}

/// 2x2 unitary with columns (|psi_not_x>, |psi_x>): maps |1> to the given
/// state and |0> to its orthogonal complement, whose phase is fixed so its
/// first nonzero amplitude is real positive.
inline ComplexMatrix build_elementary_unitary(const StateVector& psi_x) {
  if (psi_x.size() != 2) throw Error("build_elementary_unitary: not a qubit state");
  if (!is_normalized(psi_x)) throw Error("build_elementary_unitary: state is not normalized");
  StateVector orth(2);
  orth[0] = -std::conj(psi_x[1]);
  orth[1] = std::conj(psi_x[0]);
  orth = phase_fixed(std::move(orth));
  ComplexMatrix u(2, 2);
  u.col(0) = orth;
  u.col(1) = psi_x;
  return u;
}

struct CoherentAndPair {
  ComplexMatrix success;  // (1/sqrt(3)) ( |01>(<00|+<01|+<10|) + |11><11| )
  ComplexMatrix failure;  // (I - Ms' Ms)^{1/2}
};

inline CoherentAndPair build_coherent_and_pair() {
  const double s = 1.0 / std::sqrt(3.0);
  ComplexMatrix ms = ComplexMatrix::Zero(4, 4);
  ms(1, 0) = ms(1, 1) = ms(1, 2) = s;  // |01> <- span{00,01,10}
  ms(3, 3) = s;                        // |11> <- |11>
  ComplexMatrix mf =
      matrix_sqrt_psd(ComplexMatrix::Identity(4, 4) - ComplexMatrix(ms.adjoint() * ms));
  return {std::move(ms), std::move(mf)};
}

/// Coherent recording unitary |j><k| (x) [x^(j xor k)] on (ancilla, system):
/// block form [[I-P, P], [P, I-P]]. Unitary for every projector P.
inline ComplexMatrix build_recording_unitary(const ComplexMatrix& projector) {
  const Eigen::Index d = projector.rows();
  ComplexMatrix rest = ComplexMatrix::Identity(d, d) - projector;
  ComplexMatrix v(2 * d, 2 * d);
  v.block(0, 0, d, d) = rest;
  v.block(0, d, d, d) = projector;
  v.block(d, 0, d, d) = projector;
  v.block(d, d, d, d) = rest;
  return v;
}

struct CompileOptions {
  PreparationPath path = PreparationPath::Teleport;
};

namespace detail {

// Register names for leaf occurrences: the label itself, "#k"-suffixed from
// the second occurrence of a repeated label on.
inline std::vector<std::string> leaf_register_names(const std::vector<std::string>& labels) {
  std::map<std::string, int> seen;
  std::vector<std::string> names;
  names.reserve(labels.size());
  for (const auto& label : labels) {
    int n = ++seen[label];
    names.push_back(n == 1 ? label : label + "#" + std::to_string(n));
  }
  return names;
}

// Extracts |psi_x> from a rank-1 qubit projector, deterministically phased.
inline StateVector rank1_state(const ComplexMatrix& projector, const std::string& label) {
  if (projector.rows() != 2)
    throw Error("teleport path requires qubit projectors; '" + label + "' is not 2x2");
  if (std::abs(projector.trace().real() - 1.0) > 1e-8 || std::abs(projector.trace().imag()) > 1e-8)
    throw Error("teleport path requires rank-1 projectors; '" + label + "' has rank != 1");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(projector);
  return phase_fixed(es.eigenvectors().col(1));  // eigenvalues ascend; rank-1 top is last
}

struct Stage2Emitter {
  Circuit& circuit;
  const CoherentAndPair& and_pair;
  const std::vector<int>& leaf_regs;
  std::size_t next_leaf = 0;
  std::map<std::string, int> name_uses;

  int new_slot(std::string tag) {
    circuit.slot_tags.push_back(std::move(tag));
    return circuit.num_slots++;
  }

  // Structurally identical sub-propositions are distinct nodes; suffix
  // repeated printed forms so node ids stay unique per live wire.
  std::string node_name(const PropPtr& node) {
    std::string name = print_proposition(node);
    int n = ++name_uses[name];
    return n == 1 ? name : name + "#" + std::to_string(n);
  }

  int emit(const PropPtr& node) {
    switch (node->kind) {
      case PropKind::Elementary:
        return leaf_regs[next_leaf++];
      case PropKind::Not: {
        int r = emit(node->left);
        std::string name = node_name(node);
        circuit.instructions.push_back(Unitary{{r}, pauli_x(), "not[" + name + "]"});
        circuit.instructions.push_back(Relabel{r, QubitRole{RoleKind::NodeAncilla, name}});
        return r;
      }
      case PropKind::SeqAnd: {
        int left = emit(node->left);
        int right = emit(node->right);
        std::string name = node_name(node);
        int slot = new_slot("and[" + name + "]");
        circuit.instructions.push_back(GeneralizedMeasure{
            {left, right}, {and_pair.success, and_pair.failure}, slot, 1, "and[" + name + "]"});
        circuit.instructions.push_back(Discard{right});
        circuit.instructions.push_back(Relabel{left, QubitRole{RoleKind::NodeAncilla, name}});
        return left;
      }
      case PropKind::SeqXor:
        throw Error("'^' has no reduction protocol; it cannot be compiled");
    }
    throw Error("corrupt proposition node");
  }
};

}  // namespace detail

/// Lowers a proposition to the two-stage protocol. Stage 1 prepares the
/// history state of the leaf chain (teleport path: Bell pairs, basis
/// rotations, parity measurements with corrections; direct path: one
/// recording unitary per leaf). Stage 2 walks the reduction schedule: X for
/// each negation, the nondeterministic coherent-AND pair for each '&'.
/// Ends with a computational readout of the root wire.
inline Circuit compile(const PropPtr& prop, const ElementaryAssignment& asg,
                       CompileOptions opts = {}) {
  PropPtr p = canonicalize(prop);
  if (contains_seq_xor(p)) throw Error("'^' has no reduction protocol; it cannot be compiled");

  Circuit c;
  c.path = opts.path;
  c.proposition = print_proposition(p);
  c.system_dim = asg.system_dim;

  const std::vector<std::string> labels = leaf_labels(p);
  const std::vector<std::string> names = detail::leaf_register_names(labels);
  const std::size_t n = labels.size();
  std::vector<int> leaf_regs(n);

  if (opts.path == PreparationPath::Teleport) {
    if (asg.system_dim != 2) throw Error("teleport path requires a qubit system (dimension 2)");
    // Register layout: leaf, prime, leaf, prime, ..., system. The input state
    // enters on the first leaf wire and teleports down the chain.
    for (std::size_t i = 0; i < n; ++i) {
      leaf_regs[i] = static_cast<int>(2 * i);
      c.registers.push_back({QubitRole{RoleKind::LeafAncilla, names[i]}, 2});
      c.registers.push_back({QubitRole{RoleKind::PrimedAncilla, names[i] + "'"}, 2});
    }
    const int system = static_cast<int>(2 * n);
    c.registers.push_back({QubitRole{RoleKind::System, "f"}, 2});
    c.input_register = leaf_regs[0];
    c.init.push_back({InitKind::InputState, {c.input_register}});
    for (std::size_t i = 0; i < n; ++i)
      c.init.push_back({InitKind::BellPair, {leaf_regs[i] + 1, leaf_regs[i] + 2}});

    for (std::size_t i = 0; i < n; ++i) {
      const StateVector psi_x = detail::rank1_state(asg.projector_for(labels[i]), labels[i]);
      const ComplexMatrix u = build_elementary_unitary(psi_x);
      const int leaf = leaf_regs[i];
      const int prime = leaf + 1;
      const int next = i + 1 < n ? leaf_regs[i + 1] : system;
      c.slot_tags.push_back("parity[" + names[i] + "]");
      const int slot = c.num_slots++;
      c.instructions.push_back(Unitary{{leaf, prime},
                                       kron(u.adjoint(), u.transpose()),
                                       "rotate[" + names[i] + "]"});
      c.instructions.push_back(ProjectiveMeasure{
          {leaf, prime}, {parity_even(), parity_odd()}, slot, "parity[" + names[i] + "]"});
      c.instructions.push_back(ConditionalUnitary{
          slot, 1, {next}, u * pauli_x() * u.adjoint(), "correct[" + names[i] + "]"});
      c.instructions.push_back(Unitary{{leaf, prime}, cnot(), "disentangle[" + names[i] + "]"});
      c.instructions.push_back(Discard{prime});
    }
  } else {
    // Direct path: one fresh |0> ancilla per leaf, recorded by a single
    // two-register unitary with the system. Works for any projector rank and
    // any system dimension.
    for (std::size_t i = 0; i < n; ++i) {
      leaf_regs[i] = static_cast<int>(i);
      c.registers.push_back({QubitRole{RoleKind::LeafAncilla, names[i]}, 2});
      c.init.push_back({InitKind::GroundState, {static_cast<int>(i)}});
    }
    const int system = static_cast<int>(n);
    c.registers.push_back({QubitRole{RoleKind::System, "f"}, asg.system_dim});
    c.input_register = system;
    c.init.push_back({InitKind::InputState, {system}});
    for (std::size_t i = 0; i < n; ++i) {
      c.instructions.push_back(Unitary{{leaf_regs[i], system},
                                       build_recording_unitary(asg.projector_for(labels[i])),
                                       "record[" + names[i] + "]"});
    }
  }
  c.stage1_end = c.instructions.size();

  const CoherentAndPair and_pair = build_coherent_and_pair();
  detail::Stage2Emitter emitter{c, and_pair, leaf_regs};
  c.root_register = emitter.emit(p);
  if (p->kind == PropKind::Elementary) {
    c.instructions.push_back(
        Relabel{c.root_register, QubitRole{RoleKind::NodeAncilla, c.proposition}});
  }
  c.slot_tags.push_back("readout");
  c.final_slot = c.num_slots++;
  c.instructions.push_back(ProjectiveMeasure{
      {c.root_register}, {ket_projector(0), ket_projector(1)}, c.final_slot, "readout"});
  return c;
}

struct Violation {
  std::size_t instruction;  // index into instructions; SIZE_MAX for circuit-level issues
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Static checks of every instruction invariant: unitarity, completeness
/// relations, target liveness and dimensions, slot bookkeeping, and the
/// final-readout shape. Entanglement at Discard points is a simulation-time
/// check and is not decided here.
inline ValidationReport validate(const Circuit& c) {
  constexpr std::size_t kCircuitLevel = static_cast<std::size_t>(-1);
  ValidationReport report;
  auto flag = [&](std::size_t idx, std::string msg) {
    report.violations.push_back({idx, std::move(msg)});
  };

  const std::size_t nregs = c.registers.size();
  if (nregs == 0) {
    flag(kCircuitLevel, "circuit has no registers");
    return report;
  }
  std::vector<char> live(nregs, 1);
  std::vector<QubitRole> roles;
  for (const auto& r : c.registers) roles.push_back(r.role);
  for (std::size_t i = 0; i < nregs; ++i)
    for (std::size_t j = i + 1; j < nregs; ++j)
      if (roles[i] == roles[j])
        flag(kCircuitLevel, "registers " + std::to_string(i) + " and " + std::to_string(j) +
                                " share a role");

  std::vector<char> initialized(nregs, 0);
  for (const auto& f : c.init) {
    for (int r : f.regs) {
      if (r < 0 || static_cast<std::size_t>(r) >= nregs) {
        flag(kCircuitLevel, "init factor names register " + std::to_string(r) + " out of range");
        continue;
      }
      if (initialized[r]) flag(kCircuitLevel, "register " + std::to_string(r) + " initialized twice");
      initialized[r] = 1;
    }
    if (f.kind == InitKind::BellPair &&
        (f.regs.size() != 2 || c.registers[f.regs[0]].dim != 2 || c.registers[f.regs[1]].dim != 2))
      flag(kCircuitLevel, "Bell pair init must span two qubit registers");
    if (f.kind != InitKind::BellPair && f.regs.size() != 1)
      flag(kCircuitLevel, "single-register init factor names several registers");
  }
  for (std::size_t r = 0; r < nregs; ++r)
    if (!initialized[r]) flag(kCircuitLevel, "register " + std::to_string(r) + " never initialized");

  std::vector<int> slot_outcomes(static_cast<std::size_t>(c.num_slots), -1);

  auto check_targets = [&](std::size_t idx, const std::vector<int>& targets) -> long {
    long joint = 1;
    std::set<int> distinct;
    for (int t : targets) {
      if (t < 0 || static_cast<std::size_t>(t) >= nregs) {
        flag(idx, "target register " + std::to_string(t) + " out of range");
        return -1;
      }
      if (!live[t]) {
        flag(idx, "target register " + std::to_string(t) + " is not live");
        return -1;
      }
      if (!distinct.insert(t).second) {
        flag(idx, "duplicate target register " + std::to_string(t));
        return -1;
      }
      joint *= c.registers[t].dim;
    }
    return joint;
  };

  auto check_square = [&](std::size_t idx, const ComplexMatrix& m, long joint, const char* what) {
    if (m.rows() != m.cols() || m.rows() != joint)
      flag(idx, std::string(what) + " has shape " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()) + ", expected " + std::to_string(joint));
  };

  auto define_slot = [&](std::size_t idx, int slot, int outcomes) {
    if (slot < 0 || slot >= c.num_slots) {
      flag(idx, "result slot " + std::to_string(slot) + " out of range");
      return;
    }
    if (slot_outcomes[slot] != -1) flag(idx, "result slot " + std::to_string(slot) + " reused");
    slot_outcomes[slot] = outcomes;
  };

  for (std::size_t idx = 0; idx < c.instructions.size(); ++idx) {
    const Instruction& ins = c.instructions[idx];
    if (const auto* u = std::get_if<Unitary>(&ins)) {
      long joint = check_targets(idx, u->targets);
      if (joint < 0) continue;
      check_square(idx, u->matrix, joint, "unitary");
      if (unitarity_defect(u->matrix) > kAlgebraTol) flag(idx, "matrix is not unitary");
    } else if (const auto* m = std::get_if<ProjectiveMeasure>(&ins)) {
      long joint = check_targets(idx, m->targets);
      if (joint < 0) continue;
      ComplexMatrix sum = ComplexMatrix::Zero(joint, joint);
      for (const auto& p : m->projectors) {
        check_square(idx, p, joint, "projector");
        if (p.rows() == joint && !is_projector(p)) flag(idx, "operator is not a projector");
        if (p.rows() == joint) sum += p;
      }
      if (max_abs(sum - ComplexMatrix::Identity(joint, joint)) > kAlgebraTol)
        flag(idx, "projectors do not resolve the identity");
      define_slot(idx, m->slot, static_cast<int>(m->projectors.size()));
    } else if (const auto* g = std::get_if<GeneralizedMeasure>(&ins)) {
      long joint = check_targets(idx, g->targets);
      if (joint < 0) continue;
      ComplexMatrix sum = ComplexMatrix::Zero(joint, joint);
      for (const auto& op : g->operators) {
        check_square(idx, op, joint, "measurement operator");
        if (op.rows() == joint) sum += op.adjoint() * op;
      }
      if (max_abs(sum - ComplexMatrix::Identity(joint, joint)) > kAlgebraTol)
        flag(idx, "operators do not satisfy the completeness relation");
      if (g->failure_index < 0 || g->failure_index >= static_cast<int>(g->operators.size()))
        flag(idx, "failure index out of range");
      define_slot(idx, g->slot, static_cast<int>(g->operators.size()));
    } else if (const auto* cu = std::get_if<ConditionalUnitary>(&ins)) {
      long joint = check_targets(idx, cu->targets);
      if (joint < 0) continue;
      check_square(idx, cu->matrix, joint, "unitary");
      if (unitarity_defect(cu->matrix) > kAlgebraTol) flag(idx, "matrix is not unitary");
      if (cu->condition_slot < 0 || cu->condition_slot >= c.num_slots ||
          slot_outcomes[cu->condition_slot] == -1)
        flag(idx, "condition reads a slot with no earlier measurement");
      else if (cu->condition_value < 0 || cu->condition_value >= slot_outcomes[cu->condition_slot])
        flag(idx, "condition value out of range for its slot");
    } else if (const auto* d = std::get_if<Discard>(&ins)) {
      if (d->target < 0 || static_cast<std::size_t>(d->target) >= nregs || !live[d->target])
        flag(idx, "discard of a register that is not live");
      else
        live[d->target] = 0;
    } else if (const auto* rl = std::get_if<Relabel>(&ins)) {
      if (rl->target < 0 || static_cast<std::size_t>(rl->target) >= nregs || !live[rl->target]) {
        flag(idx, "relabel of a register that is not live");
      } else {
        roles[rl->target] = rl->new_role;
        for (std::size_t r = 0; r < nregs; ++r)
          if (live[r] && r != static_cast<std::size_t>(rl->target) && roles[r] == rl->new_role)
            flag(idx, "relabel duplicates a live role");
      }
    }
  }

  for (int s = 0; s < c.num_slots; ++s)
    if (slot_outcomes[s] == -1)
      flag(kCircuitLevel, "slot " + std::to_string(s) + " has no measurement");

  if (c.instructions.empty()) {
    flag(kCircuitLevel, "circuit has no instructions");
  } else {
    const auto* last = std::get_if<ProjectiveMeasure>(&c.instructions.back());
    if (!last || last->slot != c.final_slot || last->targets.size() != 1 ||
        last->targets[0] != c.root_register)
      flag(kCircuitLevel, "circuit does not end with the readout of the root wire");
    else if (!(roles[c.root_register].kind == RoleKind::NodeAncilla &&
               roles[c.root_register].name == c.proposition))
      flag(kCircuitLevel, "root wire does not carry the root sub-proposition role");
  }
  return report;
}

namespace detail {

inline void append_matrix(std::string& out, const ComplexMatrix& m) {
  char buf[64];
  out += '[';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != 0 || j != 0) out += ',';
      std::snprintf(buf, sizeof buf, "(%.17g,%.17g)", m(i, j).real(), m(i, j).imag());
      out += buf;
    }
  }
  out += ']';
}

inline void append_targets(std::string& out, const std::vector<int>& targets) {
  out += " targets";
  for (int t : targets) out += ' ' + std::to_string(t);
}

}  // namespace detail

/// Line-oriented dump, one instruction per line, matrices inlined as
/// row-major complex pairs. Stable across runs for diffing.
inline std::string circuit_to_text(const Circuit& c) {
  std::string out = "format_version 1\n";
  out += "path " + std::string(path_name(c.path)) + "\n";
  out += "proposition " + c.proposition + "\n";
  out += "system_dim " + std::to_string(c.system_dim) + "\n";
  out += "registers " + std::to_string(c.registers.size()) + "\n";
  for (std::size_t r = 0; r < c.registers.size(); ++r)
    out += "register " + std::to_string(r) + " dim " + std::to_string(c.registers[r].dim) + " " +
           role_to_string(c.registers[r].role) + "\n";
  for (const auto& f : c.init) {
    out += f.kind == InitKind::InputState ? "init input"
           : f.kind == InitKind::BellPair ? "init bell"
                                          : "init ground";
    for (int r : f.regs) out += ' ' + std::to_string(r);
    out += '\n';
  }
  out += "slots " + std::to_string(c.num_slots) + "\n";
  for (int s = 0; s < c.num_slots; ++s)
    out += "slot " + std::to_string(s) + " " + c.slot_tags[s] + "\n";
  out += "stage1_end " + std::to_string(c.stage1_end) + "\n";
  out += "root_register " + std::to_string(c.root_register) + "\n";
  out += "final_slot " + std::to_string(c.final_slot) + "\n";
  for (const auto& ins : c.instructions) {
    if (const auto* u = std::get_if<Unitary>(&ins)) {
      out += "unitary tag " + u->tag;
      detail::append_targets(out, u->targets);
      out += " matrix ";
      detail::append_matrix(out, u->matrix);
    } else if (const auto* m = std::get_if<ProjectiveMeasure>(&ins)) {
      out += "pmeasure tag " + m->tag + " slot " + std::to_string(m->slot);
      detail::append_targets(out, m->targets);
      for (const auto& p : m->projectors) {
        out += " op ";
        detail::append_matrix(out, p);
      }
    } else if (const auto* g = std::get_if<GeneralizedMeasure>(&ins)) {
      out += "gmeasure tag " + g->tag + " slot " + std::to_string(g->slot) + " fail " +
             std::to_string(g->failure_index);
      detail::append_targets(out, g->targets);
      for (const auto& op : g->operators) {
        out += " op ";
        detail::append_matrix(out, op);
      }
    } else if (const auto* cu = std::get_if<ConditionalUnitary>(&ins)) {
      out += "conditional tag " + cu->tag + " slot " + std::to_string(cu->condition_slot) +
             " value " + std::to_string(cu->condition_value);
      detail::append_targets(out, cu->targets);
      out += " matrix ";
      detail::append_matrix(out, cu->matrix);
    } else if (const auto* d = std::get_if<Discard>(&ins)) {
      out += "discard " + std::to_string(d->target);
    } else if (const auto* rl = std::get_if<Relabel>(&ins)) {
      out += "relabel " + std::to_string(rl->target) + " " + role_to_string(rl->new_role);
    }
    out += '\n';
  }
  return out;
}

}  // namespace seqlogic
