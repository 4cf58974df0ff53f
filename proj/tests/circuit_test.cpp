#include "seqlogic/circuit.hpp"

#include <gtest/gtest.h>

#include "seqlogic/rng.hpp"
#include "support/generators.hpp"

using namespace seqlogic;

namespace {

StateVector ket(int value) {
  StateVector v = StateVector::Zero(2);
  v[value] = 1.0;
  return v;
}

StateVector plus_state() {
  StateVector v(2);
  v[0] = v[1] = 1.0 / std::sqrt(2.0);
  return v;
}

ElementaryAssignment all_one_projectors() {
  ComplexMatrix p1 = projector_from_state(ket(1));
  return ElementaryAssignment::validated(2, {{"a", p1}, {"b", p1}, {"c", p1}});
}

template <typename T>
int count_kind(const Circuit& c) {
  int n = 0;
  for (const auto& ins : c.instructions)
    if (std::holds_alternative<T>(ins)) ++n;
  return n;
}

}  // namespace

TEST(ElementaryUnitary, BasisStates) {
  EXPECT_TRUE(approx_equal(build_elementary_unitary(ket(1)), ComplexMatrix::Identity(2, 2)));
  EXPECT_TRUE(approx_equal(build_elementary_unitary(ket(0)), pauli_x()));
}

TEST(ElementaryUnitary, PlusState) {
  ComplexMatrix u = build_elementary_unitary(plus_state());
  const double s = 1.0 / std::sqrt(2.0);
  ComplexMatrix expected(2, 2);
  expected << s, s, -s, s;  // columns (|->, |+>)
  EXPECT_TRUE(approx_equal(u, expected));
}

TEST(ElementaryUnitary, UnitaryForRandomStates) {
  RandomStream rng(21);
  for (int i = 0; i < 50; ++i) {
    ComplexMatrix u = build_elementary_unitary(testgen::random_state(2, rng));
    EXPECT_LE(unitarity_defect(u), kAlgebraTol);
  }
  EXPECT_THROW(build_elementary_unitary(testgen::random_state(3, rng)), Error);
}

TEST(CoherentAndPair, ActionOnBasisStates) {
  CoherentAndPair pair = build_coherent_and_pair();
  const double s = 1.0 / std::sqrt(3.0);
  StateVector e00 = StateVector::Zero(4), e01 = StateVector::Zero(4), e11 = StateVector::Zero(4);
  e00[0] = e01[1] = e11[3] = 1.0;
  EXPECT_LE((pair.success * e11 - s * e11).norm(), kAlgebraTol);  // Ms|11> = |11>/sqrt(3)
  EXPECT_LE((pair.success * e00 - s * e01).norm(), kAlgebraTol);  // Ms|00> = |01>/sqrt(3)
}

TEST(CoherentAndPair, FailureAnnihilatesSymmetricVector) {
  CoherentAndPair pair = build_coherent_and_pair();
  StateVector sym(4);
  sym << 1, 1, 1, 0;
  sym /= std::sqrt(3.0);
  EXPECT_LE((pair.failure * sym).norm(), kSqrtTol);
}

TEST(CoherentAndPair, FailureSpectrum) {
  CoherentAndPair pair = build_coherent_and_pair();
  StateVector e11 = StateVector::Zero(4);
  e11[3] = 1.0;
  EXPECT_LE((pair.failure * e11 - std::sqrt(2.0 / 3.0) * e11).norm(), kSqrtTol);
  StateVector diff(4);  // in span{00,01,10}, orthogonal to the symmetric vector
  diff << 1, -1, 0, 0;
  diff /= std::sqrt(2.0);
  EXPECT_LE((pair.failure * diff - diff).norm(), kSqrtTol);
}

TEST(CoherentAndPair, Completeness) {
  CoherentAndPair pair = build_coherent_and_pair();
  ComplexMatrix sum = pair.success.adjoint() * pair.success + pair.failure.adjoint() * pair.failure;
  EXPECT_LE(max_abs(sum - ComplexMatrix::Identity(4, 4)), kAlgebraTol);
}

TEST(RecordingUnitary, UnitaryForAnyProjector) {
  RandomStream rng(22);
  for (int dim = 2; dim <= 4; ++dim) {
    for (int rank = 0; rank <= dim; ++rank) {
      ComplexMatrix p = testgen::random_projector(dim, rank, rng);
      EXPECT_LE(unitarity_defect(build_recording_unitary(p)), kAlgebraTol)
          << "dim " << dim << " rank " << rank;
    }
  }
}

TEST(Compile, WorkedExampleTeleport) {
  Circuit c = compile(parse_proposition("!(a&b)&c"), all_one_projectors(),
                      {PreparationPath::Teleport});
  ASSERT_EQ(c.registers.size(), 7u);  // a a' b b' c c' f
  EXPECT_EQ(c.registers[0].role.name, "a");
  EXPECT_EQ(c.registers[1].role.name, "a'");
  EXPECT_EQ(c.registers[6].role.kind, RoleKind::System);
  EXPECT_EQ(count_kind<ProjectiveMeasure>(c), 4);    // 3 parities + readout
  EXPECT_EQ(count_kind<GeneralizedMeasure>(c), 2);   // two coherent ANDs
  EXPECT_EQ(count_kind<ConditionalUnitary>(c), 3);   // one correction per leaf
  EXPECT_EQ(count_kind<Discard>(c), 5);              // 3 primes + 2 AND partners

  int negations = 0;
  for (const auto& ins : c.instructions)
    if (const auto* u = std::get_if<Unitary>(&ins))
      if (u->matrix.rows() == 2 && approx_equal(u->matrix, pauli_x())) ++negations;
  EXPECT_EQ(negations, 1);

  EXPECT_EQ(c.stage1_end, 15u);  // five instructions per leaf
  EXPECT_EQ(c.root_register, 0);
  ASSERT_EQ(c.slot_tags.size(), 6u);
  EXPECT_EQ(c.slot_tags[0], "parity[a]");
  EXPECT_EQ(c.slot_tags[3], "and[a&b]");
  EXPECT_EQ(c.slot_tags[4], "and[!(a&b)&c]");
  EXPECT_EQ(c.slot_tags[5], "readout");
  EXPECT_TRUE(validate(c).ok());
}

TEST(Compile, SingleLeafDirect) {
  ElementaryAssignment asg =
      ElementaryAssignment::validated(2, {{"a", projector_from_state(ket(1))}});
  Circuit c = compile(parse_proposition("a"), asg, {PreparationPath::Direct});
  ASSERT_EQ(c.registers.size(), 2u);  // one ancilla + system
  EXPECT_EQ(count_kind<Unitary>(c), 1);
  EXPECT_EQ(count_kind<ProjectiveMeasure>(c), 1);
  EXPECT_EQ(c.stage1_end, 1u);
  EXPECT_TRUE(validate(c).ok());
}

TEST(Compile, TrivialRotationsForBasisProjectors) {
  // [x] = |1><1| gives U_x = I, so the stage-1 rotations are I (x) I.
  ComplexMatrix p1 = projector_from_state(ket(1));
  ElementaryAssignment asg = ElementaryAssignment::validated(2, {{"a", p1}, {"b", p1}});
  Circuit c = compile(parse_proposition("a&b"), asg, {PreparationPath::Teleport});
  const auto& first = std::get<Unitary>(c.instructions[0]);
  const auto& second = std::get<Unitary>(c.instructions[5]);
  EXPECT_TRUE(approx_equal(first.matrix, ComplexMatrix::Identity(4, 4)));
  EXPECT_TRUE(approx_equal(second.matrix, ComplexMatrix::Identity(4, 4)));
}

TEST(Compile, RepeatedLabelGetsFreshAncillas) {
  ElementaryAssignment asg =
      ElementaryAssignment::validated(2, {{"a", projector_from_state(plus_state())}});
  Circuit c = compile(parse_proposition("a&a"), asg, {PreparationPath::Teleport});
  ASSERT_EQ(c.registers.size(), 5u);
  EXPECT_EQ(c.registers[0].role.name, "a");
  EXPECT_EQ(c.registers[2].role.name, "a#2");
  EXPECT_TRUE(validate(c).ok());
}

TEST(Compile, IdenticalSubtreesKeepDistinctRoles) {
  // (a&b) & !(a&b) tests two structurally identical sub-propositions; their
  // node ancillas are briefly live at the same time and must not collide.
  ElementaryAssignment asg = all_one_projectors();
  Circuit c = compile(parse_proposition("(a&b)&!(a&b)"), asg, {PreparationPath::Teleport});
  ValidationReport report = validate(c);
  EXPECT_TRUE(report.ok()) << (report.violations.empty() ? "" : report.violations[0].message);
  EXPECT_EQ(c.registers.size(), 9u);  // a a' b b' a#2 a#2' b#2 b#2' f
  EXPECT_EQ(c.registers[4].role.name, "a#2");
}

TEST(Compile, CanonicalizesItsInput) {
  ElementaryAssignment asg = all_one_projectors();
  PropPtr right_nested = seq_and(elementary("a"), seq_and(elementary("b"), elementary("c")));
  Circuit c = compile(right_nested, asg, {PreparationPath::Direct});
  EXPECT_EQ(c.proposition, "a&b&c");
  EXPECT_TRUE(validate(c).ok());
}

TEST(Compile, ErrorsOnUnsupportedInputs) {
  // Teleport on a qutrit system.
  ElementaryAssignment qutrit =
      ElementaryAssignment::validated(3, {{"a", ComplexMatrix::Identity(3, 3)}});
  EXPECT_THROW(compile(parse_proposition("a"), qutrit, {PreparationPath::Teleport}), Error);
  // Teleport with a rank-2 projector.
  ElementaryAssignment rank2 =
      ElementaryAssignment::validated(2, {{"a", ComplexMatrix::Identity(2, 2)}});
  EXPECT_THROW(compile(parse_proposition("a"), rank2, {PreparationPath::Teleport}), Error);
  // Direct path handles both.
  EXPECT_TRUE(validate(compile(parse_proposition("a"), qutrit, {PreparationPath::Direct})).ok());
  EXPECT_TRUE(validate(compile(parse_proposition("a"), rank2, {PreparationPath::Direct})).ok());
  // '^' has no reduction protocol on either path.
  ElementaryAssignment asg = all_one_projectors();
  EXPECT_THROW(compile(parse_proposition("a^b"), asg, {PreparationPath::Direct}), Error);
  // Unassigned label.
  EXPECT_THROW(compile(parse_proposition("z"), asg, {PreparationPath::Direct}), Error);
}

TEST(Validate, FlagsBrokenCompleteness) {
  Circuit c = compile(parse_proposition("a&b"), all_one_projectors(), {PreparationPath::Direct});
  for (auto& ins : c.instructions) {
    if (auto* g = std::get_if<GeneralizedMeasure>(&ins)) g->operators[1] = g->operators[0];
  }
  ValidationReport report = validate(c);
  ASSERT_FALSE(report.ok());
  bool found = false;
  for (const auto& v : report.violations)
    found = found || v.message.find("completeness") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(Validate, FlagsNonUnitaryAndDeadTargets) {
  Circuit c = compile(parse_proposition("a"), all_one_projectors(), {PreparationPath::Teleport});
  Circuit broken = c;
  std::get<Unitary>(broken.instructions[0]).matrix *= 2.0;
  EXPECT_FALSE(validate(broken).ok());

  Circuit dead = c;
  dead.instructions.insert(dead.instructions.begin() + 5, Discard{1});  // already discarded at 4
  EXPECT_FALSE(validate(dead).ok());
}

TEST(Validate, EntangledDiscardPassesStatically) {
  // A discard of a live-but-entangled register is a simulation-time error
  // only; the static pass cannot know entanglement.
  Circuit c;
  c.path = PreparationPath::Direct;
  c.proposition = "a";
  c.system_dim = 2;
  c.registers = {{QubitRole{RoleKind::NodeAncilla, "a"}, 2},
                 {QubitRole{RoleKind::System, "f"}, 2}};
  c.init = {{InitKind::InputState, {0}}, {InitKind::GroundState, {1}}};
  c.input_register = 0;
  c.root_register = 0;
  c.num_slots = 1;
  c.slot_tags = {"readout"};
  c.final_slot = 0;
  c.instructions.push_back(Unitary{{0, 1}, cnot(), "entangle"});
  c.instructions.push_back(Discard{1});
  c.instructions.push_back(
      ProjectiveMeasure{{0}, {ket_projector(0), ket_projector(1)}, 0, "readout"});
  c.stage1_end = 1;
  EXPECT_TRUE(validate(c).ok());
}

TEST(Dump, StableAndVersioned) {
  Circuit c = compile(parse_proposition("!(a&b)&c"), all_one_projectors(),
                      {PreparationPath::Teleport});
  std::string dump = circuit_to_text(c);
  EXPECT_EQ(dump.rfind("format_version 1\n", 0), 0u);
  EXPECT_NE(dump.find("gmeasure tag and[a&b]"), std::string::npos);
  EXPECT_NE(dump.find("relabel 0 node !(a&b)&c"), std::string::npos);
  Circuit again = compile(parse_proposition("!(a&b)&c"), all_one_projectors(),
                          {PreparationPath::Teleport});
  EXPECT_EQ(dump, circuit_to_text(again));
}
