#include "seqlogic/oracle.hpp"

#include <gtest/gtest.h>

#include "seqlogic/rng.hpp"
#include "support/classical_cases.hpp"
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

ComplexMatrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
  ComplexMatrix m(rows.size(), rows.begin()->size());
  int r = 0;
  for (const auto& row : rows) {
    int c = 0;
    for (Complex z : row) m(r, c++) = z;
    ++r;
  }
  return m;
}

ElementaryAssignment all_one_projectors() {
  ComplexMatrix p1 = projector_from_state(ket(1));
  return ElementaryAssignment::validated(2, {{"a", p1}, {"b", p1}, {"c", p1}});
}

ElementaryAssignment half_half() {  // [a] = |0><0|, [b] = |+><+|
  return ElementaryAssignment::validated(
      2, {{"a", projector_from_state(ket(0))}, {"b", projector_from_state(plus_state())}});
}

}  // namespace

TEST(ProjectorFromState, Examples) {
  EXPECT_TRUE(approx_equal(projector_from_state(ket(1)), from_rows({{0, 0}, {0, 1}})));
  EXPECT_TRUE(approx_equal(projector_from_state(ket(0)), from_rows({{1, 0}, {0, 0}})));
  EXPECT_TRUE(
      approx_equal(projector_from_state(plus_state()), from_rows({{0.5, 0.5}, {0.5, 0.5}})));
  StateVector unnormalized(2);
  unnormalized[0] = 1.0;
  unnormalized[1] = 1.0;
  EXPECT_THROW(projector_from_state(unnormalized), Error);
}

TEST(Assignment, ValidationRejectsBadMatrices) {
  ComplexMatrix not_hermitian = from_rows({{0, 1}, {0, 0}});
  EXPECT_THROW(ElementaryAssignment::validated(2, {{"a", not_hermitian}}), Error);
  ComplexMatrix not_idempotent = from_rows({{0.5, 0}, {0, 0.5}});
  EXPECT_THROW(ElementaryAssignment::validated(2, {{"a", not_idempotent}}), Error);
  ComplexMatrix wrong_dim = ComplexMatrix::Identity(3, 3);
  EXPECT_THROW(ElementaryAssignment::validated(2, {{"a", wrong_dim}}), Error);
  EXPECT_THROW(ElementaryAssignment::validated(0, {}), Error);
  EXPECT_THROW(ElementaryAssignment::validated(64, {}), Error);
}

TEST(OperatorOf, WorkedExampleAnnihilates) {
  // [c](I - [b][a]) with all projectors |1><1| is |1><1| |0><0| = 0.
  ComplexMatrix op = operator_of(parse_proposition("!(a&b)&c"), all_one_projectors());
  EXPECT_LE(max_abs(op), kAlgebraTol);
}

TEST(OperatorOf, Orthocomplement) {
  ComplexMatrix op = operator_of(parse_proposition("!a"), all_one_projectors());
  EXPECT_TRUE(approx_equal(op, from_rows({{1, 0}, {0, 0}})));
}

TEST(OperatorOf, SequentialProduct) {
  // [b][a] = |+><+| |0><0| ; by hand: |+><+| = [[.5,.5],[.5,.5]], so the
  // product keeps column 0 only: [[.5, 0], [.5, 0]].
  ComplexMatrix op = operator_of(parse_proposition("a&b"), half_half());
  EXPECT_TRUE(approx_equal(op, from_rows({{0.5, 0}, {0.5, 0}})));
}

TEST(OperatorOf, XorOperator) {
  // [!b][a] + [b][!a] = |-><-|0><0| + |+><+|1><1| = [[.5,.5],[-.5,.5]].
  ComplexMatrix op = operator_of(parse_proposition("a^b"), half_half());
  EXPECT_TRUE(approx_equal(op, from_rows({{0.5, 0.5}, {-0.5, 0.5}})));
}

TEST(OperatorOf, MissingLabel) {
  EXPECT_THROW(operator_of(parse_proposition("a&z"), half_half()), Error);
}

TEST(BranchNorms, Examples) {
  BranchNorms w = branch_norms(parse_proposition("!(a&b)&c"), ket(1), all_one_projectors());
  EXPECT_NEAR(w.w1, 0.0, kAlgebraTol);
  EXPECT_NEAR(w.w0, 1.0, kAlgebraTol);

  w = branch_norms(parse_proposition("a"), ket(1),
                   ElementaryAssignment::validated(2, {{"a", projector_from_state(ket(0))}}));
  EXPECT_NEAR(w.w1, 0.0, kAlgebraTol);
  EXPECT_NEAR(w.w0, 1.0, kAlgebraTol);

  w = branch_norms(parse_proposition("a&b"), ket(0), half_half());
  EXPECT_NEAR(w.w1, 0.5, kAlgebraTol);
  EXPECT_NEAR(w.w0, 0.5, kAlgebraTol);
}

TEST(ConditionalDistribution, Examples) {
  ConditionalDistribution c = conditional_distribution(
      parse_proposition("a"), ket(0),
      ElementaryAssignment::validated(2, {{"a", projector_from_state(plus_state())}}));
  EXPECT_NEAR(c.p_true, 0.5, kAlgebraTol);
  EXPECT_NEAR(c.p_false, 0.5, kAlgebraTol);

  c = conditional_distribution(parse_proposition("!(a&b)&c"), ket(1), all_one_projectors());
  EXPECT_NEAR(c.p_true, 0.0, kAlgebraTol);
  EXPECT_NEAR(c.p_false, 1.0, kAlgebraTol);

  c = conditional_distribution(parse_proposition("a&b"), ket(0), half_half());
  EXPECT_NEAR(c.p_true, 0.5, kAlgebraTol);
  EXPECT_NEAR(c.p_false, 0.5, kAlgebraTol);
}

TEST(OverallSuccessProbability, Examples) {
  EXPECT_NEAR(
      overall_success_probability(parse_proposition("!(a&b)&c"), ket(1), all_one_projectors()),
      1.0 / 9.0, kAlgebraTol);
  EXPECT_NEAR(overall_success_probability(
                  parse_proposition("a"), ket(1),
                  ElementaryAssignment::validated(2, {{"a", projector_from_state(ket(1))}})),
              1.0, kAlgebraTol);
  EXPECT_NEAR(overall_success_probability(parse_proposition("a&b"), ket(0), half_half()),
              1.0 / 3.0, kAlgebraTol);
  EXPECT_THROW(overall_success_probability(parse_proposition("a^b"), ket(0), half_half()), Error);
}

TEST(ValidTestPair, NonCommutingPairFails) {
  // Defect matrix 2PQP - QP - PQ for P=|0><0|, Q=|+><+| is [[0,-.5],[-.5,0]].
  ComplexMatrix product = operator_of(parse_proposition("a&b"), half_half());
  TestPairValidity v = is_valid_test_pair(product);
  EXPECT_FALSE(v.valid);
  EXPECT_NEAR(v.defect, 0.5, kAlgebraTol);
}

TEST(ValidTestPair, CommutingDiagonalPairPasses) {
  ElementaryAssignment asg = ElementaryAssignment::validated(
      2, {{"a", testgen::diagonal_projector(true, false)},
          {"b", testgen::diagonal_projector(true, true)}});
  TestPairValidity v = is_valid_test_pair(operator_of(parse_proposition("a&b"), asg));
  EXPECT_TRUE(v.valid);
}

TEST(ValidTestPair, CommutingIffValid) {
  RandomStream rng(11);
  int invalid_seen = 0;
  for (int i = 0; i < 100; ++i) {
    ComplexMatrix p = testgen::random_rank1_projector(2, rng);
    ComplexMatrix q = testgen::random_rank1_projector(2, rng);
    bool commuting = max_abs(p * q - q * p) <= kAlgebraTol;
    TestPairValidity v = is_valid_test_pair(q * p);
    EXPECT_EQ(v.valid, commuting);
    invalid_seen += v.valid ? 0 : 1;
  }
  EXPECT_GT(invalid_seen, 90);  // random rank-1 pairs almost never commute
}

TEST(ValidTestPair, XorPairsAlwaysPhysical) {
  RandomStream rng(12);
  for (int i = 0; i < 100; ++i) {
    int dim = 2 + i % 3;
    ComplexMatrix s = testgen::random_projector(dim, 1 + static_cast<int>(rng.uniform() * (dim - 1)), rng);
    ComplexMatrix t = testgen::random_projector(dim, 1 + static_cast<int>(rng.uniform() * (dim - 1)), rng);
    ComplexMatrix identity = ComplexMatrix::Identity(dim, dim);
    ComplexMatrix x = (identity - t) * s + t * (identity - s);
    TestPairValidity v = is_valid_test_pair(x);
    EXPECT_TRUE(v.valid) << "defect " << v.defect << " at dim " << dim;
  }
}

TEST(HistoryState, SingleLeafSuperposition) {
  StateVector psi(2);
  psi[0] = 0.6;
  psi[1] = 0.8;
  ElementaryAssignment asg =
      ElementaryAssignment::validated(2, {{"a", projector_from_state(ket(1))}});
  StateVector h = history_state_reference({"a"}, psi, asg);
  // alpha |0>_a |0>_f + beta |1>_a |1>_f ; flat index = f*2 + a
  ASSERT_EQ(h.size(), 4);
  EXPECT_NEAR(std::abs(h[0] - Complex(0.6)), 0.0, kAlgebraTol);
  EXPECT_NEAR(std::abs(h[1]), 0.0, kAlgebraTol);
  EXPECT_NEAR(std::abs(h[2]), 0.0, kAlgebraTol);
  EXPECT_NEAR(std::abs(h[3] - Complex(0.8)), 0.0, kAlgebraTol);
}

TEST(HistoryState, TrueBranchRecordsOne) {
  ElementaryAssignment asg =
      ElementaryAssignment::validated(2, {{"a", projector_from_state(ket(0))}});
  StateVector h = history_state_reference({"a"}, ket(0), asg);
  // [a]psi = psi, so only |1>_a |0>_f survives: flat index a=1, f=0.
  ASSERT_EQ(h.size(), 4);
  EXPECT_NEAR(std::abs(h[1] - Complex(1.0)), 0.0, kAlgebraTol);
  EXPECT_NEAR(std::abs(h[0]) + std::abs(h[2]) + std::abs(h[3]), 0.0, kAlgebraTol);
}

TEST(HistoryState, AllTrueChain) {
  StateVector h = history_state_reference({"a", "b", "c"}, ket(1), all_one_projectors());
  ASSERT_EQ(h.size(), 16);
  for (int i = 0; i < 16; ++i) {
    double expected = i == 15 ? 1.0 : 0.0;  // |111>_{abc} |1>_f
    EXPECT_NEAR(std::abs(h[i]), expected, kAlgebraTol) << "index " << i;
  }
}

TEST(HistoryState, UnitSquaredNorm) {
  RandomStream rng(13);
  for (int i = 0; i < 25; ++i) {
    PropPtr p = testgen::random_proposition(4, rng);
    ElementaryAssignment asg = testgen::random_rank1_qubit_assignment(p, rng);
    StateVector psi = testgen::random_state(2, rng);
    StateVector h = history_state_reference(leaf_labels(p), psi, asg);
    EXPECT_NEAR(h.squaredNorm(), 1.0, 1e-10);
  }
  EXPECT_THROW(history_state_reference({}, ket(0), all_one_projectors()), Error);
}

TEST(CoherentAndObstruction, LargestEigenvalueIsThree) {
  EXPECT_NEAR(coherent_and_obstruction(), 3.0, kAlgebraTol);
}

TEST(CoherentAndObstruction, SpectrumByDirectMultiplication) {
  // Gram matrix of A = |0>(<00|+<01|+<10|) + |1><11|, written out by hand.
  ComplexMatrix gram = from_rows({{1, 1, 1, 0}, {1, 1, 1, 0}, {1, 1, 1, 0}, {0, 0, 0, 1}});
  StateVector sym(4);
  sym << 1, 1, 1, 0;
  sym /= std::sqrt(3.0);
  EXPECT_LE((gram * sym - 3.0 * sym).norm(), kAlgebraTol);  // eigenvalue 3
  StateVector last = StateVector::Zero(4);
  last[3] = 1.0;
  EXPECT_LE((gram * last - last).norm(), kAlgebraTol);  // second-largest eigenvalue 1
  StateVector null_vec(4);
  null_vec << 1, -1, 0, 0;
  EXPECT_LE((gram * null_vec).norm(), kAlgebraTol);  // the rest is null space
}

TEST(MatrixSqrtPsd, Examples) {
  EXPECT_TRUE(approx_equal(matrix_sqrt_psd(ComplexMatrix::Identity(3, 3)),
                           ComplexMatrix::Identity(3, 3)));
  ComplexMatrix d = from_rows({{4, 0}, {0, 0}});
  EXPECT_TRUE(approx_equal(matrix_sqrt_psd(d), from_rows({{2, 0}, {0, 0}})));
  EXPECT_THROW(matrix_sqrt_psd(from_rows({{0, 1}, {0, 0}})), Error);
  EXPECT_THROW(matrix_sqrt_psd(from_rows({{-1.0, 0}, {0, 1}})), Error);
}

TEST(MatrixSqrtPsd, SquaresBackOnRandomPsd) {
  RandomStream rng(14);
  for (int i = 0; i < 40; ++i) {
    int dim = 2 + i % 4;
    ComplexMatrix g(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) g(r, c) = Complex(rng.normal(), rng.normal());
    ComplexMatrix h = g * g.adjoint();
    ComplexMatrix root = matrix_sqrt_psd(h);
    EXPECT_LE(max_abs(root * root - h), kSqrtTol * max_abs(h) + kSqrtTol);
  }
}

TEST(Invariants, NotComplementsToIdentity) {
  RandomStream rng(15);
  for (int i = 0; i < 50; ++i) {
    int dim = 2 + i % 3;
    PropPtr p = testgen::random_proposition(4, rng, /*allow_xor=*/true);
    std::map<std::string, ComplexMatrix> projs;
    for (const auto& label : leaf_labels(p))
      if (!projs.count(label))
        projs[label] =
            testgen::random_projector(dim, 1 + static_cast<int>(rng.uniform() * (dim - 1)), rng);
    ElementaryAssignment asg = ElementaryAssignment::validated(dim, std::move(projs));
    ComplexMatrix yes = operator_of(p, asg);
    ComplexMatrix no = operator_of(negation(p), asg);
    EXPECT_TRUE(approx_equal(yes + no, ComplexMatrix::Identity(dim, dim)));
  }
}

TEST(Invariants, ProjectorValuedBranchesSumToOne) {
  RandomStream rng(16);
  for (int i = 0; i < 50; ++i) {
    PropPtr p = elementary("a");
    for (int wraps = i % 4; wraps > 0; --wraps) p = negation(p);
    ElementaryAssignment asg = ElementaryAssignment::validated(
        2, {{"a", testgen::random_rank1_projector(2, rng)}});
    StateVector psi = testgen::random_state(2, rng);
    BranchNorms w = branch_norms(p, psi, asg);
    EXPECT_NEAR(w.w1 + w.w0, 1.0, kAlgebraTol);
  }
}

TEST(Invariants, BranchSumsStayPositive) {
  RandomStream rng(17);
  for (int i = 0; i < 50; ++i) {
    PropPtr p = testgen::random_proposition(4, rng);
    ElementaryAssignment asg = testgen::random_rank1_qubit_assignment(p, rng);
    StateVector psi = testgen::random_state(2, rng);
    BranchNorms w = branch_norms(p, psi, asg);
    EXPECT_GE(w.w1 + w.w0, 1e-12);
  }
}

TEST(Invariants, ClassicalReductionMatchesOracle) {
  testgen::for_each_classical_case([](const PropPtr& p, const ElementaryAssignment& asg,
                                      const StateVector& psi, bool expected) {
    ConditionalDistribution c = conditional_distribution(p, psi, asg);
    EXPECT_NEAR(c.p_true, expected ? 1.0 : 0.0, 1e-12) << print_proposition(p);
    EXPECT_NEAR(c.p_false, expected ? 0.0 : 1.0, 1e-12) << print_proposition(p);
  });
}
