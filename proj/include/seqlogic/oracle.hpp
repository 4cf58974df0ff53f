#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "seqlogic/linalg.hpp"
#include "seqlogic/prop.hpp"

namespace seqlogic {

/// Assignment of a projector on a shared d-dimensional system space to each
/// elementary label. Validated on construction: every matrix is d x d,
/// Hermitian and idempotent within 1e-9 max-abs.
struct ElementaryAssignment {
  int system_dim = 0;
  std::map<std::string, ComplexMatrix> projectors;

  static ElementaryAssignment validated(int dim, std::map<std::string, ComplexMatrix> projs) {
    if (dim <= 0) throw Error("assignment: system dimension must be positive");
    if (dim > 32) throw Error("assignment: system dimension capped at 32");
    for (const auto& [label, p] : projs) {
      if (!valid_label(label)) throw Error("assignment: invalid label '" + label + "'");
      if (p.rows() != dim || p.cols() != dim)
        throw Error("assignment: projector for '" + label + "' is not " +
                    std::to_string(dim) + "x" + std::to_string(dim));
      if (!is_hermitian(p)) throw Error("assignment: projector for '" + label + "' is not Hermitian");
      if (max_abs(p * p - p) > kAlgebraTol)
        throw Error("assignment: matrix for '" + label + "' is not idempotent");
    }
    return ElementaryAssignment{dim, std::move(projs)};
  }

  const ComplexMatrix& projector_for(const std::string& label) const {
    auto it = projectors.find(label);
    if (it == projectors.end()) throw Error("no projector assigned to label '" + label + "'");
    return it->second;
  }
};

/// Rank-1 projector |psi><psi| of a normalized state.
inline ComplexMatrix projector_from_state(const StateVector& psi) {
  if (!is_normalized(psi)) throw Error("projector_from_state: state is not normalized");
  return psi * psi.adjoint();
}

/// Recursive operator semantics: [a] from the assignment, [!s] = I - [s],
/// [s&t] = [t][s], [s^t] = [!t][s] + [t][!s].
inline ComplexMatrix operator_of(const PropPtr& p, const ElementaryAssignment& asg) {
  const ComplexMatrix identity = ComplexMatrix::Identity(asg.system_dim, asg.system_dim);
  switch (p->kind) {
    case PropKind::Elementary:
      return asg.projector_for(p->label);
    case PropKind::Not:
      return identity - operator_of(p->left, asg);
    case PropKind::SeqAnd:
      return operator_of(p->right, asg) * operator_of(p->left, asg);
    case PropKind::SeqXor: {
      ComplexMatrix s = operator_of(p->left, asg);
      ComplexMatrix t = operator_of(p->right, asg);
      return (identity - t) * s + t * (identity - s);
    }
  }
  throw Error("corrupt proposition node");
}

struct BranchNorms {
  double w1;  // || [s] psi ||^2
  double w0;  // || (I - [s]) psi ||^2
};

inline BranchNorms branch_norms(const PropPtr& p, const StateVector& psi,
                                const ElementaryAssignment& asg) {
  if (psi.size() != asg.system_dim) throw Error("branch_norms: state dimension mismatch");
  if (!is_normalized(psi)) throw Error("branch_norms: state is not normalized");
  ComplexMatrix op = operator_of(p, asg);
  StateVector yes = op * psi;
  StateVector no = psi - yes;
  return {yes.squaredNorm(), no.squaredNorm()};
}

struct ConditionalDistribution {
  double p_true;
  double p_false;
};

/// (w1, w0) normalized by w1 + w0: the outcome distribution of the
/// nondeterministic test conditioned on not failing.
inline ConditionalDistribution conditional_distribution(const PropPtr& p, const StateVector& psi,
                                                        const ElementaryAssignment& asg) {
  BranchNorms w = branch_norms(p, psi, asg);
  double total = w.w1 + w.w0;
  if (total <= kBranchPruneTol)
    throw Error("conditional_distribution: both branches annihilate the state");
  return {w.w1 / total, w.w0 / total};
}

/// (1/3)^{#&} * (w1 + w0): probability that no coherent-AND step fails.
inline double overall_success_probability(const PropPtr& p, const StateVector& psi,
                                          const ElementaryAssignment& asg) {
  if (contains_seq_xor(p))
    throw Error("overall_success_probability: '^' has no reduction protocol");
  BranchNorms w = branch_norms(p, psi, asg);
  return std::pow(1.0 / 3.0, count_seq_ands(p)) * (w.w1 + w.w0);
}

struct TestPairValidity {
  bool valid;
  double defect;  // max-abs entry of A'A + (I-A)'(I-A) - I
};

/// Whether {A, I-A} is a pair of generalized measurement operators.
inline TestPairValidity is_valid_test_pair(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw Error("is_valid_test_pair: matrix is not square");
  ComplexMatrix identity = ComplexMatrix::Identity(a.rows(), a.cols());
  ComplexMatrix rest = identity - a;
  double defect = max_abs(a.adjoint() * a + rest.adjoint() * rest - identity);
  return {defect <= kAlgebraTol, defect};
}

/// Coherent recording of a measurement chain: sum over bitstrings j of
/// |j> (x) [x_n^{j_n}]...[x_1^{j_1}] psi, ancillas in listed order, system
/// last. Flat indexing: ancilla i contributes bit i (first label fastest),
/// the system index is slowest-varying. Squared norm is 1 because each level
/// of the chain resolves the identity.
inline StateVector history_state_reference(const std::vector<std::string>& labels,
                                           const StateVector& psi,
                                           const ElementaryAssignment& asg) {
  if (labels.empty()) throw Error("history_state_reference: empty label list");
  if (!is_normalized(psi)) throw Error("history_state_reference: state is not normalized");
  const int d = asg.system_dim;
  const ComplexMatrix identity = ComplexMatrix::Identity(d, d);
  const std::size_t n = labels.size();
  const std::size_t branches = std::size_t{1} << n;
  StateVector out = StateVector::Zero(static_cast<Eigen::Index>(branches) * d);
  for (std::size_t j = 0; j < branches; ++j) {
    StateVector branch = psi;
    for (std::size_t i = 0; i < n; ++i) {
      const ComplexMatrix& p = asg.projector_for(labels[i]);
      branch = ((j >> i) & 1u) ? StateVector(p * branch) : StateVector((identity - p) * branch);
    }
    for (int s = 0; s < d; ++s)
      out[static_cast<Eigen::Index>(s) * branches + j] = branch[s];
  }
  return out;
}

/// Largest eigenvalue of A'A for the coherent AND map
/// A = |0>(<00|+<01|+<10|) + |1><11|. Exceeding 1 is what rules out a direct
/// unitary-plus-projective implementation.
inline double coherent_and_obstruction() {
  ComplexMatrix a = ComplexMatrix::Zero(2, 4);
  a(0, 0) = a(0, 1) = a(0, 2) = 1.0;
  a(1, 3) = 1.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a.adjoint() * a);
  return es.eigenvalues().maxCoeff();
}

}  // namespace seqlogic
