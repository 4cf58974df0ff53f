#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "seqlogic/oracle.hpp"
#include "seqlogic/sim.hpp"

namespace seqlogic {

inline constexpr double kZThreshold = 5.0;
inline constexpr double kChiSquarePThreshold = 0.001;

/// Aggregate of independent protocol runs.
struct TrialStats {
  std::uint64_t shots = 0;
  std::uint64_t attempts = 0;  // run() calls, equal to shots unless retrying
  std::uint64_t successes = 0;
  std::uint64_t true_count = 0;
  std::uint64_t false_count = 0;
  std::uint64_t seed = 0;
  bool retry = false;

  double success_rate() const {
    return attempts == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(attempts);
  }
  double success_rate_stderr() const {
    if (attempts == 0) return 0.0;
    double r = success_rate();
    return std::sqrt(r * (1.0 - r) / static_cast<double>(attempts));
  }
  std::optional<double> p_true_given_success() const {
    if (successes == 0) return std::nullopt;
    return static_cast<double>(true_count) / static_cast<double>(successes);
  }
  std::optional<double> p_true_stderr() const {
    if (successes == 0) return std::nullopt;
    double t = *p_true_given_success();
    return std::sqrt(t * (1.0 - t) / static_cast<double>(successes));
  }
};

/// `shots` independent runs, no restarting. Shot i draws from the stream
/// derived from (seed, i), so results are independent of execution order and
/// identical for any `jobs` count.
inline TrialStats estimate(const Circuit& c, const StateVector& psi, std::uint64_t shots,
                           std::uint64_t seed, unsigned jobs = 1) {
  if (shots == 0) throw Error("estimate requires at least one shot");
  std::vector<std::uint8_t> results(shots, 0);  // 0 fail, 1 success/false, 2 success/true
  auto worker = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      RunOutcome out = run(c, psi, derive_stream_seed(seed, i));
      results[i] = out.success ? (*out.truth_value ? 2 : 1) : 0;
    }
  };
  if (jobs <= 1 || shots < 2) {
    worker(0, shots);
  } else {
    unsigned n = static_cast<unsigned>(std::min<std::uint64_t>(jobs, shots));
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) {
      std::uint64_t begin = shots * t / n, end = shots * (t + 1) / n;
      pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  TrialStats stats;
  stats.shots = stats.attempts = shots;
  stats.seed = seed;
  for (std::uint8_t r : results) {
    if (r == 0) continue;
    ++stats.successes;
    r == 2 ? ++stats.true_count : ++stats.false_count;
  }
  return stats;
}

inline std::uint64_t default_max_attempts(std::optional<double> success_probability) {
  if (success_probability && *success_probability > 0.0)
    return 100 * static_cast<std::uint64_t>(std::ceil(1.0 / *success_probability));
  return 10000;
}

/// Restart-on-failure: repeats the whole protocol with derived seeds until a
/// run succeeds. Returns the first success and the attempt count.
inline std::pair<RunOutcome, std::uint64_t> run_until_success(const Circuit& c,
                                                              const StateVector& psi,
                                                              std::uint64_t seed,
                                                              std::uint64_t max_attempts) {
  if (max_attempts == 0) throw Error("run_until_success requires max_attempts >= 1");
  for (std::uint64_t i = 0; i < max_attempts; ++i) {
    RunOutcome out = run(c, psi, derive_stream_seed(seed, i));
    if (out.success) return {std::move(out), i + 1};
  }
  throw ExhaustedAttemptsError(max_attempts, 1.0);
}

/// Attempt counts of `trials` independent restart-until-success episodes.
inline std::vector<std::uint64_t> restart_attempt_counts(const Circuit& c, const StateVector& psi,
                                                         std::uint64_t trials, std::uint64_t seed,
                                                         std::uint64_t max_attempts) {
  std::vector<std::uint64_t> counts;
  counts.reserve(trials);
  for (std::uint64_t t = 0; t < trials; ++t)
    counts.push_back(run_until_success(c, psi, derive_stream_seed(seed, t), max_attempts).second);
  return counts;
}

inline double chi_square_pvalue(double statistic, unsigned dof) {
  if (dof == 0) return 1.0;
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

/// Pearson test of observed counts against a discrete distribution.
/// Zero-probability bins must be empty; observing them yields p = 0.
inline double multinomial_chi_square_pvalue(const std::vector<std::uint64_t>& counts,
                                            const std::vector<double>& probs) {
  if (counts.size() != probs.size()) throw Error("chi-square: bin count mismatch");
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  if (n == 0) throw Error("chi-square: no observations");
  double stat = 0.0;
  unsigned bins = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (probs[i] <= 0.0) {
      if (counts[i] != 0) return 0.0;
      continue;
    }
    ++bins;
    double expected = probs[i] * static_cast<double>(n);
    double diff = static_cast<double>(counts[i]) - expected;
    stat += diff * diff / expected;
  }
  return bins < 2 ? 1.0 : chi_square_pvalue(stat, bins - 1);
}

/// Tests attempt counts against Geometric(p) on {1, 2, ...}. Attempts >= the
/// first bin whose expected count drops below 5 are pooled into a tail bin.
inline double geometric_chi_square_pvalue(const std::vector<std::uint64_t>& attempts, double p) {
  if (attempts.empty()) throw Error("chi-square: no observations");
  if (p <= 0.0 || p > 1.0) throw Error("chi-square: geometric parameter out of range");
  const double n = static_cast<double>(attempts.size());
  if (p > 1.0 - 1e-12) {
    for (auto a : attempts)
      if (a != 1) return 0.0;
    return 1.0;
  }
  std::size_t head = 0;  // bins for attempts 1..head, tail afterwards
  while (n * p * std::pow(1.0 - p, static_cast<double>(head)) >= 5.0) ++head;
  if (head == 0) head = 1;
  std::vector<std::uint64_t> counts(head + 1, 0);
  for (auto a : attempts) {
    std::size_t k = a >= 1 ? static_cast<std::size_t>(a - 1) : 0;
    ++counts[std::min(k, head)];
  }
  std::vector<double> probs(head + 1, 0.0);
  for (std::size_t k = 0; k < head; ++k) probs[k] = p * std::pow(1.0 - p, static_cast<double>(k));
  probs[head] = std::pow(1.0 - p, static_cast<double>(head));
  return multinomial_chi_square_pvalue(counts, probs);
}

struct VerifyOptions {
  enum class Mode { Exact, Sampled };
  Mode mode = Mode::Exact;
  std::uint64_t shots = 10000;
  std::uint64_t seed = 0;
};

struct VerificationCheck {
  std::string name;
  std::string kind;  // "delta" | "fidelity_defect" | "z" | "pvalue"
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct VerificationReport {
  bool pass = true;
  std::vector<VerificationCheck> checks;

  void add(std::string name, std::string kind, double value, double threshold) {
    bool ok = kind == "pvalue" ? value > threshold : value <= threshold;
    pass = pass && ok;
    checks.push_back({std::move(name), std::move(kind), value, threshold, ok});
  }
};

/// Whether the Bell-pair preparation applies: qubit system, rank-1 projectors.
inline bool teleport_applicable(const ElementaryAssignment& asg) {
  if (asg.system_dim != 2) return false;
  for (const auto& [label, p] : asg.projectors) {
    (void)label;
    if (std::abs(p.trace().real() - 1.0) > 1e-8) return false;
  }
  return true;
}

namespace detail {

struct TrajectoryTotals {
  double total = 0.0;          // all trajectories
  double success = 0.0;        // no failure outcome realized
  double success_true = 0.0;   // success with readout 1
  double success_false = 0.0;  // success with readout 0
  double worst_residual_true = 1.0;   // min fidelity of residuals vs oracle
  double worst_residual_false = 1.0;
};

inline TrajectoryTotals exhaustive_totals(const Circuit& c, const StateVector& psi,
                                          const StateVector& oracle_true,
                                          const StateVector& oracle_false) {
  TrajectoryTotals t;
  enumerate_trajectories(c, psi, [&](const RunOutcome& out) {
    t.total += out.probability;
    if (!out.success) return;
    t.success += out.probability;
    if (*out.truth_value) {
      t.success_true += out.probability;
      t.worst_residual_true =
          std::min(t.worst_residual_true, fidelity(out.residual_system_state, oracle_true));
    } else {
      t.success_false += out.probability;
      t.worst_residual_false =
          std::min(t.worst_residual_false, fidelity(out.residual_system_state, oracle_false));
    }
  });
  return t;
}

inline void sampled_path_checks(VerificationReport& report, const std::string& prefix,
                                const Circuit& c, const StateVector& psi, double p_success,
                                double p_true, const VerifyOptions& opts) {
  TrialStats stats = estimate(c, psi, opts.shots, opts.seed);
  double se = std::sqrt(p_success * (1.0 - p_success) / static_cast<double>(stats.attempts));
  double z = se > 0.0 ? (stats.success_rate() - p_success) / se
                      : (stats.success_rate() == p_success ? 0.0
                                                           : std::numeric_limits<double>::infinity());
  report.add(prefix + ".success_rate", "z", std::abs(z), kZThreshold);
  if (stats.successes > 0) {
    double emp = *stats.p_true_given_success();
    double se_t = std::sqrt(p_true * (1.0 - p_true) / static_cast<double>(stats.successes));
    double z_t = se_t > 0.0
                     ? (emp - p_true) / se_t
                     : (emp == p_true ? 0.0 : std::numeric_limits<double>::infinity());
    report.add(prefix + ".conditional_true", "z", std::abs(z_t), kZThreshold);
  }
  std::vector<std::uint64_t> counts = {stats.true_count, stats.false_count,
                                       stats.attempts - stats.successes};
  std::vector<double> probs = {p_success * p_true, p_success * (1.0 - p_true), 1.0 - p_success};
  report.add(prefix + ".outcome_frequencies", "pvalue", multinomial_chi_square_pvalue(counts, probs),
             kChiSquarePThreshold);
}

}  // namespace detail

/// Checks the compiled protocol against the operator oracle. Exact mode
/// enumerates every trajectory of both preparation paths (teleport skipped
/// when its rank-1 qubit precondition fails) and compares success
/// probability, conditional distribution, residual states, and the
/// post-stage-1 state on every branch. Sampled mode checks z-scores and
/// outcome frequencies of seeded shot runs.
inline VerificationReport verify(const PropPtr& prop, const ElementaryAssignment& asg,
                                 const StateVector& psi, const VerifyOptions& opts = {}) {
  PropPtr p = canonicalize(prop);
  VerificationReport report;

  const BranchNorms w = branch_norms(p, psi, asg);
  const ConditionalDistribution cond = conditional_distribution(p, psi, asg);
  const double p_success = overall_success_probability(p, psi, asg);
  const ComplexMatrix op = operator_of(p, asg);
  const StateVector raw_true = op * psi;
  const StateVector raw_false = psi - raw_true;
  const StateVector oracle_true =
      w.w1 > kBranchPruneTol ? StateVector(raw_true / raw_true.norm()) : raw_true;
  const StateVector oracle_false =
      w.w0 > kBranchPruneTol ? StateVector(raw_false / raw_false.norm()) : raw_false;
  const StateVector history_ref = history_state_reference(leaf_labels(p), psi, asg);

  std::vector<PreparationPath> paths = {PreparationPath::Direct};
  if (teleport_applicable(asg)) paths.push_back(PreparationPath::Teleport);

  StateVector direct_stage1;  // reference for cross-path agreement
  for (PreparationPath path : paths) {
    const std::string prefix = path_name(path);
    Circuit c = compile(p, asg, {path});

    if (opts.mode == VerifyOptions::Mode::Sampled) {
      detail::sampled_path_checks(report, prefix, c, psi, p_success, cond.p_true, opts);
      continue;
    }

    double worst_stage1 = 1.0;
    double worst_agreement = 1.0;
    enumerate_stage1_branches(c, psi, [&](const CircuitExecutor& ex) {
      worst_stage1 = std::min(worst_stage1, fidelity(ex.state().amps, history_ref));
      if (path == PreparationPath::Direct)
        direct_stage1 = ex.state().amps;
      else if (direct_stage1.size() == ex.state().amps.size())
        worst_agreement = std::min(worst_agreement, fidelity(ex.state().amps, direct_stage1));
    });
    report.add(prefix + ".stage1_history_state", "fidelity_defect", 1.0 - worst_stage1,
               kFidelityTol);
    if (path == PreparationPath::Teleport)
      report.add("paths_agree.stage1", "fidelity_defect", 1.0 - worst_agreement, kFidelityTol);

    detail::TrajectoryTotals t = detail::exhaustive_totals(c, psi, oracle_true, oracle_false);
    report.add(prefix + ".trajectory_total", "delta", std::abs(t.total - 1.0), kAlgebraTol);
    report.add(prefix + ".success_probability", "delta", std::abs(t.success - p_success),
               kAlgebraTol);
    report.add(prefix + ".conditional_true", "delta",
               std::abs(t.success_true / t.success - cond.p_true), kAlgebraTol);
    report.add(prefix + ".conditional_false", "delta",
               std::abs(t.success_false / t.success - cond.p_false), kAlgebraTol);
    if (t.success_true > kBranchPruneTol)
      report.add(prefix + ".residual_state_true", "fidelity_defect", 1.0 - t.worst_residual_true,
                 kFidelityTol);
    if (t.success_false > kBranchPruneTol)
      report.add(prefix + ".residual_state_false", "fidelity_defect", 1.0 - t.worst_residual_false,
                 kFidelityTol);
  }
  return report;
}

}  // namespace seqlogic
