// Command-line front end: parse propositions, check physicality, compile to
// the measurement protocol, run seeded simulations, and verify against the
// operator oracle.
//
// Exit codes: 0 success/pass, 1 verification or validation failure,
// 2 usage/input error, 3 attempt cap exhausted.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqlogic/assignment_file.hpp"
#include "seqlogic/circuit.hpp"
#include "seqlogic/harness.hpp"
#include "seqlogic/oracle.hpp"
#include "seqlogic/prop.hpp"
#include "seqlogic/reports.hpp"
#include "seqlogic/sim.hpp"

namespace {

using namespace seqlogic;
using nlohmann::json;

struct CommonArgs {
  std::string prop_text;
  std::string assignment_path;
  bool as_json = false;
};

void emit(const json& j, const std::string& text, bool as_json) {
  if (as_json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text;
}

PreparationPath parse_path(const std::string& name) {
  if (name == "teleport") return PreparationPath::Teleport;
  if (name == "direct") return PreparationPath::Direct;
  throw Error("unknown preparation path '" + name + "' (expected teleport or direct)");
}

std::string matrix_text(const ComplexMatrix& m) {
  std::string out;
  detail::append_matrix(out, m);
  return out;
}

int cmd_parse(const CommonArgs& args) {
  PropPtr p = parse_proposition(args.prop_text);
  PropPtr canon = canonicalize(p);
  const bool xor_present = contains_seq_xor(p);
  json j{{"format_version", 1},
         {"proposition", args.prop_text},
         {"canonical", print_proposition(canon)},
         {"leaves", leaf_labels(p).size()},
         {"seq_ands", count_seq_ands(p)},
         {"compilable", !xor_present},
         {"tree", ast_dump(p)}};
  std::string text;
  text += "canonical " + print_proposition(canon) + "\n";
  text += "leaves " + std::to_string(leaf_labels(p).size()) + "\n";
  text += "seq_ands " + std::to_string(count_seq_ands(p)) + "\n";
  text += "tree:\n" + ast_dump(p);
  if (xor_present)
    text += "note: '^' has no reduction protocol; this proposition cannot be compiled\n";
  emit(j, text, args.as_json);
  return 0;
}

void collect_xor_defects(const PropPtr& p, const ElementaryAssignment& asg, json& checks,
                         std::string& text) {
  if (p->kind == PropKind::SeqXor) {
    TestPairValidity v = is_valid_test_pair(operator_of(p, asg));
    std::string name = print_proposition(p);
    checks.push_back({{"proposition", name}, {"defect", v.defect}, {"valid", v.valid}});
    text += "xor_pair_defect[" + name + "] " + format_double(v.defect) +
            (v.valid ? " (valid)" : " (INVALID)") + "\n";
  }
  switch (p->kind) {
    case PropKind::Elementary:
      return;
    case PropKind::Not:
      collect_xor_defects(p->left, asg, checks, text);
      return;
    case PropKind::SeqAnd:
    case PropKind::SeqXor:
      collect_xor_defects(p->left, asg, checks, text);
      collect_xor_defects(p->right, asg, checks, text);
      return;
  }
}

int cmd_check(const CommonArgs& args) {
  PropPtr p = parse_proposition(args.prop_text);
  AssignmentInput input = load_assignment_file(args.assignment_path);
  TestPairValidity direct = is_valid_test_pair(operator_of(p, input.assignment));
  double obstruction = coherent_and_obstruction();
  CoherentAndPair pair = build_coherent_and_pair();
  double completeness = max_abs(pair.success.adjoint() * pair.success +
                                pair.failure.adjoint() * pair.failure -
                                ComplexMatrix::Identity(4, 4));

  json j{{"format_version", 1},
         {"proposition", print_proposition(canonicalize(p))},
         {"direct_test_defect", direct.defect},
         {"direct_test_valid", direct.valid},
         {"coherent_and_largest_eigenvalue", obstruction},
         {"coherent_and_completeness_defect", completeness}};
  std::string text;
  text += "direct_test_defect " + format_double(direct.defect) + "\n";
  text += std::string("direct_test_valid ") + (direct.valid ? "true" : "false") + "\n";
  if (!direct.valid)
    text += "note: {[s], I-[s]} is not a generalized measurement pair; "
            "only the nondeterministic protocol can test it\n";
  text += "coherent_and_largest_eigenvalue " + format_double(obstruction) + "\n";
  text += "coherent_and_completeness_defect " + format_double(completeness) + "\n";
  if (contains_seq_xor(p)) {
    json xor_checks = json::array();
    collect_xor_defects(p, input.assignment, xor_checks, text);
    j["xor_pairs"] = xor_checks;
  }
  emit(j, text, args.as_json);
  return 0;
}

int cmd_compile(const CommonArgs& args, const std::string& path_name,
                const std::string& output_path) {
  PropPtr p = parse_proposition(args.prop_text);
  AssignmentInput input = load_assignment_file(args.assignment_path);
  Circuit c = compile(p, input.assignment, {parse_path(path_name)});
  ValidationReport report = validate(c);
  if (!report.ok()) {
    for (const auto& v : report.violations)
      std::cerr << "violation at instruction " << v.instruction << ": " << v.message << "\n";
    return 1;
  }
  std::string dump = circuit_to_text(c);
  if (output_path.empty()) {
    std::cout << dump;
  } else {
    std::ofstream out(output_path);
    if (!out) throw Error("cannot write '" + output_path + "'");
    out << dump;
  }
  return 0;
}

int cmd_run(const CommonArgs& args, const std::string& path_name, std::uint64_t shots,
            std::uint64_t seed, bool retry, std::uint64_t max_attempts, unsigned jobs) {
  PropPtr p = parse_proposition(args.prop_text);
  AssignmentInput input = load_assignment_file(args.assignment_path);
  Circuit c = compile(p, input.assignment, {parse_path(path_name)});
  TrialStats stats;
  if (retry) {
    if (max_attempts == 0) {
      max_attempts = default_max_attempts(
          overall_success_probability(p, input.initial_state, input.assignment));
    }
    stats.retry = true;
    stats.seed = seed;
    stats.shots = shots;
    for (std::uint64_t i = 0; i < shots; ++i) {
      auto [outcome, attempts] =
          run_until_success(c, input.initial_state, derive_stream_seed(seed, i), max_attempts);
      stats.attempts += attempts;
      ++stats.successes;
      *outcome.truth_value ? ++stats.true_count : ++stats.false_count;
    }
  } else {
    stats = estimate(c, input.initial_state, shots, seed, jobs);
  }
  emit(trial_stats_to_json(stats), trial_stats_to_text(stats), args.as_json);
  return 0;
}

int cmd_verify(const CommonArgs& args, const std::string& mode, std::uint64_t shots,
               std::uint64_t seed) {
  PropPtr p = parse_proposition(args.prop_text);
  AssignmentInput input = load_assignment_file(args.assignment_path);
  VerifyOptions opts;
  if (mode == "exact")
    opts.mode = VerifyOptions::Mode::Exact;
  else if (mode == "sampled")
    opts.mode = VerifyOptions::Mode::Sampled;
  else
    throw Error("unknown mode '" + mode + "' (expected exact or sampled)");
  opts.shots = shots;
  opts.seed = seed;
  VerificationReport report = verify(p, input.assignment, input.initial_state, opts);
  emit(verification_report_to_json(report), verification_report_to_text(report), args.as_json);
  return report.pass ? 0 : 1;
}

int cmd_analytic(const CommonArgs& args) {
  PropPtr p = parse_proposition(args.prop_text);
  AssignmentInput input = load_assignment_file(args.assignment_path);
  BranchNorms w = branch_norms(p, input.initial_state, input.assignment);
  ConditionalDistribution cond = conditional_distribution(p, input.initial_state, input.assignment);
  ComplexMatrix op = operator_of(p, input.assignment);
  json j{{"format_version", 1},
         {"proposition", print_proposition(canonicalize(p))},
         {"w1", w.w1},
         {"w0", w.w0},
         {"conditional_true", cond.p_true},
         {"conditional_false", cond.p_false},
         {"seq_ands", count_seq_ands(p)},
         {"operator", matrix_to_json(op)}};
  std::string text;
  text += "w1 " + format_double(w.w1) + "\n";
  text += "w0 " + format_double(w.w0) + "\n";
  text += "conditional_true " + format_double(cond.p_true) + "\n";
  text += "conditional_false " + format_double(cond.p_false) + "\n";
  text += "seq_ands " + std::to_string(count_seq_ands(p)) + "\n";
  if (contains_seq_xor(p)) {
    j["success_probability"] = nullptr;
    text += "success_probability n/a ('^' has no reduction protocol)\n";
  } else {
    double ps = overall_success_probability(p, input.initial_state, input.assignment);
    j["success_probability"] = ps;
    text += "success_probability " + format_double(ps) + "\n";
  }
  text += "operator " + matrix_text(op) + "\n";
  emit(j, text, args.as_json);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequential-proposition measurement-protocol toolchain"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string path_name = "teleport";
  std::string output_path;
  std::string mode = "exact";
  std::uint64_t shots = 10000;
  std::uint64_t seed = 0;
  std::uint64_t max_attempts = 0;
  unsigned jobs = 1;
  bool retry = false;

  auto add_prop = [&](CLI::App* sub) {
    sub->add_option("proposition", args.prop_text, "proposition string")->required();
    sub->add_flag("--json", args.as_json, "emit JSON instead of text");
  };
  auto add_assignment = [&](CLI::App* sub) {
    sub->add_option("-a,--assignment", args.assignment_path, "assignment file (JSON)")
        ->required();
  };

  CLI::App* parse_cmd = app.add_subcommand("parse", "parse and dump a proposition");
  add_prop(parse_cmd);

  CLI::App* check_cmd = app.add_subcommand("check", "physicality report for a proposition");
  add_prop(check_cmd);
  add_assignment(check_cmd);

  CLI::App* compile_cmd = app.add_subcommand("compile", "lower a proposition to a circuit dump");
  add_prop(compile_cmd);
  add_assignment(compile_cmd);
  compile_cmd->add_option("--path", path_name, "preparation path: teleport or direct")->required();
  compile_cmd->add_option("-o,--output", output_path, "write the dump to a file");

  CLI::App* run_cmd = app.add_subcommand("run", "seeded simulation of the protocol");
  add_prop(run_cmd);
  add_assignment(run_cmd);
  run_cmd->add_option("--path", path_name, "preparation path: teleport or direct")->required();
  run_cmd->add_option("--shots", shots, "number of runs");
  run_cmd->add_option("--seed", seed, "base seed");
  run_cmd->add_flag("--retry", retry, "restart each shot until it succeeds");
  run_cmd->add_option("--max-attempts", max_attempts,
                      "retry cap per shot (default: 100 * ceil(1/p_success))");
  run_cmd->add_option("--jobs", jobs, "worker threads for the shot loop");

  CLI::App* verify_cmd = app.add_subcommand("verify", "check the protocol against the oracle");
  add_prop(verify_cmd);
  add_assignment(verify_cmd);
  verify_cmd->add_option("--mode", mode, "exact or sampled");
  verify_cmd->add_option("--shots", shots, "shots for sampled mode");
  verify_cmd->add_option("--seed", seed, "base seed for sampled mode");

  CLI::App* analytic_cmd = app.add_subcommand("analytic", "operator-oracle quantities");
  add_prop(analytic_cmd);
  add_assignment(analytic_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (parse_cmd->parsed()) return cmd_parse(args);
    if (check_cmd->parsed()) return cmd_check(args);
    if (compile_cmd->parsed()) return cmd_compile(args, path_name, output_path);
    if (run_cmd->parsed()) return cmd_run(args, path_name, shots, seed, retry, max_attempts, jobs);
    if (verify_cmd->parsed()) return cmd_verify(args, mode, shots, seed);
    if (analytic_cmd->parsed()) return cmd_analytic(args);
  } catch (const ExhaustedAttemptsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
