#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "seqlogic/harness.hpp"

namespace seqlogic {

// Structured-text forms of the harness outputs. The JSON object is the
// schema; the text form is a pure formatting layer over the same fields.

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline nlohmann::json trial_stats_to_json(const TrialStats& s) {
  nlohmann::json j{{"format_version", 1},
                   {"seed", s.seed},
                   {"retry", s.retry},
                   {"shots", s.shots},
                   {"attempts", s.attempts},
                   {"successes", s.successes},
                   {"true_count", s.true_count},
                   {"false_count", s.false_count},
                   {"success_rate", s.success_rate()},
                   {"success_rate_stderr", s.success_rate_stderr()}};
  if (auto t = s.p_true_given_success()) {
    j["p_true_given_success"] = *t;
    j["p_true_given_success_stderr"] = *s.p_true_stderr();
  } else {
    j["p_true_given_success"] = nullptr;
    j["p_true_given_success_stderr"] = nullptr;
  }
  return j;
}

inline std::string trial_stats_to_text(const TrialStats& s) {
  std::string out;
  out += "seed " + std::to_string(s.seed) + "\n";
  out += "retry " + std::string(s.retry ? "true" : "false") + "\n";
  out += "shots " + std::to_string(s.shots) + "\n";
  out += "attempts " + std::to_string(s.attempts) + "\n";
  out += "successes " + std::to_string(s.successes) + "\n";
  out += "true_count " + std::to_string(s.true_count) + "\n";
  out += "false_count " + std::to_string(s.false_count) + "\n";
  out += "success_rate " + format_double(s.success_rate()) + " stderr " +
         format_double(s.success_rate_stderr()) + "\n";
  if (auto t = s.p_true_given_success())
    out += "p_true_given_success " + format_double(*t) + " stderr " +
           format_double(*s.p_true_stderr()) + "\n";
  else
    out += "p_true_given_success n/a\n";
  return out;
}

inline nlohmann::json verification_report_to_json(const VerificationReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"kind", c.kind},
                      {"value", c.value},
                      {"threshold", c.threshold},
                      {"pass", c.pass}});
  return {{"format_version", 1}, {"pass", r.pass}, {"checks", checks}};
}

inline std::string verification_report_to_text(const VerificationReport& r) {
  std::string out;
  for (const auto& c : r.checks)
    out += std::string(c.pass ? "PASS" : "FAIL") + " " + c.name + " (" + c.kind + " " +
           format_double(c.value) + (c.kind == "pvalue" ? " > " : " <= ") +
           format_double(c.threshold) + ")\n";
  out += std::string("verification ") + (r.pass ? "PASS" : "FAIL") + "\n";
  return out;
}

}  // namespace seqlogic
