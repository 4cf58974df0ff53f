#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "seqlogic/oracle.hpp"

namespace seqlogic {

/// A parsed assignment file: the projector assignment plus the initial
/// system state. File schema (JSON):
///
///   {
///     "format_version": 1,
///     "dimension": d,
///     "elementary": {
///       "<label>": {"state": [[re,im], ...]}          // rank-1, length d
///                | {"projector": [[[re,im], ...], ...]} // d x d
///     },
///     "initial_state": [[re,im], ...]                  // length d
///   }
///
/// Complex numbers are always [re, im] pairs. Input states may be off
/// normalization by up to 1e-9 and are renormalized on load.
struct AssignmentInput {
  ElementaryAssignment assignment;
  StateVector initial_state;
};

namespace detail {

inline Complex complex_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error("assignment file: " + where + " must be a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline StateVector state_from_json(const nlohmann::json& j, int dim, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw Error("assignment file: " + where + " must be a length-" + std::to_string(dim) +
                " array of [re, im] pairs");
  StateVector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = complex_from_json(j[i], where);
  double n2 = v.squaredNorm();
  if (std::abs(n2 - 1.0) > 1e-9)
    throw Error("assignment file: " + where + " is not normalized (squared norm " +
                std::to_string(n2) + ")");
  return v / std::sqrt(n2);
}

inline ComplexMatrix matrix_from_json(const nlohmann::json& j, int dim, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw Error("assignment file: " + where + " must be a " + std::to_string(dim) + "x" +
                std::to_string(dim) + " array");
  ComplexMatrix m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != dim)
      throw Error("assignment file: " + where + " row " + std::to_string(r) + " has wrong length");
    for (int c = 0; c < dim; ++c) m(r, c) = complex_from_json(j[r][c], where);
  }
  return m;
}

}  // namespace detail

inline AssignmentInput parse_assignment_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("assignment file: top level must be an object");
  if (!j.contains("format_version") || j["format_version"] != 1)
    throw Error("assignment file: missing or unsupported format_version (expected 1)");
  if (!j.contains("dimension") || !j["dimension"].is_number_integer())
    throw Error("assignment file: missing integer 'dimension'");
  const int dim = j["dimension"].get<int>();
  if (!j.contains("elementary") || !j["elementary"].is_object())
    throw Error("assignment file: missing 'elementary' object");
  std::map<std::string, ComplexMatrix> projectors;
  for (const auto& [label, entry] : j["elementary"].items()) {
    if (entry.contains("state"))
      projectors[label] =
          projector_from_state(detail::state_from_json(entry["state"], dim, "state of '" + label + "'"));
    else if (entry.contains("projector"))
      projectors[label] =
          detail::matrix_from_json(entry["projector"], dim, "projector of '" + label + "'");
    else
      throw Error("assignment file: '" + label + "' needs a 'state' or a 'projector'");
  }
  if (!j.contains("initial_state"))
    throw Error("assignment file: missing 'initial_state'");
  AssignmentInput input{ElementaryAssignment::validated(dim, std::move(projectors)),
                        detail::state_from_json(j["initial_state"], dim, "initial_state")};
  return input;
}

inline AssignmentInput parse_assignment_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("assignment file: ") + e.what());
  }
  return parse_assignment_json(j);
}

inline AssignmentInput load_assignment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open assignment file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_assignment_text(buf.str());
}

inline nlohmann::json complex_to_json(const Complex& z) {
  return nlohmann::json::array({z.real(), z.imag()});
}

inline nlohmann::json state_to_json(const StateVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v[i]));
  return out;
}

inline nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    out.push_back(row);
  }
  return out;
}

inline nlohmann::json assignment_to_json(const AssignmentInput& input) {
  nlohmann::json elem = nlohmann::json::object();
  for (const auto& [label, p] : input.assignment.projectors)
    elem[label] = {{"projector", matrix_to_json(p)}};
  return {{"format_version", 1},
          {"dimension", input.assignment.system_dim},
          {"elementary", elem},
          {"initial_state", state_to_json(input.initial_state)}};
}

}  // namespace seqlogic
