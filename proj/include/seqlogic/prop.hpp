#pragma once

#include <cctype>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seqlogic/errors.hpp"

namespace seqlogic {

/// Connectives of the sequential proposition language: negation, sequential
/// conjunction ("and then") and sequential exclusive OR.
enum class PropKind { Elementary, Not, SeqAnd, SeqXor };

struct Proposition;
using PropPtr = std::shared_ptr<const Proposition>;

/// Immutable proposition tree. Every leaf is Elementary; Not keeps its child
/// in `left`. Trees are shared freely; nothing mutates them after
/// construction.
struct Proposition {
  PropKind kind;
  std::string label;  // Elementary only
  PropPtr left;
  PropPtr right;
};

inline bool valid_label(std::string_view name) {
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name[0]))) return false;
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

inline PropPtr elementary(std::string name) {
  if (!valid_label(name)) throw Error("invalid elementary label '" + name + "'");
  return std::make_shared<Proposition>(
      Proposition{PropKind::Elementary, std::move(name), nullptr, nullptr});
}

inline PropPtr negation(PropPtr child) {
  return std::make_shared<Proposition>(
      Proposition{PropKind::Not, {}, std::move(child), nullptr});
}

inline PropPtr seq_and(PropPtr left, PropPtr right) {
  return std::make_shared<Proposition>(
      Proposition{PropKind::SeqAnd, {}, std::move(left), std::move(right)});
}

inline PropPtr seq_xor(PropPtr left, PropPtr right) {
  return std::make_shared<Proposition>(
      Proposition{PropKind::SeqXor, {}, std::move(left), std::move(right)});
}

inline bool structurally_equal(const PropPtr& a, const PropPtr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case PropKind::Elementary:
      return a->label == b->label;
    case PropKind::Not:
      return structurally_equal(a->left, b->left);
    case PropKind::SeqAnd:
    case PropKind::SeqXor:
      return structurally_equal(a->left, b->left) && structurally_equal(a->right, b->right);
  }
  return false;
}

namespace detail {

// Recursive descent over:  chain := unary (('&'|'^') unary)*
//                          unary := '!' unary | ident | '(' chain ')'
// '&' and '^' share one precedence level and associate left; a chain may not
// mix them without explicit parentheses.
class PropParser {
 public:
  explicit PropParser(std::string_view text) : text_(text) {}

  PropPtr parse() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty proposition", pos_);
    PropPtr p = parse_chain();
    skip_ws();
    if (pos_ < text_.size()) throw ParseError("unexpected trailing input", pos_);
    return p;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  PropPtr parse_chain() {
    PropPtr acc = parse_unary();
    char chain_op = 0;
    for (;;) {
      skip_ws();
      if (pos_ >= text_.size()) break;
      char c = text_[pos_];
      if (c != '&' && c != '^') break;
      if (chain_op == 0) {
        chain_op = c;
      } else if (c != chain_op) {
        throw ParseError("mixing '&' and '^' in one chain requires parentheses", pos_);
      }
      ++pos_;
      PropPtr rhs = parse_unary();
      acc = chain_op == '&' ? seq_and(std::move(acc), std::move(rhs))
                            : seq_xor(std::move(acc), std::move(rhs));
    }
    return acc;
  }

  PropPtr parse_unary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("dangling operator: expected a proposition", pos_);
    if (text_[pos_] == '!') {
      ++pos_;
      return negation(parse_unary());
    }
    return parse_atom();
  }

  PropPtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("dangling operator: expected a proposition", pos_);
    char c = text_[pos_];
    if (c == '(') {
      std::size_t open = pos_++;
      PropPtr inner = parse_chain();
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')') throw ParseError("unbalanced '('", open);
      ++pos_;
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      return elementary(std::string(text_.substr(start, pos_ - start)));
    }
    if (c == ')') throw ParseError("unbalanced ')'", pos_);
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline bool is_binary(const PropPtr& p) {
  return p->kind == PropKind::SeqAnd || p->kind == PropKind::SeqXor;
}

// Collects the operand list of a maximal same-operator chain, canonicalizing
// each operand. Used to re-associate chains to left-nested form.
inline void flatten_chain(const PropPtr& p, PropKind op, std::vector<PropPtr>& out);

}  // namespace detail

inline PropPtr parse_proposition(std::string_view text) {
  return detail::PropParser(text).parse();
}

/// Minimal-parentheses rendering. Same-operator chains print flat, so
/// parse(print(p)) recovers canonicalize(p) rather than p itself.
inline std::string print_proposition(const PropPtr& p) {
  switch (p->kind) {
    case PropKind::Elementary:
      return p->label;
    case PropKind::Not: {
      std::string inner = print_proposition(p->left);
      return detail::is_binary(p->left) ? "!(" + inner + ")" : "!" + inner;
    }
    case PropKind::SeqAnd:
    case PropKind::SeqXor: {
      char op = p->kind == PropKind::SeqAnd ? '&' : '^';
      auto side = [&](const PropPtr& child) {
        std::string s = print_proposition(child);
        // A binary child of the other operator kind must keep its brackets.
        return detail::is_binary(child) && child->kind != p->kind ? "(" + s + ")" : s;
      };
      return side(p->left) + op + side(p->right);
    }
  }
  throw Error("corrupt proposition node");
}

/// Re-associates '&' and '^' chains to left-nested form; no other rewriting.
inline PropPtr canonicalize(const PropPtr& p) {
  switch (p->kind) {
    case PropKind::Elementary:
      return p;
    case PropKind::Not: {
      PropPtr c = canonicalize(p->left);
      return c == p->left ? p : negation(std::move(c));
    }
    case PropKind::SeqAnd:
    case PropKind::SeqXor: {
      std::vector<PropPtr> operands;
      detail::flatten_chain(p, p->kind, operands);
      PropPtr acc = operands.front();
      for (std::size_t i = 1; i < operands.size(); ++i) {
        acc = p->kind == PropKind::SeqAnd ? seq_and(std::move(acc), operands[i])
                                          : seq_xor(std::move(acc), operands[i]);
      }
      return structurally_equal(acc, p) ? p : acc;
    }
  }
  throw Error("corrupt proposition node");
}

namespace detail {
inline void flatten_chain(const PropPtr& p, PropKind op, std::vector<PropPtr>& out) {
  if (p->kind == op) {
    flatten_chain(p->left, op, out);
    flatten_chain(p->right, op, out);
  } else {
    out.push_back(canonicalize(p));
  }
}
}  // namespace detail

inline int count_nodes(const PropPtr& p, PropKind kind) {
  int self = p->kind == kind ? 1 : 0;
  switch (p->kind) {
    case PropKind::Elementary:
      return self;
    case PropKind::Not:
      return self + count_nodes(p->left, kind);
    case PropKind::SeqAnd:
    case PropKind::SeqXor:
      return self + count_nodes(p->left, kind) + count_nodes(p->right, kind);
  }
  return self;
}

inline int count_seq_ands(const PropPtr& p) { return count_nodes(p, PropKind::SeqAnd); }

inline bool contains_seq_xor(const PropPtr& p) { return count_nodes(p, PropKind::SeqXor) > 0; }

/// Leaf labels in left-to-right leaf order, duplicates included.
inline void collect_leaf_labels(const PropPtr& p, std::vector<std::string>& out) {
  switch (p->kind) {
    case PropKind::Elementary:
      out.push_back(p->label);
      return;
    case PropKind::Not:
      collect_leaf_labels(p->left, out);
      return;
    case PropKind::SeqAnd:
    case PropKind::SeqXor:
      collect_leaf_labels(p->left, out);
      collect_leaf_labels(p->right, out);
      return;
  }
}

inline std::vector<std::string> leaf_labels(const PropPtr& p) {
  std::vector<std::string> out;
  collect_leaf_labels(p, out);
  return out;
}

/// Post-order listing (children first, left before right) of the Not and
/// SeqAnd nodes — the order in which the reduction protocol consumes them.
/// Propositions containing '^' have no reduction protocol and are rejected.
inline void reduction_schedule_rec(const PropPtr& p, std::vector<PropPtr>& out) {
  switch (p->kind) {
    case PropKind::Elementary:
      return;
    case PropKind::Not:
      reduction_schedule_rec(p->left, out);
      out.push_back(p);
      return;
    case PropKind::SeqAnd:
      reduction_schedule_rec(p->left, out);
      reduction_schedule_rec(p->right, out);
      out.push_back(p);
      return;
    case PropKind::SeqXor:
      throw Error("sequential exclusive OR is not supported by the reduction protocol");
  }
}

inline std::vector<PropPtr> reduction_schedule(const PropPtr& p) {
  std::vector<PropPtr> out;
  reduction_schedule_rec(p, out);
  return out;
}

/// Boolean reduction: '&' as AND, '!' as NOT, '^' as XOR.
inline bool classical_eval(const PropPtr& p, const std::map<std::string, bool>& truth) {
  switch (p->kind) {
    case PropKind::Elementary: {
      auto it = truth.find(p->label);
      if (it == truth.end()) throw Error("no truth value for label '" + p->label + "'");
      return it->second;
    }
    case PropKind::Not:
      return !classical_eval(p->left, truth);
    case PropKind::SeqAnd:
      return classical_eval(p->left, truth) && classical_eval(p->right, truth);
    case PropKind::SeqXor:
      return classical_eval(p->left, truth) != classical_eval(p->right, truth);
  }
  throw Error("corrupt proposition node");
}

/// Indented multi-line tree dump for the CLI.
inline void ast_dump_rec(const PropPtr& p, int depth, std::string& out) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  switch (p->kind) {
    case PropKind::Elementary:
      out += "Elementary " + p->label + "\n";
      return;
    case PropKind::Not:
      out += "Not\n";
      ast_dump_rec(p->left, depth + 1, out);
      return;
    case PropKind::SeqAnd:
    case PropKind::SeqXor:
      out += p->kind == PropKind::SeqAnd ? "SeqAnd\n" : "SeqXor\n";
      ast_dump_rec(p->left, depth + 1, out);
      ast_dump_rec(p->right, depth + 1, out);
      return;
  }
}

inline std::string ast_dump(const PropPtr& p) {
  std::string out;
  ast_dump_rec(p, 0, out);
  return out;
}

}  // namespace seqlogic
