#ifndef CLIPLOGIC_LOGIC_HPP
#define CLIPLOGIC_LOGIC_HPP

// The description language: atomic captions closed under "not", "or", "and".
//
// Canonical surface grammar (fully parenthesized, word operators):
//
//   description := atom
//                | "not" "(" description ")"
//                | "(" description ")" "or"  "(" description ")"
//                | "(" description ")" "and" "(" description ")"
//   atom        := one or more words, none of which is a reserved word
//
// "not", "or", "and" are reserved; "(" and ")" are always their own tokens.
// render() emits exactly this grammar and parse() accepts exactly it, so the
// pair round-trips: parse(render(d)) == d for every description d.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cliplogic/errors.hpp"

namespace cliplogic {

// ── Atom ────────────────────────────────────────────────────────────────────
// An opaque atomic caption, e.g. "an image of a cat".  Whitespace between
// words is canonicalized to single spaces at construction.  Text containing
// parentheses, or a reserved word as a standalone word, is rejected.

class Atom {
 public:
  explicit Atom(const std::string& text);

  const std::string& text() const noexcept { return text_; }

  bool operator==(const Atom& other) const noexcept { return text_ == other.text_; }
  bool operator!=(const Atom& other) const noexcept { return !(*this == other); }

 private:
  std::string text_;
};

// ── Vocabulary ──────────────────────────────────────────────────────────────
// Ordered, duplicate-free, nonempty set of atoms.  The stored order is the
// enumeration order used everywhere downstream.

class Vocabulary {
 public:
  explicit Vocabulary(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool contains(const std::string& text) const;

 private:
  std::vector<Atom> atoms_;
};

// ── Description ─────────────────────────────────────────────────────────────
// Immutable AST node handle with value semantics.  Subtrees are shared;
// there is no interior mutation, so descriptions are freely shareable
// across threads.  Equality is structural.
//
// depth(atom) = 0, depth(op node) = 1 + max over children.

class Description {
 public:
  enum class Kind { Atom, Neg, Or, And };

  static Description make_atom(Atom atom);

  Kind kind() const noexcept;
  int depth() const noexcept;

  const Atom& atom() const;          // Kind::Atom only
  Description inner() const;         // Kind::Neg only
  Description left() const;          // Kind::Or / Kind::And
  Description right() const;         // Kind::Or / Kind::And

  bool operator==(const Description& other) const;
  bool operator!=(const Description& other) const { return !(*this == other); }

 private:
  struct Node;
  explicit Description(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;

  friend Description combine_neg(const Description&);
  friend Description combine_or(const Description&, const Description&);
  friend Description combine_and(const Description&, const Description&);
};

// The operator-combining functions.  Canonical rendered forms:
//   combine_neg(X)    -> "not ( X )"
//   combine_or(X, Y)  -> "( X ) or ( Y )"
//   combine_and(X, Y) -> "( X ) and ( Y )"
Description combine_neg(const Description& d);
Description combine_or(const Description& d, const Description& e);
Description combine_and(const Description& d, const Description& e);

// Canonical string form; parse(render(d)) == d.
std::string render(const Description& d);

// Inverse of render.  Whitespace-insensitive between tokens.  Throws
// SyntaxError (with position) on anything outside the canonical grammar.
Description parse(const std::string& text);

// Number of distinct descriptions over n_atoms atoms with depth <= max_depth.
// Saturates at UINT64_MAX (the closure grows doubly exponentially).
std::uint64_t enumerate_count(std::size_t n_atoms, int max_depth);

// All distinct descriptions over the vocabulary with depth <= max_depth, in
// deterministic (depth, construction, operand) order: all atoms first, then
// per depth level all Neg nodes, all Or nodes, all And nodes, operands in
// enumeration order.  Throws ResourceLimitError if the total exceeds cap.
std::vector<Description> enumerate_descriptions(const Vocabulary& vocab, int max_depth,
                                                std::uint64_t cap = 1000000);

// Standard boolean evaluation under an atomic truth assignment.  The
// assignment must be total on the atoms of d.
bool truth_eval(const Description& d, const std::function<bool(const Atom&)>& assign);

}  // namespace cliplogic

#endif  // CLIPLOGIC_LOGIC_HPP
