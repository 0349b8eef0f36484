#include "cliplogic/logic.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <sstream>

namespace cliplogic {

namespace {

const char* kReserved[] = {"not", "or", "and"};

bool is_reserved(const std::string& word) {
  for (const char* r : kReserved) {
    if (word == r) return true;
  }
  return false;
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) {
        words.push_back(current);
        current.clear();
      }
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(current);
  return words;
}

}  // namespace

// ── Atom ────────────────────────────────────────────────────────────────────

Atom::Atom(const std::string& text) {
  if (text.find('(') != std::string::npos || text.find(')') != std::string::npos) {
    throw ConfigurationError("atom text must not contain parentheses: \"" + text + "\"");
  }
  std::vector<std::string> words = split_words(text);
  if (words.empty()) {
    throw ConfigurationError("atom text must be nonempty");
  }
  for (const std::string& w : words) {
    if (is_reserved(w)) {
      throw ConfigurationError("atom text must not contain the reserved word \"" + w +
                               "\": \"" + text + "\"");
    }
  }
  std::string canonical = words[0];
  for (std::size_t i = 1; i < words.size(); ++i) {
    canonical += ' ';
    canonical += words[i];
  }
  text_ = std::move(canonical);
}

// ── Vocabulary ──────────────────────────────────────────────────────────────

Vocabulary::Vocabulary(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) {
    throw ConfigurationError("vocabulary must be nonempty");
  }
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
      if (atoms_[i] == atoms_[j]) {
        throw ConfigurationError("duplicate atom in vocabulary: \"" + atoms_[i].text() + "\"");
      }
    }
  }
}

bool Vocabulary::contains(const std::string& text) const {
  return std::any_of(atoms_.begin(), atoms_.end(),
                     [&](const Atom& a) { return a.text() == text; });
}

// ── Description ─────────────────────────────────────────────────────────────

struct Description::Node {
  Kind kind;
  // Only one of the following is populated, by kind.
  std::shared_ptr<const Atom> atom;
  std::shared_ptr<const Node> left;   // Neg stores its child here
  std::shared_ptr<const Node> right;  // Or / And only
  int depth = 0;
};

Description Description::make_atom(Atom atom) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Atom;
  node->atom = std::make_shared<Atom>(std::move(atom));
  node->depth = 0;
  return Description(std::move(node));
}

Description::Kind Description::kind() const noexcept { return node_->kind; }
int Description::depth() const noexcept { return node_->depth; }

const Atom& Description::atom() const {
  if (node_->kind != Kind::Atom) throw InternalError("atom() on non-atom description");
  return *node_->atom;
}

Description Description::inner() const {
  if (node_->kind != Kind::Neg) throw InternalError("inner() on non-negation description");
  return Description(node_->left);
}

Description Description::left() const {
  if (node_->kind != Kind::Or && node_->kind != Kind::And) {
    throw InternalError("left() on non-binary description");
  }
  return Description(node_->left);
}

Description Description::right() const {
  if (node_->kind != Kind::Or && node_->kind != Kind::And) {
    throw InternalError("right() on non-binary description");
  }
  return Description(node_->right);
}

bool Description::operator==(const Description& other) const {
  const Node* a = node_.get();
  const Node* b = other.node_.get();
  if (a == b) return true;
  if (a->kind != b->kind || a->depth != b->depth) return false;
  switch (a->kind) {
    case Kind::Atom:
      return *a->atom == *b->atom;
    case Kind::Neg:
      return Description(a->left) == Description(b->left);
    case Kind::Or:
    case Kind::And:
      return Description(a->left) == Description(b->left) &&
             Description(a->right) == Description(b->right);
  }
  return false;
}

Description combine_neg(const Description& d) {
  auto node = std::make_shared<Description::Node>();
  node->kind = Description::Kind::Neg;
  node->left = d.node_;
  node->depth = d.depth() + 1;
  return Description(std::move(node));
}

Description combine_or(const Description& d, const Description& e) {
  auto node = std::make_shared<Description::Node>();
  node->kind = Description::Kind::Or;
  node->left = d.node_;
  node->right = e.node_;
  node->depth = 1 + std::max(d.depth(), e.depth());
  return Description(std::move(node));
}

Description combine_and(const Description& d, const Description& e) {
  auto node = std::make_shared<Description::Node>();
  node->kind = Description::Kind::And;
  node->left = d.node_;
  node->right = e.node_;
  node->depth = 1 + std::max(d.depth(), e.depth());
  return Description(std::move(node));
}

// ── render ──────────────────────────────────────────────────────────────────

namespace {

void render_into(const Description& d, std::string& out) {
  switch (d.kind()) {
    case Description::Kind::Atom:
      out += d.atom().text();
      break;
    case Description::Kind::Neg:
      out += "not ( ";
      render_into(d.inner(), out);
      out += " )";
      break;
    case Description::Kind::Or:
    case Description::Kind::And:
      out += "( ";
      render_into(d.left(), out);
      out += d.kind() == Description::Kind::Or ? " ) or ( " : " ) and ( ";
      render_into(d.right(), out);
      out += " )";
      break;
  }
}

}  // namespace

std::string render(const Description& d) {
  std::string out;
  render_into(d, out);
  return out;
}

// ── parse ───────────────────────────────────────────────────────────────────

namespace {

struct Token {
  enum class Type { LParen, RParen, Not, Or, And, Word, End };
  Type type;
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  std::string current;
  std::size_t current_pos = 0;
  auto flush = [&]() {
    if (current.empty()) return;
    Token::Type type = Token::Type::Word;
    if (current == "not") type = Token::Type::Not;
    else if (current == "or") type = Token::Type::Or;
    else if (current == "and") type = Token::Type::And;
    tokens.push_back({type, current, current_pos});
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == '(' || c == ')') {
      flush();
      tokens.push_back({c == '(' ? Token::Type::LParen : Token::Type::RParen,
                        std::string(1, c), i});
    } else {
      if (current.empty()) current_pos = i;
      current.push_back(c);
    }
  }
  flush();
  tokens.push_back({Token::Type::End, "", text.size()});
  return tokens;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : tokens_(tokenize(text)) {}

  Description run() {
    if (peek().type == Token::Type::End) {
      throw SyntaxError("empty input", 0);
    }
    Description d = parse_description();
    if (peek().type != Token::Type::End) {
      throw SyntaxError("unexpected token \"" + peek().text + "\" after complete description",
                        peek().pos);
    }
    return d;
  }

 private:
  const Token& peek() const { return tokens_[index_]; }
  const Token& advance() { return tokens_[index_++]; }

  void expect(Token::Type type, const char* what) {
    if (peek().type != type) {
      throw SyntaxError(std::string("expected ") + what + ", found " + describe(peek()),
                        peek().pos);
    }
    advance();
  }

  static std::string describe(const Token& tok) {
    if (tok.type == Token::Type::End) return "end of input";
    return "\"" + tok.text + "\"";
  }

  Description parse_description() {
    const Token& tok = peek();
    switch (tok.type) {
      case Token::Type::Not: {
        advance();
        expect(Token::Type::LParen, "\"(\"");
        Description d = parse_description();
        expect(Token::Type::RParen, "\")\"");
        return combine_neg(d);
      }
      case Token::Type::LParen: {
        advance();
        Description lhs = parse_description();
        expect(Token::Type::RParen, "\")\"");
        const Token& op = peek();
        if (op.type != Token::Type::Or && op.type != Token::Type::And) {
          throw SyntaxError("expected \"or\" or \"and\", found " + describe(op), op.pos);
        }
        advance();
        expect(Token::Type::LParen, "\"(\"");
        Description rhs = parse_description();
        expect(Token::Type::RParen, "\")\"");
        return op.type == Token::Type::Or ? combine_or(lhs, rhs) : combine_and(lhs, rhs);
      }
      case Token::Type::Word:
        return parse_atom();
      default:
        throw SyntaxError("expected a description, found " + describe(tok), tok.pos);
    }
  }

  Description parse_atom() {
    std::string text;
    std::size_t start = peek().pos;
    while (peek().type == Token::Type::Word) {
      if (!text.empty()) text += ' ';
      text += advance().text;
    }
    if (text.empty()) {
      throw SyntaxError("expected an atom", start);
    }
    return Description::make_atom(Atom(text));
  }

  std::vector<Token> tokens_;
  std::size_t index_ = 0;
};

}  // namespace

Description parse(const std::string& text) { return Parser(text).run(); }

// ── enumeration ─────────────────────────────────────────────────────────────

namespace {

// Saturating helpers; counts explode quickly.
std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = a + b;
  return r < a ? std::numeric_limits<std::uint64_t>::max() : r;
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<std::uint64_t>::max() / b) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

}  // namespace

std::uint64_t enumerate_count(std::size_t n_atoms, int max_depth) {
  if (max_depth < 0) throw ParameterError("max_depth must be >= 0");
  std::uint64_t level = n_atoms;           // descriptions of depth exactly k
  std::uint64_t cum = n_atoms;             // depth <= k
  std::uint64_t cum_prev = 0;              // depth <= k-1
  for (int k = 1; k <= max_depth; ++k) {
    // Neg over depth k-1; Or/And over pairs (<=k-1, <=k-1) with at least one = k-1.
    std::uint64_t pairs = sat_mul(cum, cum);
    std::uint64_t pairs_prev = sat_mul(cum_prev, cum_prev);
    std::uint64_t fresh_pairs = pairs == std::numeric_limits<std::uint64_t>::max()
                                    ? pairs
                                    : pairs - pairs_prev;
    std::uint64_t next_level = sat_add(level, sat_mul(2, fresh_pairs));
    cum_prev = cum;
    cum = sat_add(cum, next_level);
    level = next_level;
  }
  return cum;
}

std::vector<Description> enumerate_descriptions(const Vocabulary& vocab, int max_depth,
                                                std::uint64_t cap) {
  if (max_depth < 0) throw ParameterError("max_depth must be >= 0");
  std::uint64_t total = enumerate_count(vocab.size(), max_depth);
  if (total > cap) {
    throw ResourceLimitError("enumeration of depth <= " + std::to_string(max_depth) + " over " +
                             std::to_string(vocab.size()) + " atoms has " +
                             std::to_string(total) + " descriptions, exceeding cap " +
                             std::to_string(cap));
  }

  std::vector<Description> all;
  all.reserve(static_cast<std::size_t>(total));
  for (const Atom& a : vocab.atoms()) {
    all.push_back(Description::make_atom(a));
  }

  std::size_t prev_begin = 0;        // first index of depth k-1
  std::size_t prev_end = all.size(); // one past last index of depth k-1
  for (int k = 1; k <= max_depth; ++k) {
    std::size_t cum_end = prev_end;  // everything of depth <= k-1
    for (std::size_t i = prev_begin; i < prev_end; ++i) {
      all.push_back(combine_neg(all[i]));
    }
    for (Description (*op)(const Description&, const Description&) :
         {&combine_or, &combine_and}) {
      for (std::size_t l = 0; l < cum_end; ++l) {
        for (std::size_t r = 0; r < cum_end; ++r) {
          if (all[l].depth() == k - 1 || all[r].depth() == k - 1) {
            all.push_back(op(all[l], all[r]));
          }
        }
      }
    }
    prev_begin = cum_end;
    prev_end = all.size();
  }
  return all;
}

// ── truth_eval ──────────────────────────────────────────────────────────────

bool truth_eval(const Description& d, const std::function<bool(const Atom&)>& assign) {
  switch (d.kind()) {
    case Description::Kind::Atom:
      return assign(d.atom());
    case Description::Kind::Neg:
      return !truth_eval(d.inner(), assign);
    case Description::Kind::Or:
      return truth_eval(d.left(), assign) || truth_eval(d.right(), assign);
    case Description::Kind::And:
      return truth_eval(d.left(), assign) && truth_eval(d.right(), assign);
  }
  throw InternalError("unreachable description kind");
}

}  // namespace cliplogic
