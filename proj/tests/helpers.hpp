#ifndef CLIPLOGIC_TESTS_HELPERS_HPP
#define CLIPLOGIC_TESTS_HELPERS_HPP

// Test-only utilities and independent oracles.  Everything here deliberately
// avoids the library code paths it is used to check.

#include <filesystem>
#include <map>
#include <random>
#include <stack>
#include <string>
#include <vector>

#include "cliplogic/logic.hpp"
#include "cliplogic/model.hpp"
#include "cliplogic/search.hpp"

namespace cliplogic::testing {

// ── random description trees ────────────────────────────────────────────────

// Uniform-ish random AST of exactly the requested depth over the vocabulary.
inline Description random_description(std::mt19937_64& rng, const Vocabulary& vocab,
                                      int depth) {
  if (depth == 0) {
    std::size_t idx = rng() % vocab.size();
    return Description::make_atom(vocab.atoms()[idx]);
  }
  // Children: at least one subtree of exact depth-1, the other anything less.
  int op = static_cast<int>(rng() % 3);
  if (op == 0) return combine_neg(random_description(rng, vocab, depth - 1));
  int other_depth = static_cast<int>(rng() % static_cast<std::uint64_t>(depth));
  bool exact_left = (rng() & 1) != 0;
  Description l = random_description(rng, vocab, exact_left ? depth - 1 : other_depth);
  Description r = random_description(rng, vocab, exact_left ? other_depth : depth - 1);
  return op == 1 ? combine_or(l, r) : combine_and(l, r);
}

// ── boolean oracle ──────────────────────────────────────────────────────────

// Iterative post-order evaluation with an explicit value stack; structurally
// independent of truth_eval's recursion.
inline bool table_eval(const Description& d, const std::map<std::string, bool>& assign) {
  struct Frame {
    Description node;
    int stage;
  };
  std::stack<Frame> work;
  std::stack<bool> values;
  work.push({d, 0});
  while (!work.empty()) {
    Frame f = work.top();
    work.pop();
    switch (f.node.kind()) {
      case Description::Kind::Atom:
        values.push(assign.at(f.node.atom().text()));
        break;
      case Description::Kind::Neg:
        if (f.stage == 0) {
          work.push({f.node, 1});
          work.push({f.node.inner(), 0});
        } else {
          bool v = values.top();
          values.pop();
          values.push(!v);
        }
        break;
      case Description::Kind::Or:
      case Description::Kind::And:
        if (f.stage == 0) {
          work.push({f.node, 1});
          work.push({f.node.right(), 0});
          work.push({f.node.left(), 0});
        } else {
          bool rv = values.top();
          values.pop();
          bool lv = values.top();
          values.pop();
          values.push(f.node.kind() == Description::Kind::Or ? (lv || rv) : (lv && rv));
        }
        break;
    }
  }
  return values.top();
}

// ── finite differences ──────────────────────────────────────────────────────

// Central finite-difference gradient of a scalar function of one vector.
template <typename F>
Vec fd_gradient(const F& f, Vec x, double h = 1e-6) {
  Vec grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double saved = x[i];
    x[i] = saved + h;
    double up = f(x);
    x[i] = saved - h;
    double down = f(x);
    x[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

inline double vec_rel_error(const Vec& got, const Vec& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    double d = got[i] - want[i];
    num += d * d;
    den += want[i] * want[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

// ── model builders ──────────────────────────────────────────────────────────

// The coherent 1x1 configuration: one image on the x-axis, "cat" with it,
// "not ( cat )" opposite, depth-1 compounds on the image's ray.
inline ClipLikeModel coherent_1x1() {
  ClipLikeModel m;
  m.dim = 2;
  m.metric = Metric::Cosine;
  m.vocabulary = Vocabulary({Atom("cat")});
  m.add_image("i0", {1.0, 0.0});
  m.add_caption("cat", {1.0, 0.0});
  m.add_caption("not ( cat )", {-1.0, 0.0});
  m.add_caption("( cat ) or ( cat )", {1.0, 0.0});
  m.add_caption("( cat ) and ( cat )", {1.0, 0.0});
  m.validate();
  return m;
}

// The separable 2x2 configuration from the tie example: orthogonal atoms,
// antipodal negations, plus the four depth-1 disjunction/conjunction keys.
inline ClipLikeModel separable_2x2() {
  ClipLikeModel m;
  m.dim = 2;
  m.metric = Metric::Cosine;
  m.vocabulary = Vocabulary({Atom("a0"), Atom("a1")});
  m.add_image("i0", {1.0, 0.0});
  m.add_image("i1", {0.0, 1.0});
  m.add_caption("a0", {1.0, 0.0});
  m.add_caption("a1", {0.0, 1.0});
  m.add_caption("not ( a0 )", {-1.0, 0.0});
  m.add_caption("not ( a1 )", {0.0, -1.0});
  const double s = 0.7071067811865476;
  m.add_caption("( a0 ) or ( a0 )", {1.0, 0.0});
  m.add_caption("( a0 ) or ( a1 )", {s, s});
  m.add_caption("( a1 ) or ( a0 )", {s, s});
  m.add_caption("( a1 ) or ( a1 )", {0.0, 1.0});
  m.add_caption("( a0 ) and ( a0 )", {1.0, 0.0});
  m.add_caption("( a0 ) and ( a1 )", {s, s});
  m.add_caption("( a1 ) and ( a0 )", {s, s});
  m.add_caption("( a1 ) and ( a1 )", {0.0, 1.0});
  m.validate();
  return m;
}

// The 2x2 diagonal separable truth spec.
inline TruthSpec diagonal_2x2_spec() {
  Vocabulary vocab({Atom("a0"), Atom("a1")});
  std::map<std::pair<std::string, std::string>, bool> truth;
  truth[{"i0", "a0"}] = true;
  truth[{"i0", "a1"}] = false;
  truth[{"i1", "a0"}] = false;
  truth[{"i1", "a1"}] = true;
  return TruthSpec({"i0", "i1"}, vocab, truth);
}

// Fresh scratch directory under the system temp dir.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("cliplogic_" + tag + "_" + std::to_string(counter()++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

}  // namespace cliplogic::testing

#endif  // CLIPLOGIC_TESTS_HELPERS_HPP
