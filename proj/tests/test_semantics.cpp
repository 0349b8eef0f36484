#include <cmath>

#include "doctest.h"

#include "cliplogic/semantics.hpp"
#include "cliplogic/search.hpp"
#include "helpers.hpp"

using namespace cliplogic;
using cliplogic::testing::coherent_1x1;
using cliplogic::testing::separable_2x2;

namespace {

Description atom(const std::string& text) { return Description::make_atom(Atom(text)); }

// Two atoms, four images covering every atomic truth combination:
// g(a0) on +x, g(a1) on +y, negations antipodal, images in the quadrants.
ClipLikeModel quadrant_model() {
  ClipLikeModel m;
  m.dim = 2;
  m.metric = Metric::Cosine;
  m.vocabulary = Vocabulary({Atom("a0"), Atom("a1")});
  const double s = 0.7071067811865476;
  m.add_image("tt", {s, s});
  m.add_image("tf", {s, -s});
  m.add_image("ft", {-s, s});
  m.add_image("ff", {-s, -s});
  m.add_caption("a0", {1.0, 0.0});
  m.add_caption("not ( a0 )", {-1.0, 0.0});
  m.add_caption("a1", {0.0, 1.0});
  m.add_caption("not ( a1 )", {0.0, -1.0});
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("alpha") {
  ClipLikeModel m = coherent_1x1();
  CHECK(alpha(m, "i0", atom("cat")) == 1.0);
  CHECK(alpha(m, "i0", combine_neg(atom("cat"))) == -1.0);

  m.add_caption("dog", {0.0, 1.0});
  CHECK(alpha(m, "i0", atom("dog")) == 0.0);

  CHECK_THROWS_AS(alpha(m, "i0", atom("fox")), MissingEmbeddingError);
  CHECK_THROWS_AS(alpha(m, "nope", atom("cat")), MissingEmbeddingError);
  try {
    alpha(m, "i0", combine_or(atom("cat"), atom("dog")));
    FAIL("expected MissingEmbeddingError");
  } catch (const MissingEmbeddingError& e) {
    CHECK(e.key() == "( cat ) or ( dog )");
  }
}

TEST_CASE("entails: dominance, ties, and the softmax route") {
  ClipLikeModel m = coherent_1x1();
  EntailsDetail d = entails_detail(m, "i0", atom("cat"));
  CHECK(d.entailed);
  CHECK(!d.tie);
  CHECK(d.alpha_pos == 1.0);
  CHECK(d.alpha_neg == -1.0);
  CHECK(d.p_pos > 0.5);

  // exact tie: both captions orthogonal to the image
  ClipLikeModel t;
  t.dim = 2;
  t.vocabulary = Vocabulary({Atom("cat")});
  t.add_image("i0", {1.0, 0.0});
  t.add_caption("cat", {0.0, 1.0});
  t.add_caption("not ( cat )", {0.0, -1.0});
  t.validate();
  EntailsDetail tied = entails_detail(t, "i0", atom("cat"));
  CHECK(!tied.entailed);  // ties are not-entailed
  CHECK(tied.tie);
  CHECK(tied.p_pos == 0.5);
  CHECK(!models(t, "i0", atom("cat")));
  CHECK(models(t, "i0", combine_neg(atom("cat"))));
}

TEST_CASE("entails == strict alpha comparison == softmax > 1/2 on 1000 random triples") {
  std::mt19937_64 rng(2024);
  int triples = 0;
  int config = 0;
  while (triples < 1000) {
    RandomConfig rc = random_config(2 + config % 3, 2 + config % 2, 2 + config % 7,
                                    9000 + config);
    ++config;
    auto all = enumerate_descriptions(rc.model.vocab(), 2);
    for (int k = 0; k < 40 && triples < 1000; ++k) {
      const std::string& image =
          rc.model.image_order[rng() % rc.model.image_order.size()];
      const Description& d = all[rng() % all.size()];
      if (!rc.model.has_caption(render(d)) ||
          !rc.model.has_caption(render(combine_neg(d)))) {
        continue;
      }
      EntailsDetail det = entails_detail(rc.model, image, d);
      if (det.tie) continue;  // degenerate inputs are flagged, not compared
      bool direct = det.alpha_pos > det.alpha_neg;
      bool via_softmax = det.p_pos > 0.5;
      CHECK(det.entailed == direct);
      CHECK(det.entailed == via_softmax);
      ++triples;
    }
  }
}

TEST_CASE("models: atomic case and boolean clauses") {
  ClipLikeModel m = coherent_1x1();
  Description cat = atom("cat");
  CHECK(models(m, "i0", cat));
  CHECK(!models(m, "i0", combine_neg(cat)));
  CHECK(models(m, "i0", combine_neg(combine_neg(cat))));
  // compounds never consult the caption table: no compound keys exist here
  ClipLikeModel q = quadrant_model();
  CHECK(models(q, "tt", combine_and(atom("a0"), atom("a1"))));
  CHECK(!models(q, "tf", combine_and(atom("a0"), atom("a1"))));
  CHECK(models(q, "tf", combine_or(atom("a0"), atom("a1"))));
  CHECK(!models(q, "ff", combine_or(atom("a0"), atom("a1"))));
}

TEST_CASE("oracle equivalence: models factors through the atomic assignment") {
  ClipLikeModel q = quadrant_model();
  auto all = enumerate_descriptions(q.vocab(), 2);
  std::mt19937_64 rng(31);
  std::vector<Description> pool(all.begin(), all.end());
  for (int t = 0; t < 1500; ++t) {
    pool.push_back(testing::random_description(rng, q.vocab(), 3 + static_cast<int>(t % 2)));
  }
  for (const std::string& image : q.image_order) {
    auto assign = [&](const Atom& a) {
      return models(q, image, Description::make_atom(a));
    };
    for (const Description& d : pool) {
      CHECK(models(q, image, d) == truth_eval(d, assign));
    }
  }
}

TEST_CASE("respects: coherent 1x1 satisfies all four conditions") {
  ClipLikeModel m = coherent_1x1();
  for (const RespectsResult& r :
       {respects_basic(m), respects_negation(m), respects_disjunction(m, 2),
        respects_conjunction(m, 2)}) {
    CHECK(r.holds);
    CHECK(r.worst_violation <= 1e-12);
  }
  CHECK(!respects_basic(m).vacuous);
  CHECK(respects_negation(m).vacuous);  // i0 models no negated atom
}

TEST_CASE("respects: orthogonal captions make everything vacuous or tie-driven") {
  // g(cat) and g(not cat) both orthogonal to f(i0): tie, so i0 models not-cat.
  ClipLikeModel m;
  m.dim = 2;
  m.vocabulary = Vocabulary({Atom("cat")});
  m.add_image("i0", {1.0, 0.0});
  m.add_caption("cat", {0.0, 1.0});
  m.add_caption("not ( cat )", {0.0, -1.0});
  m.validate();

  RespectsResult basic = respects_basic(m);
  CHECK(basic.holds);
  CHECK(basic.vacuous);  // i0 does not model cat
  RespectsResult negation = respects_negation(m);
  CHECK(!negation.vacuous);  // the tie makes not-cat modeled...
  CHECK(!negation.holds);    // ...and alpha(i0, cat) = 0 is far from -1
  CHECK(negation.worst_violation == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("respects: perturbed caption produces the expected worst violation") {
  ClipLikeModel m = coherent_1x1();
  double n = std::sqrt(1.0 + 1e-4);
  m.caption_embeddings["cat"] = {1.0 / n, 1e-2 / n};

  RespectsResult basic = respects_basic(m, 1e-9);
  CHECK(!basic.holds);
  double expected = 1.0 - 1.0 / std::sqrt(1.0001);
  CHECK(basic.worst_violation == doctest::Approx(expected).epsilon(1e-9));
  CHECK(basic.worst_violation == doctest::Approx(5e-5).epsilon(1e-2));
  REQUIRE(basic.witness.has_value());
  CHECK(basic.witness->image == "i0");
  CHECK(basic.witness->caption == "cat");
}

TEST_CASE("describable and separable") {
  ClipLikeModel m = coherent_1x1();
  CHECK(is_describable(m));
  CHECK(!is_separable(m));  // no atom is false of any image

  ClipLikeModel s = separable_2x2();
  // alpha(i0, a1) = alpha(i0, not a1) = 0: tie, so i0 models not-a1.
  CHECK(is_describable(s));
  CHECK(is_separable(s));

  ClipLikeModel empty;
  empty.dim = 2;
  empty.vocabulary = Vocabulary({Atom("cat")});
  empty.add_caption("cat", {1.0, 0.0});
  empty.add_caption("not ( cat )", {-1.0, 0.0});
  CHECK_THROWS_AS(is_describable(empty), ConfigurationError);
  CHECK_THROWS_AS(audit_agreement(empty, 1), ConfigurationError);
  CHECK_THROWS_AS(Vocabulary({}), ConfigurationError);
}

TEST_CASE("check_complete: coherent control and injected violation") {
  ClipLikeModel m = coherent_1x1();
  CoherenceReport rep = check_complete(m, 2, 1e-6);
  CHECK(rep.complete);
  CHECK(rep.describable);
  CHECK(!rep.separable);
  CHECK(rep.agreement.score == 1.0);

  // inject one basic violation
  ClipLikeModel bad = coherent_1x1();
  double n = std::sqrt(1.0 + 1e-4);
  bad.caption_embeddings["cat"] = {1.0 / n, 1e-2 / n};
  CoherenceReport rep2 = check_complete(bad, 2, 1e-6);
  CHECK(!rep2.complete);
  CHECK(!rep2.basic.holds);
  REQUIRE(rep2.basic.witness.has_value());
  CHECK(rep2.basic.witness->image == "i0");
  CHECK(rep2.basic.witness->caption == "cat");
  CHECK(rep2.disjunction.holds);
  CHECK(rep2.conjunction.holds);
}

TEST_CASE("agreement audit covers exactly the entailment-checkable pairs") {
  // 4-entry table: or-compound embedded away from the image with its negation
  // toward it, so the compound is modeled but not entailed.
  ClipLikeModel m;
  m.dim = 2;
  m.vocabulary = Vocabulary({Atom("cat")});
  m.add_image("i0", {1.0, 0.0});
  m.add_caption("cat", {1.0, 0.0});
  m.add_caption("not ( cat )", {-1.0, 0.0});
  m.add_caption("( cat ) or ( cat )", {-1.0, 0.0});
  m.add_caption("not ( ( cat ) or ( cat ) )", {1.0, 0.0});
  m.validate();

  CHECK(models(m, "i0", combine_or(atom("cat"), atom("cat"))));
  CHECK(!entails(m, "i0", combine_or(atom("cat"), atom("cat"))));

  AgreementResult agreement = audit_agreement(m, 1);
  // enumerated at depth 1: cat (covered, agree), not(cat) (skipped: no
  // not(not(cat))), or (covered, disagree), and (skipped)
  CHECK(agreement.pair_count == 2);
  CHECK(agreement.skipped == 2);
  CHECK(agreement.score == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("epsilon relaxation") {
  ClipLikeModel bad = coherent_1x1();
  double n = std::sqrt(1.0 + 1e-4);
  bad.caption_embeddings["cat"] = {1.0 / n, 1e-2 / n};

  EpsilonReport at2 = check_epsilon_complete(bad, 2.0, 2);
  CHECK(at2.passes);  // epsilon = 2 makes every condition vacuous
  double expected = 1.0 - 1.0 / std::sqrt(1.0001);
  CHECK(at2.min_epsilon == doctest::Approx(expected).epsilon(1e-9));

  EpsilonReport tight = check_epsilon_complete(bad, expected / 2.0, 2);
  CHECK(!tight.passes);
  EpsilonReport loose = check_epsilon_complete(bad, expected * 2.0, 2);
  CHECK(loose.passes);

  CHECK_THROWS_AS(check_epsilon_complete(bad, -0.1, 2), ParameterError);
  CHECK_THROWS_AS(check_epsilon_complete(bad, 2.5, 2), ParameterError);

  // monotonicity on random models
  const double grid[] = {0.01, 0.1, 0.5, 1.0, 2.0};
  for (int s = 0; s < 10; ++s) {
    RandomConfig rc = random_config(2 + s % 3, 2 + s % 2, 2 + s % 4, 500 + s, s % 2 == 0);
    bool passed_before = false;
    for (double eps : grid) {
      bool passes = check_epsilon_complete(rc.model, eps, 2).passes;
      if (passed_before) CHECK(passes);
      passed_before = passes;
    }
    CHECK(check_epsilon_complete(rc.model, 2.0, 2).passes);
  }
}

TEST_CASE("ray analysis") {
  RayAnalysis coherent = ray_analysis(coherent_1x1(), 2);
  CHECK(coherent.colinear_true);
  CHECK(coherent.false_count == 0);
  CHECK(coherent.conflicts.empty());
  REQUIRE(coherent.true_ray.has_value());
  CHECK(coherent.true_ray->direction()[0] == doctest::Approx(1.0).epsilon(1e-12));

  // separable 2x2: the obstruction must surface one way or the other
  RayAnalysis sep = ray_analysis(separable_2x2(), 2);
  CHECK((!sep.conflicts.empty() || !sep.colinear_true || !sep.colinear_false));

  // orthogonal members in the true set
  ClipLikeModel q = quadrant_model();
  RayAnalysis quad = ray_analysis(q, 0);
  CHECK(!quad.colinear_true);
  CHECK(!quad.true_ray.has_value());
}

TEST_CASE("find_violation on the separable 2x2") {
  ClipLikeModel s = separable_2x2();
  ViolationCertificate cert = find_violation(s, 2, 1e-6);
  CHECK((cert.kind == "basic" || cert.kind == "negation" || cert.kind == "disjunction"));
  CHECK(cert.atom_d == "a0");
  CHECK(cert.image_i == "i0");
  CHECK(cert.image_j == "i1");  // i1 models not(a0) via the tie
  CHECK(cert.atom_e == "a1");
  CHECK(cert.checks.size() == 5);
  CHECK(replay_certificate(s, cert));

  // determinism
  ViolationCertificate again = find_violation(s, 2, 1e-6);
  CHECK(again.kind == cert.kind);
  CHECK(again.narrative == cert.narrative);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(again.checks[i].value == cert.checks[i].value);
  }

  CHECK_THROWS_AS(find_violation(coherent_1x1(), 2, 1e-6), PreconditionError);
}

TEST_CASE("impossibility: every describable+separable random config is incomplete") {
  int accepted = 0;
  std::uint64_t seed = 1;
  while (accepted < 50) {
    RandomConfig rc = random_config(2 + seed % 3, 2 + seed % 3, 2 + seed % 5, seed);
    ++seed;
    if (!rc.model_describable || !rc.model_separable) continue;
    ++accepted;
    CoherenceReport rep = check_complete(rc.model, 2, 1e-6);
    CHECK(!rep.complete);
    ViolationCertificate cert = find_violation(rc.model, 2, 1e-6);
    CHECK(replay_certificate(rc.model, cert));
  }
  CHECK(accepted == 50);
}

TEST_CASE("scale invariance of verdicts under the cosine metric") {
  RandomConfig rc = random_config(3, 2, 4, 77);
  ClipLikeModel scaled = rc.model;
  std::mt19937_64 rng(78);
  for (auto& [id, v] : scaled.image_embeddings) {
    double lambda = 0.25 + 4.0 * unit_uniform(rng);
    for (double& x : v) x *= lambda;
  }
  for (auto& [key, v] : scaled.caption_embeddings) {
    double lambda = 0.25 + 4.0 * unit_uniform(rng);
    for (double& x : v) x *= lambda;
  }
  auto all = enumerate_descriptions(rc.model.vocab(), 2);
  for (const std::string& image : rc.model.image_order) {
    for (const Description& d : all) {
      CHECK(models(rc.model, image, d) == models(scaled, image, d));
      if (rc.model.has_caption(render(d)) &&
          rc.model.has_caption(render(combine_neg(d)))) {
        CHECK(entails(rc.model, image, d) == entails(scaled, image, d));
      }
    }
  }
  CoherenceReport a = check_complete(rc.model, 2, 1e-6);
  CoherenceReport b = check_complete(scaled, 2, 1e-6);
  CHECK(a.complete == b.complete);
  CHECK(a.basic.holds == b.basic.holds);
  CHECK(a.negation.holds == b.negation.holds);
  CHECK(a.disjunction.holds == b.disjunction.holds);
  CHECK(a.conjunction.holds == b.conjunction.holds);
  CHECK(a.describable == b.describable);
  CHECK(a.separable == b.separable);
}

TEST_CASE("extended negation audit") {
  // For d = not(cat) in the coherent 1x1, i0 models not(d) = not(not(cat)),
  // so the extended check requires alpha(i0, not(cat)) = -1, which holds.
  ClipLikeModel m = coherent_1x1();
  CoherenceReport rep = check_complete(m, 1, 1e-6, true);
  REQUIRE(rep.extended_negation.has_value());
  CHECK(rep.extended_negation->holds);
  CHECK(!rep.extended_negation->vacuous);
  CHECK(rep.complete);  // extended result is reported, not folded into complete
}
