#include "cliplogic/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace cliplogic {

namespace {

// Enumeration cap for audit scans; depth defaults keep real scans far below.
constexpr std::uint64_t kAuditCap = 2000000;

void require_images(const ClipLikeModel& model) {
  if (model.image_order.empty()) {
    throw ConfigurationError("model has no images");
  }
}

}  // namespace

// ── satisfaction and entailment ─────────────────────────────────────────────

bool models(const ClipLikeModel& model, const std::string& image, const Description& d) {
  switch (d.kind()) {
    case Description::Kind::Atom: {
      double pos = alpha(model, image, d);
      double neg = alpha(model, image, combine_neg(d));
      return pos > neg;
    }
    case Description::Kind::Neg:
      return !models(model, image, d.inner());
    case Description::Kind::Or:
      return models(model, image, d.left()) || models(model, image, d.right());
    case Description::Kind::And:
      return models(model, image, d.left()) && models(model, image, d.right());
  }
  throw InternalError("unreachable description kind");
}

EntailsDetail entails_detail(const ClipLikeModel& model, const std::string& image,
                             const Description& d) {
  EntailsDetail out;
  out.alpha_pos = alpha(model, image, d);
  out.alpha_neg = alpha(model, image, combine_neg(d));
  std::vector<double> p = softmax({out.alpha_pos, out.alpha_neg});
  out.p_pos = p[0];
  out.p_neg = p[1];
  out.entailed = out.p_pos > out.p_neg;
  out.tie = (out.alpha_pos == out.alpha_neg) ||
            (out.p_pos == out.p_neg && out.alpha_pos != out.alpha_neg);
  return out;
}

bool entails(const ClipLikeModel& model, const std::string& image, const Description& d) {
  return entails_detail(model, image, d).entailed;
}

// ── respects-* checks ───────────────────────────────────────────────────────

namespace {

// Record one antecedent-true instance against its required similarity value.
// required = +1 checks shortfall 1 - α; required = -1 checks excess α + 1.
void record_instance(RespectsResult& r, double tol, const std::string& image,
                     const std::string& caption, std::optional<std::string> left,
                     std::optional<std::string> right, double a, double required) {
  r.vacuous = false;
  ++r.checked;
  double violation = required > 0 ? 1.0 - a : a + 1.0;
  if (violation > r.worst_violation) r.worst_violation = violation;
  if (violation > tol && !r.witness) {
    r.witness = ViolationWitness{image, caption, std::move(left), std::move(right), a, required};
  }
}

void finish(RespectsResult& r, double tol) { r.holds = r.worst_violation <= tol; }

RespectsResult respects_compound(const ClipLikeModel& model, Description::Kind op, int depth,
                                 double tol) {
  RespectsResult r;
  r.condition = op == Description::Kind::Or ? "disjunction" : "conjunction";
  require_images(model);
  std::vector<Description> all = enumerate_descriptions(model.vocab(), depth, kAuditCap);
  std::vector<const Description*> compounds;
  for (const Description& d : all) {
    if (d.kind() != op) continue;
    if (!model.has_caption(render(d))) {
      ++r.skipped;
      continue;
    }
    compounds.push_back(&d);
  }
  for (const std::string& image : model.image_order) {
    for (const Description* d : compounds) {
      if (!models(model, image, *d)) continue;
      record_instance(r, tol, image, render(*d), render(d->left()), render(d->right()),
                      alpha(model, image, *d), +1.0);
    }
  }
  finish(r, tol);
  return r;
}

}  // namespace

RespectsResult respects_basic(const ClipLikeModel& model, double tol) {
  RespectsResult r;
  r.condition = "basic";
  require_images(model);
  for (const std::string& image : model.image_order) {
    for (const Atom& a : model.vocab().atoms()) {
      Description d = Description::make_atom(a);
      if (!models(model, image, d)) continue;
      record_instance(r, tol, image, a.text(), std::nullopt, std::nullopt,
                      alpha(model, image, d), +1.0);
    }
  }
  finish(r, tol);
  return r;
}

RespectsResult respects_negation(const ClipLikeModel& model, double tol) {
  RespectsResult r;
  r.condition = "negation";
  require_images(model);
  for (const std::string& image : model.image_order) {
    for (const Atom& a : model.vocab().atoms()) {
      Description d = Description::make_atom(a);
      if (!models(model, image, combine_neg(d))) continue;
      record_instance(r, tol, image, a.text(), std::nullopt, std::nullopt,
                      alpha(model, image, d), -1.0);
    }
  }
  finish(r, tol);
  return r;
}

RespectsResult respects_disjunction(const ClipLikeModel& model, int depth, double tol) {
  return respects_compound(model, Description::Kind::Or, depth, tol);
}

RespectsResult respects_conjunction(const ClipLikeModel& model, int depth, double tol) {
  return respects_compound(model, Description::Kind::And, depth, tol);
}

RespectsResult respects_negation_extended(const ClipLikeModel& model, int depth, double tol) {
  RespectsResult r;
  r.condition = "negation-extended";
  require_images(model);
  std::vector<Description> all = enumerate_descriptions(model.vocab(), depth, kAuditCap);
  std::vector<const Description*> present;
  for (const Description& d : all) {
    if (!model.has_caption(render(d))) {
      ++r.skipped;
      continue;
    }
    present.push_back(&d);
  }
  for (const std::string& image : model.image_order) {
    for (const Description* d : present) {
      if (!models(model, image, combine_neg(*d))) continue;
      record_instance(r, tol, image, render(*d), std::nullopt, std::nullopt,
                      alpha(model, image, *d), -1.0);
    }
  }
  finish(r, tol);
  return r;
}

// ── describability / separability ───────────────────────────────────────────

bool is_describable(const ClipLikeModel& model) {
  require_images(model);
  const std::vector<Atom>& atoms = model.vocab().atoms();
  for (const std::string& image : model.image_order) {
    bool any = false;
    for (const Atom& a : atoms) {
      if (models(model, image, Description::make_atom(a))) {
        any = true;
        break;
      }
    }
    if (!any) return false;
  }
  for (const Atom& a : atoms) {
    bool any = false;
    for (const std::string& image : model.image_order) {
      if (models(model, image, Description::make_atom(a))) {
        any = true;
        break;
      }
    }
    if (!any) return false;
  }
  return true;
}

bool is_separable(const ClipLikeModel& model) {
  require_images(model);
  const std::vector<Atom>& atoms = model.vocab().atoms();
  for (const std::string& image : model.image_order) {
    bool any = false;
    for (const Atom& a : atoms) {
      if (models(model, image, combine_neg(Description::make_atom(a)))) {
        any = true;
        break;
      }
    }
    if (!any) return false;
  }
  for (const Atom& a : atoms) {
    bool any = false;
    for (const std::string& image : model.image_order) {
      if (models(model, image, combine_neg(Description::make_atom(a)))) {
        any = true;
        break;
      }
    }
    if (!any) return false;
  }
  return true;
}

// ── agreement audit ─────────────────────────────────────────────────────────

AgreementResult audit_agreement(const ClipLikeModel& model, int depth) {
  require_images(model);
  AgreementResult res;
  std::vector<Description> all = enumerate_descriptions(model.vocab(), depth, kAuditCap);
  long long agree = 0;
  for (const std::string& image : model.image_order) {
    for (const Description& d : all) {
      if (!model.has_caption(render(d)) || !model.has_caption(render(combine_neg(d)))) {
        ++res.skipped;
        continue;
      }
      EntailsDetail e = entails_detail(model, image, d);
      if (e.tie) ++res.ties;
      ++res.pair_count;
      if (models(model, image, d) == e.entailed) ++agree;
    }
  }
  res.score = res.pair_count > 0 ? static_cast<double>(agree) /
                                       static_cast<double>(res.pair_count)
                                 : 1.0;
  return res;
}

// ── completeness audit ──────────────────────────────────────────────────────

CoherenceReport check_complete(const ClipLikeModel& model, int depth, double tol,
                               bool extended_negation) {
  if (depth < 0) throw ParameterError("depth must be >= 0");
  if (tol < 0) throw ParameterError("tol must be >= 0");
  CoherenceReport rep;
  rep.depth = depth;
  rep.tol = tol;
  rep.basic = respects_basic(model, tol);
  rep.negation = respects_negation(model, tol);
  rep.disjunction = respects_disjunction(model, depth, tol);
  rep.conjunction = respects_conjunction(model, depth, tol);
  if (extended_negation) {
    rep.extended_negation = respects_negation_extended(model, depth, tol);
  }
  rep.describable = is_describable(model);
  rep.separable = is_separable(model);
  rep.complete = rep.basic.holds && rep.negation.holds && rep.disjunction.holds &&
                 rep.conjunction.holds;
  rep.agreement = audit_agreement(model, depth);
  return rep;
}

EpsilonReport check_epsilon_complete(const ClipLikeModel& model, double epsilon, int depth,
                                     bool extended_negation) {
  if (epsilon < 0.0 || epsilon > 2.0) {
    throw ParameterError("epsilon must lie in [0, 2]");
  }
  EpsilonReport out;
  out.epsilon = epsilon;
  out.report = check_complete(model, depth, epsilon, extended_negation);
  out.passes = out.report.complete;
  out.min_epsilon = std::max({out.report.basic.worst_violation,
                              out.report.negation.worst_violation,
                              out.report.disjunction.worst_violation,
                              out.report.conjunction.worst_violation});
  return out;
}

// ── ray analysis ────────────────────────────────────────────────────────────

RayAnalysis ray_analysis(const ClipLikeModel& model, int depth, double tol) {
  require_images(model);
  RayAnalysis out;
  std::vector<Vec> true_set;
  std::vector<Vec> false_set;
  std::set<std::string> true_members;   // caption keys only
  std::set<std::string> false_members;

  for (const std::string& image : model.image_order) {
    true_set.push_back(model.image_vec(image));
  }
  std::vector<Description> all = enumerate_descriptions(model.vocab(), depth, kAuditCap);
  for (const Description& d : all) {
    std::string key = render(d);
    if (!model.has_caption(key)) continue;
    bool modeled = std::any_of(model.image_order.begin(), model.image_order.end(),
                               [&](const std::string& i) { return models(model, i, d); });
    if (modeled) {
      true_set.push_back(model.caption_vec(key));
      true_members.insert(key);
    }
  }
  for (const Atom& a : model.vocab().atoms()) {
    Description d = Description::make_atom(a);
    bool negated = std::any_of(
        model.image_order.begin(), model.image_order.end(),
        [&](const std::string& i) { return models(model, i, combine_neg(d)); });
    if (negated) {
      false_set.push_back(model.caption_vec(a.text()));
      false_members.insert(a.text());
    }
  }

  out.true_count = true_set.size();
  out.false_count = false_set.size();
  out.colinear_true = same_ray(true_set, tol);
  out.colinear_false = same_ray(false_set, tol);
  if (out.colinear_true && !true_set.empty()) out.true_ray = ray_of(true_set, tol);
  if (out.colinear_false && !false_set.empty()) out.false_ray = ray_of(false_set, tol);
  for (const std::string& key : false_members) {
    if (true_members.count(key)) out.conflicts.push_back(key);
  }
  return out;
}

// ── impossibility certificate ───────────────────────────────────────────────

ViolationCertificate find_violation(const ClipLikeModel& model, int depth, double tol) {
  if (depth < 0) throw ParameterError("depth must be >= 0");
  if (!is_describable(model) || !is_separable(model)) {
    throw PreconditionError(
        "find_violation requires a describable and separable configuration");
  }

  const std::vector<Atom>& atoms = model.vocab().atoms();
  const Atom& d_atom = atoms.front();
  Description d = Description::make_atom(d_atom);

  auto first_image_where = [&](const std::function<bool(const std::string&)>& pred) {
    for (const std::string& image : model.image_order) {
      if (pred(image)) return image;
    }
    throw InternalError("witness image not found despite describability/separability");
  };

  std::string image_i =
      first_image_where([&](const std::string& i) { return models(model, i, d); });
  std::string image_j = first_image_where(
      [&](const std::string& i) { return models(model, i, combine_neg(d)); });

  std::string atom_e;
  for (const Atom& a : atoms) {
    if (models(model, image_j, Description::make_atom(a))) {
      atom_e = a.text();
      break;
    }
  }
  if (atom_e.empty()) {
    throw InternalError("witness atom not found despite describability");
  }
  Description e = Description::make_atom(Atom(atom_e));
  Description d_or_e = combine_or(d, e);

  ViolationCertificate cert;
  cert.atom_d = d_atom.text();
  cert.image_i = image_i;
  cert.image_j = image_j;
  cert.atom_e = atom_e;
  cert.tol = tol;

  struct Step {
    const char* label;
    const char* kind;
    const std::string* image;
    const Description* desc;
    double required;
  };
  const Step steps[] = {
      {"alpha(i, d)", "basic", &image_i, &d, +1.0},
      {"alpha(i, d or e)", "disjunction", &image_i, &d_or_e, +1.0},
      {"alpha(j, e)", "basic", &image_j, &e, +1.0},
      {"alpha(j, d or e)", "disjunction", &image_j, &d_or_e, +1.0},
      {"alpha(j, d)", "negation", &image_j, &d, -1.0},
  };

  for (const Step& s : steps) {
    AlphaCheck check;
    check.label = s.label;
    check.image = *s.image;
    check.caption = render(*s.desc);
    check.value = alpha(model, *s.image, *s.desc);
    check.required = s.required;
    check.passed = std::abs(check.value - check.required) <= tol;
    cert.checks.push_back(check);
    if (!check.passed && cert.kind.empty()) cert.kind = s.kind;
  }

  if (cert.kind.empty()) {
    throw InternalError(
        "all five certificate equalities hold simultaneously; this is geometrically "
        "impossible and indicates an audit bug");
  }

  const AlphaCheck* first_fail = nullptr;
  for (const AlphaCheck& c : cert.checks) {
    if (!c.passed) {
      first_fail = &c;
      break;
    }
  }
  std::ostringstream narrative;
  narrative << "fix d = \"" << cert.atom_d << "\"; image \"" << image_i
            << "\" models d, and image \"" << image_j << "\" models ( not d ) and \"" << atom_e
            << "\". Coherence would force alpha(i,d) = alpha(i,d or e) = alpha(j,e) = "
               "alpha(j,d or e) = 1 and alpha(j,d) = -1, placing the embedding of d on a ray "
               "and on its disjoint anti-ray at once. First equality to fail: "
            << first_fail->label << " = " << first_fail->value << " (required "
            << first_fail->required << ")";
  cert.narrative = narrative.str();
  return cert;
}

bool replay_certificate(const ClipLikeModel& model, const ViolationCertificate& cert,
                        double replay_tol) {
  std::string first_fail_kind;
  const char* kinds[] = {"basic", "disjunction", "basic", "disjunction", "negation"};
  if (cert.checks.size() != 5) return false;
  for (std::size_t k = 0; k < cert.checks.size(); ++k) {
    const AlphaCheck& c = cert.checks[k];
    double recomputed = alpha(model, c.image, parse(c.caption));
    if (std::abs(recomputed - c.value) > replay_tol) return false;
    bool passed = std::abs(recomputed - c.required) <= cert.tol;
    if (passed != c.passed) return false;
    if (!passed && first_fail_kind.empty()) first_fail_kind = kinds[k];
  }
  return first_fail_kind == cert.kind;
}

}  // namespace cliplogic
