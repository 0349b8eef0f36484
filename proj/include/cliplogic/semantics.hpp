#ifndef CLIPLOGIC_SEMANTICS_HPP
#define CLIPLOGIC_SEMANTICS_HPP

// Satisfaction and entailment over CLIP-like models, the respects-*
// coherence conditions, describability / separability, the completeness
// audit, ray analysis, and the impossibility certificate.

#include <optional>
#include <string>
#include <vector>

#include "cliplogic/logic.hpp"
#include "cliplogic/model.hpp"

namespace cliplogic {

// ── satisfaction and entailment ─────────────────────────────────────────────

// i ⊨ d.  Atomic case: strict similarity dominance of the caption over its
// negated caption.  Compound cases recurse through the boolean clauses and
// never consult the caption table on the compound itself.
bool models(const ClipLikeModel& model, const std::string& image, const Description& d);

// i ⊢ d: the two-caption softmax over {d, not d} puts more mass on d.
// `tie` is set when the input is floating-point degenerate: either the two
// similarities are exactly equal, or the softmax probabilities collapse to
// equality even though the similarities differ by ulps.
struct EntailsDetail {
  double alpha_pos = 0.0;   // α(i, d)
  double alpha_neg = 0.0;   // α(i, not d)
  double p_pos = 0.0;
  double p_neg = 0.0;
  bool entailed = false;
  bool tie = false;
};

EntailsDetail entails_detail(const ClipLikeModel& model, const std::string& image,
                             const Description& d);
bool entails(const ClipLikeModel& model, const std::string& image, const Description& d);

// ── respects-* checks ───────────────────────────────────────────────────────

struct ViolationWitness {
  std::string image;
  std::string caption;                // the caption whose α is checked
  std::optional<std::string> left;    // operands, for compound conditions
  std::optional<std::string> right;
  double alpha = 0.0;
  double required = 0.0;              // +1 or -1
};

struct RespectsResult {
  std::string condition;       // basic | negation | disjunction | conjunction
  bool holds = true;
  bool vacuous = true;         // no instance satisfied the antecedent
  double worst_violation = 0.0;
  long long checked = 0;       // antecedent-true instances evaluated
  long long skipped = 0;       // compounds absent from the caption table
  std::optional<ViolationWitness> witness;  // first violation in scan order
};

// Scan order is image-major over the model's stored image order, then the
// deterministic description enumeration order.  A condition's
// worst_violation is the largest shortfall from its required value
// (1 - α for the +1 conditions, α + 1 for the -1 condition), floored at 0.
RespectsResult respects_basic(const ClipLikeModel& model, double tol = 1e-6);
RespectsResult respects_negation(const ClipLikeModel& model, double tol = 1e-6);
RespectsResult respects_disjunction(const ClipLikeModel& model, int depth = 2,
                                    double tol = 1e-6);
RespectsResult respects_conjunction(const ClipLikeModel& model, int depth = 2,
                                    double tol = 1e-6);

// The negation condition extended from atoms to every enumerated description
// present in the caption table (off by default in audits).
RespectsResult respects_negation_extended(const ClipLikeModel& model, int depth = 2,
                                          double tol = 1e-6);

// ── describability / separability ───────────────────────────────────────────

bool is_describable(const ClipLikeModel& model);
bool is_separable(const ClipLikeModel& model);

// ── agreement audit ─────────────────────────────────────────────────────────

// Fraction of (image, enumerated description) pairs on which ⊨ and ⊢ agree.
// Pairs whose description or negated description is absent from the caption
// table cannot be entailment-checked and are counted in `skipped`.
struct AgreementResult {
  double score = 1.0;
  long long pair_count = 0;
  long long skipped = 0;
  long long ties = 0;
};

AgreementResult audit_agreement(const ClipLikeModel& model, int depth = 2);

// ── completeness audit ──────────────────────────────────────────────────────

struct CoherenceReport {
  int depth = 2;
  double tol = 1e-6;
  RespectsResult basic, negation, disjunction, conjunction;
  std::optional<RespectsResult> extended_negation;
  bool describable = false;
  bool separable = false;
  bool complete = false;  // conjunction of the four respects flags
  AgreementResult agreement;
};

CoherenceReport check_complete(const ClipLikeModel& model, int depth = 2, double tol = 1e-6,
                               bool extended_negation = false);

// ε-relaxed audit: the +1 conditions weaken to α >= 1 - ε and the -1
// condition to α <= -1 + ε.  min_epsilon is the smallest ε at which every
// condition passes (the max of the four worst violations).
struct EpsilonReport {
  double epsilon = 0.0;
  bool passes = false;
  double min_epsilon = 0.0;
  CoherenceReport report;
};

EpsilonReport check_epsilon_complete(const ClipLikeModel& model, double epsilon, int depth = 2,
                                     bool extended_negation = false);

// ── ray analysis ────────────────────────────────────────────────────────────

// T: all image embeddings plus the caption embedding of every enumerated
// description some image models.  F: the caption embedding of every atom
// whose negation some image models.  Reports colinearity of each set, the
// fitted rays when colinear, and the atoms appearing in both sets.
struct RayAnalysis {
  bool colinear_true = true;    // vacuously true for sets of size <= 1
  bool colinear_false = true;
  std::optional<Ray> true_ray;
  std::optional<Ray> false_ray;
  std::size_t true_count = 0;
  std::size_t false_count = 0;
  std::vector<std::string> conflicts;  // descriptions with members in both sets
};

RayAnalysis ray_analysis(const ClipLikeModel& model, int depth = 2, double tol = 1e-9);

// ── impossibility certificate ───────────────────────────────────────────────

struct AlphaCheck {
  std::string label;    // e.g. "alpha(i, d)"
  std::string image;
  std::string caption;
  double value = 0.0;
  double required = 0.0;  // +1 or -1
  bool passed = false;    // |value - required| <= tol
};

struct ViolationCertificate {
  std::string kind;       // basic | negation | disjunction (first failing check)
  std::string atom_d;
  std::string image_i;
  std::string image_j;
  std::string atom_e;
  double tol = 1e-6;
  std::vector<AlphaCheck> checks;
  std::string narrative;
};

// On a describable and separable model, walks the deterministic witness
// script — d := first atom, i ⊨ d, j ⊨ not d, j ⊨ e — and evaluates the
// five similarity equalities the coherence conditions would force:
//   α(i,d)=1, α(i,d∨e)=1, α(j,e)=1, α(j,d∨e)=1, α(j,d)=-1.
// These are mutually inconsistent on any such model, so at least one fails;
// the first failure (in this order) becomes the certificate.  Throws
// PreconditionError when the model is not describable+separable and
// InternalError if no check fails (impossible for tol < 0.4).
ViolationCertificate find_violation(const ClipLikeModel& model, int depth = 2,
                                    double tol = 1e-6);

// True iff re-evaluating every recorded α on the model reproduces the
// certificate's values within replay_tol and the pass/fail pattern and kind
// are unchanged.
bool replay_certificate(const ClipLikeModel& model, const ViolationCertificate& cert,
                        double replay_tol = 1e-12);

}  // namespace cliplogic

#endif  // CLIPLOGIC_SEMANTICS_HPP
