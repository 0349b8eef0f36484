#ifndef CLIPLOGIC_SEARCH_HPP
#define CLIPLOGIC_SEARCH_HPP

// Numerical feasibility lab: builds the coherence constraint system for a
// target truth specification, optimizes embeddings by gradient descent under
// pluggable metrics, and reports (in)feasibility.

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "cliplogic/model.hpp"
#include "cliplogic/semantics.hpp"

namespace cliplogic {

// ── TruthSpec ───────────────────────────────────────────────────────────────
// The target satisfaction pattern on images x atoms.  Externalizing it keeps
// constraint construction independent of the moving embeddings during
// optimization; the optimized model is re-audited with the real ⊨ afterward.

class TruthSpec {
 public:
  TruthSpec(std::vector<std::string> images, Vocabulary atoms,
            std::map<std::pair<std::string, std::string>, bool> truth);

  const std::vector<std::string>& images() const noexcept { return images_; }
  const Vocabulary& atoms() const noexcept { return atoms_; }
  bool truth_of(const std::string& image, const std::string& atom) const;

  // Each image has a true atom and each atom is true of some image.
  bool describable_target() const;
  // Each image has a false atom and each atom is false of some image.
  bool separable_target() const;

 private:
  std::vector<std::string> images_;
  Vocabulary atoms_;
  std::map<std::pair<std::string, std::string>, bool> truth_;
};

nlohmann::ordered_json truthspec_to_json(const TruthSpec& spec);
TruthSpec truthspec_from_json(const nlohmann::ordered_json& j);
TruthSpec load_truthspec(const std::filesystem::path& path);
void save_truthspec(const TruthSpec& spec, const std::filesystem::path& path);

// ── constraints ─────────────────────────────────────────────────────────────

enum class ConstraintOrigin { Basic, Negation, Disjunction, Conjunction };

std::string origin_name(ConstraintOrigin o);

struct Constraint {
  std::string image;
  Description description;
  double target;  // +1 or -1
  ConstraintOrigin origin;
};

// Per image (spec order): every true atom yields (+1, basic), every false
// atom (-1, negation); every enumerated or/and compound of depth <= depth
// whose boolean truth under the image's row is true yields (+1, origin by
// operator).  Deterministic order: image-major, atoms then compounds in
// enumeration order.
std::vector<Constraint> build_constraints(const TruthSpec& spec, int depth);

// ── loss and gradient ───────────────────────────────────────────────────────
// Cosine and dot use squared equality penalties (sim - target)^2.
// Negative-euclidean similarity is unbounded below, so the targets become
// distance hinges anchored at the unit-vector chord lengths (cosine +1 <->
// distance 0, cosine -1 <-> distance 2):
//   target +1: max(0, dist - margin_true)^2          (close within margin_true)
//   target -1: max(0, (2 - margin_false) - dist)^2   (at least 2 - margin_false apart)

struct HingeMargins {
  double margin_true = 1.0;
  double margin_false = 0.0;
};

double loss(const ClipLikeModel& model, const std::vector<Constraint>& constraints,
            const HingeMargins& margins = {});

// Gradient of the loss over every embedding component, keyed like the model's
// tables (zero entries for untouched embeddings).
struct LossGradient {
  std::map<std::string, Vec> image;
  std::map<std::string, Vec> caption;

  double norm() const;
};

LossGradient loss_grad(const ClipLikeModel& model, const std::vector<Constraint>& constraints,
                       const HingeMargins& margins = {});

// ── optimizer ───────────────────────────────────────────────────────────────

struct OptimizerConfig {
  double step_size = 0.05;       // initial step; adapted by the line search
  int max_iters = 5000;
  std::uint64_t seed = 1;
  double convergence_tol = 1e-10;  // on per-iteration loss decrease
  Metric metric = Metric::Cosine;
  int dim = 2;
  double momentum = 0.0;  // heavy-ball coefficient on the accepted direction
  HingeMargins margins;
};

struct TraceRecord {
  int iteration;
  double loss;
  double grad_norm;
};

struct OptimizeResult {
  ClipLikeModel model;
  double final_loss = 0.0;
  std::vector<TraceRecord> trace;
  bool converged = false;
  int iterations = 0;
  int guard_interventions = 0;  // near-zero vectors re-projected during descent
};

// Seeded unit-normal initialization (normalized), then gradient descent with
// a backtracking line search: each iteration retries with halved steps until
// the loss decreases (up to 30 halvings) and doubles the accepted step for
// the next iteration.  The recorded loss sequence is strictly decreasing.
// Any embedding whose norm falls below 1e-6 is re-projected to norm 1e-3
// along its previous direction (counted, never fatal).  Deterministic given
// the seed.  Non-convergence is a reported outcome, not an error.
OptimizeResult optimize(const TruthSpec& spec, const OptimizerConfig& cfg, int depth = 2);

// ── feasibility report ──────────────────────────────────────────────────────

struct FeasibilityRow {
  Metric metric;
  std::uint64_t seed;
  double final_loss = 0.0;
  bool converged = false;
  int iterations = 0;
  int guard_interventions = 0;
  double min_epsilon = 0.0;  // from the ε-relaxed audit of the optimized model
  bool complete = false;     // at tol 1e-6
  bool describable = false;
  bool separable = false;
};

struct FeasibilityAggregate {
  double min_loss = 0.0;
  double median_loss = 0.0;
  double min_epsilon_min = 0.0;
  double min_epsilon_median = 0.0;
};

struct FeasibilitySummary {
  std::vector<FeasibilityRow> rows;                     // (metric, seed) order
  std::map<std::string, FeasibilityAggregate> per_metric;
};

// Called once per completed run, in row order (used by the CLI to emit traces).
using RunObserver = std::function<void(const FeasibilityRow&, const OptimizeResult&)>;

FeasibilitySummary feasibility_report(const TruthSpec& spec, const std::vector<Metric>& metrics,
                                      const std::vector<std::uint64_t>& seeds,
                                      const OptimizerConfig& base_cfg, int depth = 2,
                                      const RunObserver& observer = {});

// ── random configurations ───────────────────────────────────────────────────

struct RandomConfig {
  ClipLikeModel model;
  TruthSpec spec;
  bool model_describable = false;  // properties of the random model itself,
  bool model_separable = false;    // independent of the target truth
};

// Seeded coin-flip truth table (rejection-resampled until the target is
// describable, plus separable when require_separable) over images i0..,
// atoms a0.., with i.i.d. unit-normal normalized embeddings for every
// image, every description of depth <= caption_depth, and the negation of
// each of those.  Deterministic given the seed.
RandomConfig random_config(int n_images, int n_atoms, int dim, std::uint64_t seed,
                           bool require_separable = true, int caption_depth = 2,
                           Metric metric = Metric::Cosine);

// Portable seeded draws (bit-stable across standard libraries: mt19937_64
// output is fully specified, the transforms below are elementary).
double unit_uniform(std::mt19937_64& rng);  // in [0, 1)
double unit_normal(std::mt19937_64& rng);   // Box-Muller
Vec random_unit_vec(std::mt19937_64& rng, int dim);

}  // namespace cliplogic

#endif  // CLIPLOGIC_SEARCH_HPP
