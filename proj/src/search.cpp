#include "cliplogic/search.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace cliplogic {

// ── TruthSpec ───────────────────────────────────────────────────────────────

TruthSpec::TruthSpec(std::vector<std::string> images, Vocabulary atoms,
                     std::map<std::pair<std::string, std::string>, bool> truth)
    : images_(std::move(images)), atoms_(std::move(atoms)), truth_(std::move(truth)) {
  if (images_.empty()) throw ConfigurationError("truth spec has no images");
  std::set<std::string> seen;
  for (const std::string& image : images_) {
    if (image.find('|') != std::string::npos) {
      throw ConfigurationError("image id must not contain '|': \"" + image + "\"");
    }
    if (!seen.insert(image).second) {
      throw ConfigurationError("duplicate image id: \"" + image + "\"");
    }
  }
  for (const std::string& image : images_) {
    for (const Atom& a : atoms_.atoms()) {
      if (!truth_.count({image, a.text()})) {
        throw ConfigurationError("truth assignment is missing pair \"" + image + "|" +
                                 a.text() + "\"");
      }
    }
  }
  if (truth_.size() != images_.size() * atoms_.size()) {
    throw ConfigurationError("truth assignment has entries outside images x atoms");
  }
}

bool TruthSpec::truth_of(const std::string& image, const std::string& atom) const {
  auto it = truth_.find({image, atom});
  if (it == truth_.end()) {
    throw ConfigurationError("no truth entry for \"" + image + "|" + atom + "\"");
  }
  return it->second;
}

bool TruthSpec::describable_target() const {
  for (const std::string& image : images_) {
    bool any = false;
    for (const Atom& a : atoms_.atoms()) any = any || truth_of(image, a.text());
    if (!any) return false;
  }
  for (const Atom& a : atoms_.atoms()) {
    bool any = false;
    for (const std::string& image : images_) any = any || truth_of(image, a.text());
    if (!any) return false;
  }
  return true;
}

bool TruthSpec::separable_target() const {
  for (const std::string& image : images_) {
    bool any = false;
    for (const Atom& a : atoms_.atoms()) any = any || !truth_of(image, a.text());
    if (!any) return false;
  }
  for (const Atom& a : atoms_.atoms()) {
    bool any = false;
    for (const std::string& image : images_) any = any || !truth_of(image, a.text());
    if (!any) return false;
  }
  return true;
}

nlohmann::ordered_json truthspec_to_json(const TruthSpec& spec) {
  nlohmann::ordered_json j;
  j["images"] = spec.images();
  nlohmann::ordered_json atoms = nlohmann::ordered_json::array();
  for (const Atom& a : spec.atoms().atoms()) atoms.push_back(a.text());
  j["atoms"] = std::move(atoms);
  nlohmann::ordered_json truth = nlohmann::ordered_json::object();
  for (const std::string& image : spec.images()) {
    for (const Atom& a : spec.atoms().atoms()) {
      truth[image + "|" + a.text()] = spec.truth_of(image, a.text());
    }
  }
  j["truth"] = std::move(truth);
  return j;
}

TruthSpec truthspec_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw ConfigurationError("truth spec file must be a JSON object");
  for (const char* field : {"images", "atoms", "truth"}) {
    if (!j.contains(field)) {
      throw ConfigurationError(std::string("truth spec is missing field \"") + field + "\"");
    }
  }
  std::vector<std::string> images = j["images"].get<std::vector<std::string>>();
  std::vector<Atom> atoms;
  for (const auto& a : j["atoms"]) atoms.emplace_back(a.get<std::string>());
  std::map<std::pair<std::string, std::string>, bool> truth;
  for (auto it = j["truth"].begin(); it != j["truth"].end(); ++it) {
    const std::string& key = it.key();
    std::size_t bar = key.find('|');
    if (bar == std::string::npos) {
      throw ConfigurationError("truth key must look like \"image|atom\": \"" + key + "\"");
    }
    if (!it.value().is_boolean()) {
      throw ConfigurationError("truth value for \"" + key + "\" must be a boolean");
    }
    truth[{key.substr(0, bar), key.substr(bar + 1)}] = it.value().get<bool>();
  }
  return TruthSpec(std::move(images), Vocabulary(std::move(atoms)), std::move(truth));
}

TruthSpec load_truthspec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open truth spec file: " + path.string());
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError("malformed JSON in " + path.string() + ": " + e.what());
  }
  try {
    return truthspec_from_json(j);
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  }
}

void save_truthspec(const TruthSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write truth spec file: " + path.string());
  out << truthspec_to_json(spec).dump(2) << '\n';
}

// ── constraints ─────────────────────────────────────────────────────────────

std::string origin_name(ConstraintOrigin o) {
  switch (o) {
    case ConstraintOrigin::Basic: return "basic";
    case ConstraintOrigin::Negation: return "negation";
    case ConstraintOrigin::Disjunction: return "disjunction";
    case ConstraintOrigin::Conjunction: return "conjunction";
  }
  throw InternalError("unreachable origin");
}

std::vector<Constraint> build_constraints(const TruthSpec& spec, int depth) {
  if (depth < 0) throw ParameterError("depth must be >= 0");
  std::vector<Constraint> out;
  std::vector<Description> all = enumerate_descriptions(spec.atoms(), depth);
  for (const std::string& image : spec.images()) {
    auto assign = [&](const Atom& a) { return spec.truth_of(image, a.text()); };
    for (const Atom& a : spec.atoms().atoms()) {
      Description d = Description::make_atom(a);
      if (spec.truth_of(image, a.text())) {
        out.push_back({image, d, +1.0, ConstraintOrigin::Basic});
      } else {
        out.push_back({image, d, -1.0, ConstraintOrigin::Negation});
      }
    }
    for (const Description& d : all) {
      if (d.kind() != Description::Kind::Or && d.kind() != Description::Kind::And) continue;
      if (!truth_eval(d, assign)) continue;
      out.push_back({image, d, +1.0,
                     d.kind() == Description::Kind::Or ? ConstraintOrigin::Disjunction
                                                       : ConstraintOrigin::Conjunction});
    }
  }
  return out;
}

// ── loss and gradient ───────────────────────────────────────────────────────

namespace {

// Per-constraint residual r with loss r^2 and d(loss)/d(sim) = 2 r dr/dsim.
// Equality metrics: r = sim - target.  Hinge metrics work on dist = -sim.
struct TermDerivative {
  double value = 0.0;  // term loss
  double dsim = 0.0;   // derivative of term loss w.r.t. similarity
};

TermDerivative term(Metric metric, double sim, double target, const HingeMargins& margins) {
  TermDerivative t;
  if (metric != Metric::NegativeEuclidean) {
    double r = sim - target;
    t.value = r * r;
    t.dsim = 2.0 * r;
    return t;
  }
  double dist = -sim;
  if (target > 0) {
    double h = dist - margins.margin_true;
    if (h > 0) {
      t.value = h * h;
      t.dsim = -2.0 * h;  // dh/dsim = ddist/dsim = -1
    }
  } else {
    double h = (2.0 - margins.margin_false) - dist;
    if (h > 0) {
      t.value = h * h;
      t.dsim = 2.0 * h;  // dh/dsim = (-1)(-1) = +1
    }
  }
  return t;
}

}  // namespace

double loss(const ClipLikeModel& model, const std::vector<Constraint>& constraints,
            const HingeMargins& margins) {
  double total = 0.0;
  for (const Constraint& c : constraints) {
    double sim = alpha(model, c.image, c.description);
    total += term(model.metric, sim, c.target, margins).value;
  }
  return total;
}

double LossGradient::norm() const {
  double sum = 0.0;
  for (const auto& [key, v] : image) {
    for (double x : v) sum += x * x;
  }
  for (const auto& [key, v] : caption) {
    for (double x : v) sum += x * x;
  }
  return std::sqrt(sum);
}

LossGradient loss_grad(const ClipLikeModel& model, const std::vector<Constraint>& constraints,
                       const HingeMargins& margins) {
  LossGradient grad;
  for (const std::string& id : model.image_order) {
    grad.image[id] = Vec(model.dim, 0.0);
  }
  for (const std::string& key : model.caption_order) {
    grad.caption[key] = Vec(model.dim, 0.0);
  }
  for (const Constraint& c : constraints) {
    const Vec& img = model.image_vec(c.image);
    std::string key = render(c.description);
    const Vec& cap = model.caption_vec(key);
    double sim = similarity(model.metric, img, cap);
    TermDerivative t = term(model.metric, sim, c.target, margins);
    if (t.dsim == 0.0) continue;
    Vec dimg = similarity_grad(model.metric, img, cap);
    Vec dcap = similarity_grad(model.metric, cap, img);
    Vec& gi = grad.image[c.image];
    Vec& gc = grad.caption[key];
    for (int k = 0; k < model.dim; ++k) {
      gi[k] += t.dsim * dimg[k];
      gc[k] += t.dsim * dcap[k];
    }
  }
  return grad;
}

// ── seeded draws ────────────────────────────────────────────────────────────

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double unit_normal(std::mt19937_64& rng) {
  double u1 = 1.0 - unit_uniform(rng);  // (0, 1]
  double u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec random_unit_vec(std::mt19937_64& rng, int dim) {
  while (true) {
    Vec v(dim);
    for (double& x : v) x = unit_normal(rng);
    double n = norm(v);
    if (n < 1e-9) continue;
    for (double& x : v) x /= n;
    return v;
  }
}

// ── optimizer ───────────────────────────────────────────────────────────────

namespace {

constexpr double kGuardLow = 1e-6;   // re-project below this norm...
constexpr double kGuardNorm = 1e-3;  // ...back to this norm
constexpr int kMaxHalvings = 30;

ClipLikeModel init_model(const TruthSpec& spec, const std::vector<Constraint>& constraints,
                         const OptimizerConfig& cfg) {
  ClipLikeModel model;
  model.dim = cfg.dim;
  model.metric = cfg.metric;
  model.vocabulary = spec.atoms();

  std::mt19937_64 rng(cfg.seed);
  for (const std::string& image : spec.images()) {
    model.add_image(image, random_unit_vec(rng, cfg.dim));
  }
  for (const Atom& a : spec.atoms().atoms()) {
    model.add_caption(a.text(), random_unit_vec(rng, cfg.dim));
    model.add_caption(neg_key(a), random_unit_vec(rng, cfg.dim));
  }
  for (const Constraint& c : constraints) {
    std::string key = render(c.description);
    if (!model.has_caption(key)) {
      model.add_caption(key, random_unit_vec(rng, cfg.dim));
    }
  }
  return model;
}

// One descent candidate: model - step * grad, with the degenerate-norm guard
// applied vector by vector.  Returns the number of guard interventions.
int apply_step(const ClipLikeModel& from, ClipLikeModel& to, const LossGradient& grad,
               double step) {
  int guards = 0;
  auto update = [&](const Vec& old_v, const Vec& g, Vec& new_v) {
    new_v.resize(old_v.size());
    for (std::size_t k = 0; k < old_v.size(); ++k) new_v[k] = old_v[k] - step * g[k];
    if (norm(new_v) < kGuardLow) {
      double old_norm = norm(old_v);
      for (std::size_t k = 0; k < old_v.size(); ++k) {
        new_v[k] = old_v[k] / old_norm * kGuardNorm;
      }
      ++guards;
    }
  };
  for (const std::string& id : from.image_order) {
    update(from.image_embeddings.at(id), grad.image.at(id), to.image_embeddings.at(id));
  }
  for (const std::string& key : from.caption_order) {
    update(from.caption_embeddings.at(key), grad.caption.at(key),
           to.caption_embeddings.at(key));
  }
  return guards;
}

}  // namespace

OptimizeResult optimize(const TruthSpec& spec, const OptimizerConfig& cfg, int depth) {
  if (cfg.step_size <= 0) throw ParameterError("step_size must be > 0");
  if (cfg.max_iters < 1) throw ParameterError("max_iters must be >= 1");
  if (cfg.dim < 1) throw ParameterError("dim must be >= 1");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) {
    throw ParameterError("momentum must lie in [0, 1)");
  }

  std::vector<Constraint> constraints = build_constraints(spec, depth);

  OptimizeResult result;
  result.model = init_model(spec, constraints, cfg);
  ClipLikeModel candidate = result.model;

  double current = loss(result.model, constraints, cfg.margins);
  double step = cfg.step_size;

  LossGradient grad = loss_grad(result.model, constraints, cfg.margins);
  result.trace.push_back({0, current, grad.norm()});
  LossGradient direction = grad;  // momentum accumulates into the direction

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    double gnorm = grad.norm();
    if (gnorm < 1e-13) {
      result.converged = true;
      break;
    }

    if (iter > 1 && cfg.momentum > 0.0) {
      auto blend = [&](std::map<std::string, Vec>& dir, const std::map<std::string, Vec>& g) {
        for (auto& [key, v] : dir) {
          const Vec& gv = g.at(key);
          for (std::size_t k = 0; k < v.size(); ++k) {
            v[k] = cfg.momentum * v[k] + gv[k];
          }
        }
      };
      blend(direction.image, grad.image);
      blend(direction.caption, grad.caption);
    } else {
      direction = grad;
    }

    double try_step = step;
    double next = current;
    int guards = 0;
    bool accepted = false;
    for (int halving = 0; halving <= kMaxHalvings; ++halving) {
      guards = apply_step(result.model, candidate, direction, try_step);
      next = loss(candidate, constraints, cfg.margins);
      if (next < current) {
        accepted = true;
        break;
      }
      try_step /= 2.0;
    }
    if (!accepted) {
      // No decrease within 30 halvings: numerically stationary.
      result.converged = true;
      break;
    }

    std::swap(result.model, candidate);
    result.guard_interventions += guards;
    double decrease = current - next;
    current = next;
    result.iterations = iter;
    grad = loss_grad(result.model, constraints, cfg.margins);
    result.trace.push_back({iter, current, grad.norm()});
    step = std::min(try_step * 2.0, 1e9);

    if (decrease < cfg.convergence_tol) {
      result.converged = true;
      break;
    }
  }

  result.final_loss = current;
  return result;
}

// ── feasibility report ──────────────────────────────────────────────────────

namespace {

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  std::size_t mid = xs.size() / 2;
  if (xs.size() % 2 == 1) return xs[mid];
  return 0.5 * (xs[mid - 1] + xs[mid]);
}

}  // namespace

FeasibilitySummary feasibility_report(const TruthSpec& spec, const std::vector<Metric>& metrics,
                                      const std::vector<std::uint64_t>& seeds,
                                      const OptimizerConfig& base_cfg, int depth,
                                      const RunObserver& observer) {
  if (metrics.empty()) throw ParameterError("metrics list must be nonempty");
  if (seeds.empty()) throw ParameterError("seeds list must be nonempty");

  FeasibilitySummary summary;
  for (Metric metric : metrics) {
    for (std::uint64_t seed : seeds) {
      OptimizerConfig cfg = base_cfg;
      cfg.metric = metric;
      cfg.seed = seed;
      OptimizeResult r = optimize(spec, cfg, depth);

      FeasibilityRow row;
      row.metric = metric;
      row.seed = seed;
      row.final_loss = r.final_loss;
      row.converged = r.converged;
      row.iterations = r.iterations;
      row.guard_interventions = r.guard_interventions;
      EpsilonReport eps = check_epsilon_complete(r.model, 2.0, depth);
      row.min_epsilon = eps.min_epsilon;
      row.complete = check_complete(r.model, depth, 1e-6).complete;
      row.describable = is_describable(r.model);
      row.separable = is_separable(r.model);
      summary.rows.push_back(row);
      if (observer) observer(row, r);
    }
  }

  for (Metric metric : metrics) {
    std::vector<double> losses;
    std::vector<double> epsilons;
    for (const FeasibilityRow& row : summary.rows) {
      if (row.metric != metric) continue;
      losses.push_back(row.final_loss);
      epsilons.push_back(row.min_epsilon);
    }
    FeasibilityAggregate agg;
    agg.min_loss = *std::min_element(losses.begin(), losses.end());
    agg.median_loss = median(losses);
    agg.min_epsilon_min = *std::min_element(epsilons.begin(), epsilons.end());
    agg.min_epsilon_median = median(epsilons);
    summary.per_metric[metric_name(metric)] = agg;
  }
  return summary;
}

// ── random configurations ───────────────────────────────────────────────────

RandomConfig random_config(int n_images, int n_atoms, int dim, std::uint64_t seed,
                           bool require_separable, int caption_depth, Metric metric) {
  if (n_images < 1 || n_atoms < 1) {
    throw ParameterError("n_images and n_atoms must be >= 1");
  }
  if (dim < 2) throw ParameterError("dim must be >= 2");
  if (require_separable && (n_images < 2 || n_atoms < 2)) {
    throw ParameterError(
        "a separable target needs n_images >= 2 and n_atoms >= 2 (every row and column "
        "must contain both a true and a false entry)");
  }
  if (caption_depth < 1) throw ParameterError("caption_depth must be >= 1");

  std::vector<std::string> images;
  for (int i = 0; i < n_images; ++i) images.push_back("i" + std::to_string(i));
  std::vector<Atom> atom_list;
  for (int a = 0; a < n_atoms; ++a) atom_list.emplace_back("a" + std::to_string(a));
  Vocabulary vocab(atom_list);

  std::mt19937_64 rng(seed);

  // Coin-flip truth table, rejection-resampled until the target satisfies
  // the describability (and separability) flags.
  std::map<std::pair<std::string, std::string>, bool> truth;
  const int kMaxAttempts = 100000;
  bool ok = false;
  for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
    truth.clear();
    for (const std::string& image : images) {
      for (const Atom& a : vocab.atoms()) {
        truth[{image, a.text()}] = (rng() >> 63) != 0;
      }
    }
    TruthSpec candidate(images, vocab, truth);
    ok = candidate.describable_target() && (!require_separable || candidate.separable_target());
  }
  if (!ok) {
    throw InternalError("failed to sample a valid truth table; sizes too constrained");
  }
  TruthSpec spec(images, vocab, truth);

  ClipLikeModel model;
  model.dim = dim;
  model.metric = metric;
  model.vocabulary = vocab;
  for (const std::string& image : images) {
    model.add_image(image, random_unit_vec(rng, dim));
  }
  std::vector<Description> all = enumerate_descriptions(vocab, caption_depth);
  for (const Description& d : all) {
    std::string key = render(d);
    if (!model.has_caption(key)) model.add_caption(key, random_unit_vec(rng, dim));
  }
  for (const Description& d : all) {
    std::string key = render(combine_neg(d));
    if (!model.has_caption(key)) model.add_caption(key, random_unit_vec(rng, dim));
  }

  RandomConfig out{std::move(model), std::move(spec), false, false};
  out.model_describable = is_describable(out.model);
  out.model_separable = is_separable(out.model);
  return out;
}

}  // namespace cliplogic
