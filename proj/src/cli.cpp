#include "cliplogic/cli.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "cliplogic/search.hpp"

namespace cliplogic {

namespace {

using nlohmann::ordered_json;

std::string format17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string current;
  for (char c : s) {
    if (c == ',') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& part : split_list(s)) {
    try {
      seeds.push_back(std::stoull(part));
    } catch (const std::exception&) {
      throw ParameterError("invalid seed \"" + part + "\"");
    }
  }
  if (seeds.empty()) throw ParameterError("at least one seed is required");
  return seeds;
}

std::vector<Metric> parse_metric_list(const std::string& s) {
  std::vector<Metric> metrics;
  for (const std::string& part : split_list(s)) {
    metrics.push_back(metric_from_name(part));
  }
  if (metrics.empty()) throw ParameterError("at least one metric is required");
  return metrics;
}

// ── report serialization ────────────────────────────────────────────────────

ordered_json respects_to_json(const RespectsResult& r) {
  ordered_json j;
  j["holds"] = r.holds;
  j["vacuous"] = r.vacuous;
  j["worst_violation"] = r.worst_violation;
  j["checked"] = r.checked;
  j["skipped"] = r.skipped;
  if (r.witness) {
    ordered_json w;
    w["image"] = r.witness->image;
    w["caption"] = r.witness->caption;
    if (r.witness->left) w["left"] = *r.witness->left;
    if (r.witness->right) w["right"] = *r.witness->right;
    w["alpha"] = r.witness->alpha;
    w["required"] = r.witness->required;
    j["witness"] = std::move(w);
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

ordered_json coherence_to_json(const CoherenceReport& rep) {
  ordered_json j;
  j["depth"] = rep.depth;
  j["tol"] = rep.tol;
  j["describable"] = rep.describable;
  j["separable"] = rep.separable;
  j["complete"] = rep.complete;
  ordered_json respects;
  respects["basic"] = respects_to_json(rep.basic);
  respects["negation"] = respects_to_json(rep.negation);
  respects["disjunction"] = respects_to_json(rep.disjunction);
  respects["conjunction"] = respects_to_json(rep.conjunction);
  j["respects"] = std::move(respects);
  if (rep.extended_negation) {
    j["extended_negation"] = respects_to_json(*rep.extended_negation);
  }
  ordered_json agreement;
  agreement["score"] = rep.agreement.score;
  agreement["pair_count"] = rep.agreement.pair_count;
  agreement["skipped"] = rep.agreement.skipped;
  agreement["ties"] = rep.agreement.ties;
  j["agreement"] = std::move(agreement);
  return j;
}

ordered_json rays_to_json(const RayAnalysis& rays) {
  ordered_json j;
  j["colinear_true"] = rays.colinear_true;
  j["colinear_false"] = rays.colinear_false;
  j["true_count"] = rays.true_count;
  j["false_count"] = rays.false_count;
  j["true_ray"] = rays.true_ray ? ordered_json(rays.true_ray->direction()) : ordered_json(nullptr);
  j["false_ray"] =
      rays.false_ray ? ordered_json(rays.false_ray->direction()) : ordered_json(nullptr);
  j["conflicts"] = rays.conflicts;
  return j;
}

ordered_json certificate_to_json(const ViolationCertificate& cert) {
  ordered_json j;
  j["kind"] = cert.kind;
  j["tol"] = cert.tol;
  ordered_json witness;
  witness["d"] = cert.atom_d;
  witness["i"] = cert.image_i;
  witness["j"] = cert.image_j;
  witness["e"] = cert.atom_e;
  j["witness"] = std::move(witness);
  ordered_json checks = ordered_json::array();
  for (const AlphaCheck& c : cert.checks) {
    ordered_json cj;
    cj["label"] = c.label;
    cj["image"] = c.image;
    cj["caption"] = c.caption;
    cj["alpha"] = c.value;
    cj["required"] = c.required;
    cj["passed"] = c.passed;
    checks.push_back(std::move(cj));
  }
  j["checks"] = std::move(checks);
  j["narrative"] = cert.narrative;
  return j;
}

ViolationCertificate certificate_from_json(const ordered_json& j) {
  ViolationCertificate cert;
  cert.kind = j.at("kind").get<std::string>();
  cert.tol = j.at("tol").get<double>();
  cert.atom_d = j.at("witness").at("d").get<std::string>();
  cert.image_i = j.at("witness").at("i").get<std::string>();
  cert.image_j = j.at("witness").at("j").get<std::string>();
  cert.atom_e = j.at("witness").at("e").get<std::string>();
  for (const auto& cj : j.at("checks")) {
    AlphaCheck c;
    c.label = cj.at("label").get<std::string>();
    c.image = cj.at("image").get<std::string>();
    c.caption = cj.at("caption").get<std::string>();
    c.value = cj.at("alpha").get<double>();
    c.required = cj.at("required").get<double>();
    c.passed = cj.at("passed").get<bool>();
    cert.checks.push_back(std::move(c));
  }
  cert.narrative = j.value("narrative", std::string{});
  return cert;
}

void print_respects_line(std::ostream& out, const RespectsResult& r) {
  out << "  " << std::left << std::setw(29) << ("respects " + r.condition)
      << (r.holds ? "OK  " : "FAIL") << "  worst violation " << std::scientific
      << std::setprecision(3) << r.worst_violation << std::defaultfloat;
  if (r.vacuous) out << "  (vacuous)";
  if (r.witness) {
    out << "  witness: image \"" << r.witness->image << "\", caption \"" << r.witness->caption
        << "\"";
  }
  out << "\n";
}

// ── gen ─────────────────────────────────────────────────────────────────────

struct GenArgs {
  int n_images = 0;
  int n_atoms = 0;
  int dim = 0;
  std::uint64_t seed = 1;
  std::string out_prefix = "config";
  int depth = 2;
  std::string metric = "cosine";
  bool separable = true;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  RandomConfig config = random_config(a.n_images, a.n_atoms, a.dim, a.seed, a.separable,
                                      a.depth, metric_from_name(a.metric));
  std::filesystem::path model_path = a.out_prefix + ".model.json";
  std::filesystem::path truth_path = a.out_prefix + ".truth.json";

  ordered_json params;
  params["n_images"] = a.n_images;
  params["n_atoms"] = a.n_atoms;
  params["dim"] = a.dim;
  params["seed"] = a.seed;
  params["depth"] = a.depth;
  params["metric"] = a.metric;
  params["separable"] = a.separable;
  params["out"] = a.out_prefix;
  ordered_json manifest = make_manifest("gen", params, ordered_json::object());

  ordered_json model_json = model_to_json(config.model);
  model_json["manifest"] = manifest;
  write_atomic(model_path, model_json.dump(2) + "\n");

  ordered_json truth_json = truthspec_to_json(config.spec);
  truth_json["manifest"] = manifest;
  write_atomic(truth_path, truth_json.dump(2) + "\n");

  out << "wrote " << model_path.string() << " and " << truth_path.string() << "\n";
  out << "model describable: " << (config.model_describable ? "yes" : "no")
      << ", separable: " << (config.model_separable ? "yes" : "no") << "\n";
  return 0;
}

// ── audit ───────────────────────────────────────────────────────────────────

struct AuditArgs {
  std::string model_path;
  int depth = 2;
  double tol = 1e-6;
  double ray_tol = 1e-9;
  bool extended_negation = false;
  double epsilon = -1.0;  // < 0 means "not requested"
  std::string out_path;
};

int cmd_audit(const AuditArgs& a, std::ostream& out) {
  ClipLikeModel model = load_model(a.model_path);
  CoherenceReport rep = check_complete(model, a.depth, a.tol, a.extended_negation);
  RayAnalysis rays = ray_analysis(model, a.depth, a.ray_tol);
  std::optional<EpsilonReport> eps;
  if (a.epsilon >= 0.0) {
    eps = check_epsilon_complete(model, a.epsilon, a.depth, a.extended_negation);
  }

  out << "model: " << a.model_path << " (" << model.image_order.size() << " images, "
      << model.vocab().size() << " atoms, dim " << model.dim << ", metric "
      << metric_name(model.metric) << ")\n";
  out << "  describable: " << (rep.describable ? "yes" : "no")
      << "   separable: " << (rep.separable ? "yes" : "no") << "\n";
  print_respects_line(out, rep.basic);
  print_respects_line(out, rep.negation);
  print_respects_line(out, rep.disjunction);
  print_respects_line(out, rep.conjunction);
  if (rep.extended_negation) print_respects_line(out, *rep.extended_negation);
  out << "  agreement score: " << rep.agreement.score << " over " << rep.agreement.pair_count
      << " pairs (" << rep.agreement.skipped << " skipped, " << rep.agreement.ties
      << " exact ties)\n";
  out << "  rays: true set " << (rays.colinear_true ? "colinear" : "NOT colinear") << " ("
      << rays.true_count << " members), false set "
      << (rays.colinear_false ? "colinear" : "NOT colinear") << " (" << rays.false_count
      << " members), " << rays.conflicts.size() << " conflict(s)\n";
  if (eps) {
    out << "  epsilon " << eps->epsilon << ": " << (eps->passes ? "passes" : "fails")
        << ", min_epsilon " << eps->min_epsilon << "\n";
  }
  out << "verdict: " << (rep.complete ? "complete" : "incomplete") << "\n";

  if (!a.out_path.empty()) {
    ordered_json params;
    params["model"] = a.model_path;
    params["depth"] = a.depth;
    params["tol"] = a.tol;
    params["ray_tol"] = a.ray_tol;
    params["extended_negation"] = a.extended_negation;
    if (a.epsilon >= 0.0) params["epsilon"] = a.epsilon;
    params["out"] = a.out_path;
    ordered_json inputs;
    inputs["model"] = {{"path", a.model_path}, {"fnv1a64", file_digest(a.model_path)}};
    ordered_json doc;
    doc["manifest"] = make_manifest("audit", params, inputs);
    doc["report"] = coherence_to_json(rep);
    if (eps) {
      ordered_json ej;
      ej["epsilon"] = eps->epsilon;
      ej["passes"] = eps->passes;
      ej["min_epsilon"] = eps->min_epsilon;
      doc["report"]["epsilon"] = std::move(ej);
    }
    doc["rays"] = rays_to_json(rays);
    write_atomic(a.out_path, doc.dump(2) + "\n");
  }
  return rep.complete ? 0 : 1;
}

// ── certify ─────────────────────────────────────────────────────────────────

struct CertifyArgs {
  std::string model_path;
  int depth = 2;
  double tol = 1e-6;
  std::string out_path = "certificate.json";
  std::string replay_path;
};

int cmd_certify(const CertifyArgs& a, std::ostream& out) {
  ClipLikeModel model = load_model(a.model_path);

  if (!a.replay_path.empty()) {
    std::ifstream in(a.replay_path);
    if (!in) throw IoError("cannot open certificate file: " + a.replay_path);
    ordered_json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigurationError("malformed JSON in " + a.replay_path + ": " + e.what());
    }
    ViolationCertificate cert = certificate_from_json(j.at("certificate"));
    if (replay_certificate(model, cert)) {
      out << "verified\n";
      return 0;
    }
    out << "replay mismatch: certificate does not reproduce on this model\n";
    return 1;
  }

  ViolationCertificate cert = find_violation(model, a.depth, a.tol);
  ordered_json params;
  params["model"] = a.model_path;
  params["depth"] = a.depth;
  params["tol"] = a.tol;
  params["out"] = a.out_path;
  ordered_json inputs;
  inputs["model"] = {{"path", a.model_path}, {"fnv1a64", file_digest(a.model_path)}};
  ordered_json doc;
  doc["manifest"] = make_manifest("certify", params, inputs);
  doc["certificate"] = certificate_to_json(cert);
  write_atomic(a.out_path, doc.dump(2) + "\n");

  out << "violation certificate (" << cert.kind << "): " << cert.narrative << "\n";
  out << "wrote " << a.out_path << "\n";
  return 0;
}

// ── optimize ────────────────────────────────────────────────────────────────

struct OptimizeArgs {
  std::string spec_path;
  std::string metrics = "cosine";
  std::string seeds = "1";
  int dim = 2;
  int depth = 2;
  double step_size = 0.05;
  int max_iters = 5000;
  double convergence_tol = 1e-10;
  double momentum = 0.0;
  double margin_true = 1.0;
  double margin_false = 0.0;
  std::string out_dir = ".";
};

int cmd_optimize(const OptimizeArgs& a, std::ostream& out) {
  TruthSpec spec = load_truthspec(a.spec_path);
  std::vector<Metric> metrics = parse_metric_list(a.metrics);
  std::vector<std::uint64_t> seeds = parse_seed_list(a.seeds);

  OptimizerConfig cfg;
  cfg.step_size = a.step_size;
  cfg.max_iters = a.max_iters;
  cfg.convergence_tol = a.convergence_tol;
  cfg.dim = a.dim;
  cfg.momentum = a.momentum;
  cfg.margins = HingeMargins{a.margin_true, a.margin_false};

  std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);

  auto write_trace = [&](const FeasibilityRow& row, const OptimizeResult& r) {
    std::ostringstream csv;
    csv << "iteration,loss,grad_norm\n";
    for (const TraceRecord& t : r.trace) {
      csv << t.iteration << ',' << format17(t.loss) << ',' << format17(t.grad_norm) << '\n';
    }
    std::filesystem::path path =
        dir / ("trace_" + metric_name(row.metric) + "_" + std::to_string(row.seed) + ".csv");
    write_atomic(path, csv.str());
  };

  FeasibilitySummary summary =
      feasibility_report(spec, metrics, seeds, cfg, a.depth, write_trace);

  ordered_json params;
  params["spec"] = a.spec_path;
  params["metric"] = a.metrics;
  params["seeds"] = a.seeds;
  params["dim"] = a.dim;
  params["depth"] = a.depth;
  params["step_size"] = a.step_size;
  params["max_iters"] = a.max_iters;
  params["convergence_tol"] = a.convergence_tol;
  params["momentum"] = a.momentum;
  params["margin_true"] = a.margin_true;
  params["margin_false"] = a.margin_false;
  params["out"] = a.out_dir;
  ordered_json inputs;
  inputs["spec"] = {{"path", a.spec_path}, {"fnv1a64", file_digest(a.spec_path)}};

  ordered_json doc;
  doc["manifest"] = make_manifest("optimize", params, inputs);
  ordered_json rows = ordered_json::array();
  for (const FeasibilityRow& row : summary.rows) {
    ordered_json rj;
    rj["metric"] = metric_name(row.metric);
    rj["seed"] = row.seed;
    rj["final_loss"] = row.final_loss;
    rj["converged"] = row.converged;
    rj["iterations"] = row.iterations;
    rj["guard_interventions"] = row.guard_interventions;
    rj["min_epsilon"] = row.min_epsilon;
    rj["complete"] = row.complete;
    rj["describable"] = row.describable;
    rj["separable"] = row.separable;
    rows.push_back(std::move(rj));
  }
  doc["rows"] = std::move(rows);
  ordered_json aggregates = ordered_json::object();
  for (const auto& [name, agg] : summary.per_metric) {
    ordered_json aj;
    aj["min_final_loss"] = agg.min_loss;
    aj["median_final_loss"] = agg.median_loss;
    aj["min_epsilon_min"] = agg.min_epsilon_min;
    aj["min_epsilon_median"] = agg.min_epsilon_median;
    aggregates[name] = std::move(aj);
  }
  doc["aggregates"] = std::move(aggregates);

  std::filesystem::path summary_path = dir / "summary.json";
  write_atomic(summary_path, doc.dump(2) + "\n");

  for (const FeasibilityRow& row : summary.rows) {
    out << metric_name(row.metric) << " seed " << row.seed << ": final_loss "
        << format17(row.final_loss) << ", " << (row.converged ? "converged" : "max_iters")
        << " after " << row.iterations << " iterations, min_epsilon "
        << format17(row.min_epsilon) << "\n";
  }
  out << "wrote " << summary_path.string() << " and " << summary.rows.size()
      << " trace file(s) under " << dir.string() << "\n";
  return 0;
}

// ── enumerate ───────────────────────────────────────────────────────────────

struct EnumerateArgs {
  std::vector<std::string> atoms;
  int depth = 1;
  std::uint64_t cap = 1000000;
};

int cmd_enumerate(const EnumerateArgs& a, std::ostream& out) {
  std::vector<Atom> atoms;
  for (const std::string& text : a.atoms) atoms.emplace_back(text);
  Vocabulary vocab(std::move(atoms));
  for (const Description& d : enumerate_descriptions(vocab, a.depth, a.cap)) {
    out << render(d) << "\n";
  }
  return 0;
}

}  // namespace

// ── shared plumbing ─────────────────────────────────────────────────────────

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for digest: " + path.string());
  std::uint64_t hash = 1469598103934665603ull;  // FNV-1a offset basis
  char buffer[4096];
  while (in) {
    in.read(buffer, sizeof(buffer));
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 1099511628211ull;  // FNV prime
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016" PRIx64, hash);
  return hex;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + tmp.string());
    out << content;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::ordered_json make_manifest(const std::string& command,
                                     nlohmann::ordered_json parameters,
                                     nlohmann::ordered_json input_digests) {
  nlohmann::ordered_json m;
  m["tool"] = "cliplogic";
  m["version"] = kToolVersion;
  m["command"] = command;
  m["parameters"] = std::move(parameters);
  m["inputs"] = std::move(input_digests);
  return m;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"logical coherence auditing for joint-embedding configurations"};
  app.require_subcommand(1);

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand(
      "gen", "generate a random model file and truth-spec file");
  gen->add_option("n_images", gen_args.n_images, "number of images")->required();
  gen->add_option("n_atoms", gen_args.n_atoms, "number of atomic captions")->required();
  gen->add_option("dim", gen_args.dim, "latent dimension")->required();
  gen->add_option("--seed", gen_args.seed, "random seed");
  gen->add_option("--out", gen_args.out_prefix,
                  "output prefix; writes <out>.model.json and <out>.truth.json");
  gen->add_option("--depth", gen_args.depth, "caption-table coverage depth");
  gen->add_option("--metric", gen_args.metric, "cosine | dot | negative-euclidean");
  gen->add_flag("--separable,!--no-separable", gen_args.separable,
                "require a separable target truth table (default on)");

  AuditArgs audit_args;
  CLI::App* audit = app.add_subcommand("audit", "audit a model file for coherence");
  audit->add_option("model", audit_args.model_path, "model JSON file")->required();
  audit->add_option("--depth", audit_args.depth, "compound scan depth");
  audit->add_option("--tol", audit_args.tol, "tolerance on the +/-1 similarity conditions");
  audit->add_option("--ray-tol", audit_args.ray_tol, "ray colinearity tolerance");
  audit->add_flag("--extended-negation", audit_args.extended_negation,
                  "also audit the negation condition over compound descriptions");
  audit->add_option("--epsilon", audit_args.epsilon,
                    "additionally report the epsilon-relaxed audit at this epsilon");
  audit->add_option("--out", audit_args.out_path, "write the structured report here");

  CertifyArgs certify_args;
  CLI::App* certify =
      app.add_subcommand("certify", "construct (or replay) a violation certificate");
  certify->add_option("model", certify_args.model_path, "model JSON file")->required();
  certify->add_option("--depth", certify_args.depth, "compound scan depth");
  certify->add_option("--tol", certify_args.tol, "tolerance on the +/-1 conditions");
  certify->add_option("--out", certify_args.out_path, "certificate output path");
  certify->add_option("--replay", certify_args.replay_path,
                      "verify an existing certificate file against the model");

  OptimizeArgs optimize_args;
  CLI::App* optimize_cmd =
      app.add_subcommand("optimize", "search embeddings for a target truth spec");
  optimize_cmd->add_option("spec", optimize_args.spec_path, "truth-spec JSON file")->required();
  optimize_cmd->add_option("--metric", optimize_args.metrics,
                           "comma list of metrics (cosine,dot,negative-euclidean)");
  optimize_cmd->add_option("--seeds", optimize_args.seeds, "comma list of seeds");
  optimize_cmd->add_option("--dim", optimize_args.dim, "latent dimension");
  optimize_cmd->add_option("--depth", optimize_args.depth, "constraint compound depth");
  optimize_cmd->add_option("--step-size", optimize_args.step_size, "initial step size");
  optimize_cmd->add_option("--max-iters", optimize_args.max_iters, "iteration budget");
  optimize_cmd->add_option("--convergence-tol", optimize_args.convergence_tol,
                           "stop when the loss decrease falls below this");
  optimize_cmd->add_option("--momentum", optimize_args.momentum,
                           "heavy-ball momentum coefficient in [0, 1)");
  optimize_cmd->add_option("--margin-true", optimize_args.margin_true,
                           "negative-euclidean: max distance for true pairs");
  optimize_cmd->add_option("--margin-false", optimize_args.margin_false,
                           "negative-euclidean: slack under distance 2 for false pairs");
  optimize_cmd->add_option("--out", optimize_args.out_dir, "output directory");

  EnumerateArgs enum_args;
  CLI::App* enumerate_cmd = app.add_subcommand(
      "enumerate", "list the canonical caption strings up to a depth");
  enumerate_cmd->add_option("atoms", enum_args.atoms, "atomic captions")->required();
  enumerate_cmd->add_option("--depth", enum_args.depth, "maximum description depth");
  enumerate_cmd->add_option("--cap", enum_args.cap, "enumeration size cap");

  std::vector<const char*> argv;
  argv.push_back("cliplogic");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_args, out);
    if (audit->parsed()) return cmd_audit(audit_args, out);
    if (certify->parsed()) return cmd_certify(certify_args, out);
    if (optimize_cmd->parsed()) return cmd_optimize(optimize_args, out);
    if (enumerate_cmd->parsed()) return cmd_enumerate(enum_args, out);
    err << "error: no subcommand\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace cliplogic
