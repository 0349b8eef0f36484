#ifndef CLIPLOGIC_MODEL_HPP
#define CLIPLOGIC_MODEL_HPP

// A CLIP-like configuration: finite embedding tables for images and
// captions over a shared latent space, plus the similarity metric.

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "cliplogic/geometry.hpp"
#include "cliplogic/logic.hpp"

namespace cliplogic {

enum class Metric { Cosine, Dot, NegativeEuclidean };

std::string metric_name(Metric m);
Metric metric_from_name(const std::string& name);  // ParameterError on unknown names

// Similarity of two latent vectors under a metric.  Cosine requires nonzero
// vectors; dot is the plain inner product; negative-euclidean is -|a - b|.
double similarity(Metric m, const Vec& a, const Vec& b);

// Gradient of similarity(m, a, b) with respect to a.  All three metrics are
// symmetric in their arguments, so the b-gradient is similarity_grad(m, b, a).
// Negative-euclidean is non-differentiable at a == b; the gradient there is
// reported as zero (the similarity is at its maximum).
Vec similarity_grad(Metric m, const Vec& a, const Vec& b);

// ── ClipLikeModel ───────────────────────────────────────────────────────────
// The image table realizes f over the image ids; the caption table realizes
// g over a finite set of canonical caption strings.  Iteration order of both
// tables is the stored insertion order and is part of the model's identity
// (audits resolve witnesses in this order).

struct ClipLikeModel {
  int dim = 0;
  Metric metric = Metric::Cosine;
  std::optional<Vocabulary> vocabulary;  // engaged on any validated model

  std::vector<std::string> image_order;
  std::unordered_map<std::string, Vec> image_embeddings;
  std::vector<std::string> caption_order;
  std::unordered_map<std::string, Vec> caption_embeddings;

  void add_image(const std::string& id, Vec v);
  void add_caption(const std::string& key, Vec v);

  const Vec& image_vec(const std::string& id) const;      // MissingEmbeddingError
  const Vec& caption_vec(const std::string& key) const;   // MissingEmbeddingError
  bool has_caption(const std::string& key) const;

  const Vocabulary& vocab() const;

  // Checks every stored invariant: dimensions, finiteness, nonzero norms,
  // canonical caption keys, and presence of every atom and negated atom.
  // Throws ConfigurationError naming the first offending key.
  void validate() const;
};

// Canonical caption key for the negation of an atom ("not ( text )").
std::string neg_key(const Atom& atom);

// α: similarity between the image embedding and the caption embedding of the
// rendered description, under the model's metric.
double alpha(const ClipLikeModel& model, const std::string& image, const Description& d);

// ── serialization ───────────────────────────────────────────────────────────
// File schema:
//   { "dim": int, "metric": "cosine"|"dot"|"negative-euclidean",
//     "atoms": [string...], "images": {id: [float...]},
//     "captions": {canonical-caption-string: [float...]} }

nlohmann::ordered_json model_to_json(const ClipLikeModel& model);
ClipLikeModel model_from_json(const nlohmann::ordered_json& j);  // validates

ClipLikeModel load_model(const std::filesystem::path& path);
void save_model(const ClipLikeModel& model, const std::filesystem::path& path);

}  // namespace cliplogic

#endif  // CLIPLOGIC_MODEL_HPP
