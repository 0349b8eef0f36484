#include "cliplogic/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace cliplogic {

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::Cosine: return "cosine";
    case Metric::Dot: return "dot";
    case Metric::NegativeEuclidean: return "negative-euclidean";
  }
  throw InternalError("unreachable metric");
}

Metric metric_from_name(const std::string& name) {
  if (name == "cosine") return Metric::Cosine;
  if (name == "dot") return Metric::Dot;
  if (name == "negative-euclidean") return Metric::NegativeEuclidean;
  throw ParameterError("unknown metric \"" + name +
                       "\" (expected cosine, dot, or negative-euclidean)");
}

double similarity(Metric m, const Vec& a, const Vec& b) {
  switch (m) {
    case Metric::Cosine:
      return cosine(a, b);
    case Metric::Dot:
      return dot(a, b);
    case Metric::NegativeEuclidean: {
      if (a.size() != b.size()) {
        throw DimensionMismatchError("dimension mismatch: " + std::to_string(a.size()) +
                                     " vs " + std::to_string(b.size()));
      }
      double sum = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        sum += d * d;
      }
      return -std::sqrt(sum);
    }
  }
  throw InternalError("unreachable metric");
}

Vec similarity_grad(Metric m, const Vec& a, const Vec& b) {
  switch (m) {
    case Metric::Cosine:
      return cosine_grad(a, b);
    case Metric::Dot:
      return b;
    case Metric::NegativeEuclidean: {
      double dist = -similarity(m, a, b);
      Vec grad(a.size(), 0.0);
      if (dist < kMinNorm) return grad;  // kink at a == b; a.e. statement
      for (std::size_t i = 0; i < a.size(); ++i) {
        grad[i] = -(a[i] - b[i]) / dist;
      }
      return grad;
    }
  }
  throw InternalError("unreachable metric");
}

// ── ClipLikeModel ───────────────────────────────────────────────────────────

void ClipLikeModel::add_image(const std::string& id, Vec v) {
  if (image_embeddings.count(id)) {
    throw ConfigurationError("duplicate image id: \"" + id + "\"");
  }
  image_order.push_back(id);
  image_embeddings.emplace(id, std::move(v));
}

void ClipLikeModel::add_caption(const std::string& key, Vec v) {
  if (caption_embeddings.count(key)) {
    throw ConfigurationError("duplicate caption key: \"" + key + "\"");
  }
  caption_order.push_back(key);
  caption_embeddings.emplace(key, std::move(v));
}

const Vec& ClipLikeModel::image_vec(const std::string& id) const {
  auto it = image_embeddings.find(id);
  if (it == image_embeddings.end()) throw MissingEmbeddingError("image", id);
  return it->second;
}

const Vec& ClipLikeModel::caption_vec(const std::string& key) const {
  auto it = caption_embeddings.find(key);
  if (it == caption_embeddings.end()) throw MissingEmbeddingError("caption", key);
  return it->second;
}

bool ClipLikeModel::has_caption(const std::string& key) const {
  return caption_embeddings.count(key) > 0;
}

const Vocabulary& ClipLikeModel::vocab() const {
  if (!vocabulary) throw ConfigurationError("model has no vocabulary");
  return *vocabulary;
}

namespace {

void validate_vector(const ClipLikeModel& model, const std::string& what,
                     const std::string& key, const Vec& v) {
  if (static_cast<int>(v.size()) != model.dim) {
    throw ConfigurationError(what + " \"" + key + "\" has dimension " +
                             std::to_string(v.size()) + ", expected " +
                             std::to_string(model.dim));
  }
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw ConfigurationError(what + " \"" + key + "\" has a non-finite component");
    }
  }
  if (norm(v) < kMinNorm) {
    throw ConfigurationError(what + " \"" + key + "\" is the zero vector");
  }
}

}  // namespace

void ClipLikeModel::validate() const {
  if (dim < 1) throw ConfigurationError("dim must be >= 1");
  const Vocabulary& v = vocab();  // throws when absent; ctor enforces nonempty
  for (const std::string& id : image_order) {
    validate_vector(*this, "image", id, image_vec(id));
  }
  for (const std::string& key : caption_order) {
    validate_vector(*this, "caption", key, caption_vec(key));
    Description parsed = parse(key);
    if (render(parsed) != key) {
      throw ConfigurationError("caption key is not in canonical form: \"" + key + "\"");
    }
  }
  for (const Atom& a : v.atoms()) {
    if (!has_caption(a.text())) {
      throw ConfigurationError("caption table is missing atom: \"" + a.text() + "\"");
    }
    if (!has_caption(neg_key(a))) {
      throw ConfigurationError("caption table is missing negated atom: \"" + neg_key(a) + "\"");
    }
  }
}

std::string neg_key(const Atom& atom) {
  return render(combine_neg(Description::make_atom(atom)));
}

double alpha(const ClipLikeModel& model, const std::string& image, const Description& d) {
  const Vec& img = model.image_vec(image);
  const Vec& cap = model.caption_vec(render(d));
  return similarity(model.metric, img, cap);
}

// ── serialization ───────────────────────────────────────────────────────────

nlohmann::ordered_json model_to_json(const ClipLikeModel& model) {
  nlohmann::ordered_json j;
  j["dim"] = model.dim;
  j["metric"] = metric_name(model.metric);
  nlohmann::ordered_json atoms = nlohmann::ordered_json::array();
  for (const Atom& a : model.vocab().atoms()) atoms.push_back(a.text());
  j["atoms"] = std::move(atoms);
  nlohmann::ordered_json images = nlohmann::ordered_json::object();
  for (const std::string& id : model.image_order) images[id] = model.image_vec(id);
  j["images"] = std::move(images);
  nlohmann::ordered_json captions = nlohmann::ordered_json::object();
  for (const std::string& key : model.caption_order) captions[key] = model.caption_vec(key);
  j["captions"] = std::move(captions);
  return j;
}

namespace {

Vec vec_from_json(const nlohmann::ordered_json& j, const std::string& key) {
  if (!j.is_array()) {
    throw ConfigurationError("embedding \"" + key + "\" must be an array of numbers");
  }
  Vec v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) {
      throw ConfigurationError("embedding \"" + key + "\" must be an array of numbers");
    }
    v.push_back(x.get<double>());
  }
  return v;
}

}  // namespace

ClipLikeModel model_from_json(const nlohmann::ordered_json& j) {
  ClipLikeModel model;
  if (!j.is_object()) throw ConfigurationError("model file must be a JSON object");
  for (const char* field : {"dim", "metric", "atoms", "images", "captions"}) {
    if (!j.contains(field)) {
      throw ConfigurationError(std::string("model file is missing field \"") + field + "\"");
    }
  }
  if (!j["dim"].is_number_integer()) throw ConfigurationError("\"dim\" must be an integer");
  model.dim = j["dim"].get<int>();
  model.metric = metric_from_name(j["metric"].get<std::string>());

  std::vector<Atom> atoms;
  for (const auto& a : j["atoms"]) atoms.emplace_back(a.get<std::string>());
  model.vocabulary = Vocabulary(std::move(atoms));

  for (auto it = j["images"].begin(); it != j["images"].end(); ++it) {
    model.add_image(it.key(), vec_from_json(it.value(), it.key()));
  }
  for (auto it = j["captions"].begin(); it != j["captions"].end(); ++it) {
    model.add_caption(it.key(), vec_from_json(it.value(), it.key()));
  }
  model.validate();
  return model;
}

ClipLikeModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path.string());
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError("malformed JSON in " + path.string() + ": " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const ParameterError& e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  }
}

void save_model(const ClipLikeModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file: " + path.string());
  out << model_to_json(model).dump(2) << '\n';
}

}  // namespace cliplogic
