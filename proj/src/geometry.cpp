#include "cliplogic/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cliplogic {

namespace {

void check_dims(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatchError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                 std::to_string(b.size()));
  }
}

void check_finite(const Vec& v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ConfigurationError("vector component is not finite");
  }
}

double checked_norm(const Vec& v) {
  double n = norm(v);
  if (n < kMinNorm) throw ZeroVectorError("cosine is not defined for the zero vector");
  return n;
}

}  // namespace

double dot(const Vec& a, const Vec& b) {
  check_dims(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

double cosine(const Vec& a, const Vec& b) {
  check_dims(a, b);
  double na = checked_norm(a);
  double nb = checked_norm(b);
  double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

Vec cosine_grad(const Vec& a, const Vec& b) {
  check_dims(a, b);
  double na = checked_norm(a);
  double nb = checked_norm(b);
  double d = dot(a, b);
  Vec grad(a.size());
  double inv = 1.0 / (na * nb);
  double proj = d / (na * na * na * nb);
  for (std::size_t i = 0; i < a.size(); ++i) {
    grad[i] = b[i] * inv - a[i] * proj;
  }
  return grad;
}

std::vector<double> softmax(const std::vector<double>& xs) {
  if (xs.empty()) throw ParameterError("softmax of empty sequence");
  check_finite(xs);
  double max = *std::max_element(xs.begin(), xs.end());
  std::vector<double> out(xs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out[i] = std::exp(xs[i] - max);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

bool same_ray(const std::vector<Vec>& points, double tol) {
  if (tol < 0) throw ParameterError("tol must be >= 0");
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (cosine(points[i], points[j]) < 1.0 - tol) return false;
    }
  }
  return true;
}

Ray::Ray(const Vec& direction) {
  double n = checked_norm(direction);
  direction_.resize(direction.size());
  for (std::size_t i = 0; i < direction.size(); ++i) direction_[i] = direction[i] / n;
}

Ray ray_of(const std::vector<Vec>& points, double tol) {
  if (points.empty()) throw NotColinearError("ray_of requires at least one point");
  if (!same_ray(points, tol)) {
    throw NotColinearError("points do not lie on a common ray");
  }
  Vec mean(points[0].size(), 0.0);
  for (const Vec& p : points) {
    double n = checked_norm(p);
    for (std::size_t i = 0; i < p.size(); ++i) mean[i] += p[i] / n;
  }
  for (double& x : mean) x /= static_cast<double>(points.size());
  return Ray(mean);
}

Ray anti(const Ray& r) {
  Vec negated = r.direction();
  for (double& x : negated) x = -x;
  return Ray(negated);
}

}  // namespace cliplogic
