#ifndef CLIPLOGIC_GEOMETRY_HPP
#define CLIPLOGIC_GEOMETRY_HPP

// Latent-space primitives: cosine similarity and its gradient, stable
// softmax, and ray / anti-ray machinery.

#include <vector>

#include "cliplogic/errors.hpp"

namespace cliplogic {

using Vec = std::vector<double>;

// Norms below this are treated as the zero vector and rejected wherever
// cosine is involved (cosine is undefined at the origin).
inline constexpr double kMinNorm = 1e-12;

double dot(const Vec& a, const Vec& b);        // DimensionMismatchError
double norm(const Vec& v);

// Cosine similarity, clamped to [-1, 1] against floating-point overshoot.
// Throws ZeroVectorError if either argument has norm < kMinNorm.
double cosine(const Vec& a, const Vec& b);

// Gradient of cosine(a, b) with respect to a:
//   b / (|a||b|)  -  (a.b) a / (|a|^3 |b|)
Vec cosine_grad(const Vec& a, const Vec& b);

// Numerically stable softmax (max-subtraction); components sum to 1.
std::vector<double> softmax(const std::vector<double>& xs);

// True iff every pairwise cosine between the points is >= 1 - tol.
// A single point is trivially on its own ray.
bool same_ray(const std::vector<Vec>& points, double tol = 1e-9);

// A ray through the origin, identified by its unit direction.
class Ray {
 public:
  explicit Ray(const Vec& direction);  // normalizes; ZeroVectorError at origin

  const Vec& direction() const noexcept { return direction_; }

 private:
  Vec direction_;
};

// Ray through the normalized mean direction of the points; requires
// same_ray(points, tol) (NotColinearError otherwise).
Ray ray_of(const std::vector<Vec>& points, double tol = 1e-9);

// The reflection of r through the origin.  anti(anti(r)) == r.
Ray anti(const Ray& r);

}  // namespace cliplogic

#endif  // CLIPLOGIC_GEOMETRY_HPP
