#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sgdlab {

// Dense parameter / gradient vector. Entries are IEEE doubles; every public
// helper assumes (and preserves) finite entries.
using Vec = std::vector<double>;

inline void require_same_dim(const Vec& a, const Vec& b, const char* where) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
}

inline double dot(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

inline Vec add(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "add");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "sub");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scale(const Vec& a, double s) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

// y += s * x
inline void axpy(Vec& y, double s, const Vec& x) {
  require_same_dim(y, x, "axpy");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

inline bool all_finite(const Vec& a) {
  for (double x : a) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// Clamp every entry to [-halfwidth, halfwidth]. Returns true if any entry moved.
inline bool clamp_box(Vec& a, double halfwidth) {
  bool moved = false;
  for (double& x : a) {
    if (x > halfwidth) {
      x = halfwidth;
      moved = true;
    } else if (x < -halfwidth) {
      x = -halfwidth;
      moved = true;
    }
  }
  return moved;
}

}  // namespace sgdlab
