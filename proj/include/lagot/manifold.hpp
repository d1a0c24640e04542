#pragma once

// Flat torus T^d = R^d / Z^d, d in {1, 2}, with unit side lengths.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace lagot {

inline constexpr int kMaxDim = 2;

// Small dense vector of runtime dimension 1 or 2. Used for lifted positions
// in the universal cover and as the storage of the strong types below.
struct Vec {
  std::array<double, kMaxDim> c{};
  int dim = 1;

  Vec() = default;
  explicit Vec(double x) : c{x, 0.0}, dim(1) {}
  Vec(double x, double y) : c{x, y}, dim(2) {}
  static Vec zero(int d) {
    Vec v;
    v.dim = d;
    return v;
  }
  static Vec from(std::span<const double> xs);

  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < dim; ++i) c[i] += o.c[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < dim; ++i) c[i] -= o.c[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < dim; ++i) c[i] *= s;
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator-(Vec a) { return a *= -1.0; }
  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i)
      if (a.c[i] != b.c[i]) return false;
    return true;
  }

  double dot(const Vec& o) const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += c[i] * o.c[i];
    return s;
  }
  double norm() const { return std::sqrt(dot(*this)); }
  double norm_inf() const {
    double m = 0.0;
    for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(c[i]));
    return m;
  }
  bool finite() const {
    for (int i = 0; i < dim; ++i)
      if (!std::isfinite(c[i])) return false;
    return true;
  }
};

// Integer displacement in the universal cover indexing a homotopy class of
// paths between two torus points.
struct Winding {
  std::array<int, kMaxDim> k{};
  int dim = 1;

  Vec as_vec() const {
    Vec v = Vec::zero(dim);
    for (int i = 0; i < dim; ++i) v[i] = k[static_cast<std::size_t>(i)];
    return v;
  }
  friend bool operator==(const Winding&, const Winding&) = default;
  // Lexicographic order, used to break ties between classes.
  friend bool operator<(const Winding& a, const Winding& b) {
    for (int i = 0; i < a.dim; ++i) {
      if (a.k[i] != b.k[i]) return a.k[i] < b.k[i];
    }
    return false;
  }
};

// A point of the torus; every coordinate lies in [0, 1). Only constructible
// through wrap().
class TorusPoint {
 public:
  TorusPoint() = default;
  int dim() const { return coords_.dim; }
  double operator[](int i) const { return coords_[i]; }
  const Vec& coords() const { return coords_; }

  friend bool operator==(const TorusPoint& a, const TorusPoint& b) {
    return a.coords_ == b.coords_;
  }

 private:
  friend TorusPoint wrap(const Vec& raw);
  explicit TorusPoint(const Vec& v) : coords_(v) {}
  Vec coords_ = Vec::zero(1);
};

struct TangentVec {
  Vec v;
};

struct Covec {
  Vec p;
};

// Reduces every coordinate mod 1 into [0, 1). Throws InvalidInput on
// non-finite input.
TorusPoint wrap(const Vec& raw);
TorusPoint wrap(std::span<const double> raw);

// (y + winding) - x in the universal cover.
TangentVec displacement(const TorusPoint& x, const TorusPoint& y,
                        const Winding& winding);

// Shortest-way-around difference y - x, each coordinate in [-1/2, 1/2].
Vec minimal_lift(const TorusPoint& x, const TorusPoint& y);

// Flat geodesic distance.
double distance(const TorusPoint& x, const TorusPoint& y);

// All windings with every component in [-range, range], in lexicographic
// order.
std::vector<Winding> windings_in_range(int dim, int range);

// Uniform grid with nodes at i / n_per_axis on each axis; nodes are numbered
// with the first axis varying slowest.
class GridSpec {
 public:
  GridSpec(int n_per_axis, int dim);

  int n_per_axis() const { return n_; }
  int dim() const { return dim_; }
  double spacing() const { return 1.0 / n_; }
  std::size_t size() const;

  TorusPoint node(std::size_t index) const;
  std::vector<TorusPoint> nodes() const;
  std::size_t nearest(const TorusPoint& x) const;
  // Index of the node shifted by `step` cells along `axis`, wrapping around.
  std::size_t neighbor(std::size_t index, int axis, int step) const;

 private:
  int n_;
  int dim_;
};

}  // namespace lagot
