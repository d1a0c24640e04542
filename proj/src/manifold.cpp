#include "lagot/manifold.hpp"

#include <algorithm>
#include <string>

#include "lagot/error.hpp"

namespace lagot {

Vec Vec::from(std::span<const double> xs) {
  if (xs.empty() || xs.size() > static_cast<std::size_t>(kMaxDim))
    throw InvalidInput("vector dimension must be 1 or 2, got " +
                       std::to_string(xs.size()));
  Vec v = Vec::zero(static_cast<int>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) v.c[i] = xs[i];
  return v;
}

TorusPoint wrap(const Vec& raw) {
  if (raw.dim < 1 || raw.dim > kMaxDim)
    throw InvalidInput("torus dimension must be 1 or 2");
  if (!raw.finite()) throw InvalidInput("cannot wrap a non-finite coordinate");
  Vec w = raw;
  for (int i = 0; i < w.dim; ++i) {
    double r = w[i] - std::floor(w[i]);
    // floor() can round x - floor(x) up to exactly 1 for tiny negatives.
    if (r >= 1.0) r = 0.0;
    w[i] = r;
  }
  return TorusPoint(w);
}

TorusPoint wrap(std::span<const double> raw) { return wrap(Vec::from(raw)); }

TangentVec displacement(const TorusPoint& x, const TorusPoint& y,
                        const Winding& winding) {
  return {y.coords() + winding.as_vec() - x.coords()};
}

Vec minimal_lift(const TorusPoint& x, const TorusPoint& y) {
  Vec d = y.coords() - x.coords();
  for (int i = 0; i < d.dim; ++i) d[i] -= std::round(d[i]);
  return d;
}

double distance(const TorusPoint& x, const TorusPoint& y) {
  return minimal_lift(x, y).norm();
}

std::vector<Winding> windings_in_range(int dim, int range) {
  std::vector<Winding> out;
  Winding w;
  w.dim = dim;
  if (dim == 1) {
    for (int a = -range; a <= range; ++a) {
      w.k = {a, 0};
      out.push_back(w);
    }
  } else {
    for (int a = -range; a <= range; ++a)
      for (int b = -range; b <= range; ++b) {
        w.k = {a, b};
        out.push_back(w);
      }
  }
  return out;
}

GridSpec::GridSpec(int n_per_axis, int dim) : n_(n_per_axis), dim_(dim) {
  if (n_per_axis < 2)
    throw InvalidInput("grid needs at least 2 nodes per axis");
  if (dim < 1 || dim > kMaxDim)
    throw InvalidInput("grid dimension must be 1 or 2");
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int i = 0; i < dim_; ++i) s *= static_cast<std::size_t>(n_);
  return s;
}

TorusPoint GridSpec::node(std::size_t index) const {
  const auto n = static_cast<std::size_t>(n_);
  if (dim_ == 1) return wrap(Vec(static_cast<double>(index) / n_));
  return wrap(Vec(static_cast<double>(index / n) / n_,
                  static_cast<double>(index % n) / n_));
}

std::vector<TorusPoint> GridSpec::nodes() const {
  std::vector<TorusPoint> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(node(i));
  return out;
}

std::size_t GridSpec::nearest(const TorusPoint& x) const {
  const auto n = static_cast<std::size_t>(n_);
  auto axis_index = [&](double c) {
    auto k = static_cast<long long>(std::llround(c * n_));
    return static_cast<std::size_t>(((k % n_) + n_) % n_);
  };
  if (dim_ == 1) return axis_index(x[0]);
  return axis_index(x[0]) * n + axis_index(x[1]);
}

std::size_t GridSpec::neighbor(std::size_t index, int axis, int step) const {
  const auto n = static_cast<long long>(n_);
  auto shift = [&](long long k) { return ((k + step) % n + n) % n; };
  if (dim_ == 1) return static_cast<std::size_t>(shift(static_cast<long long>(index)));
  long long a = static_cast<long long>(index) / n;
  long long b = static_cast<long long>(index) % n;
  if (axis == 0)
    a = shift(a);
  else
    b = shift(b);
  return static_cast<std::size_t>(a * n + b);
}

}  // namespace lagot
