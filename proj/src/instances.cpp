#include "lagot/instances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "lagot/error.hpp"

namespace lagot {
namespace {

Vec unit_k(int dim, double k) {
  Vec v = Vec::zero(dim);
  v[0] = k;
  return v;
}

TorusPoint pt(double x) { return wrap(Vec(x)); }

}  // namespace

LagrangianSpec builtin_spec(std::string_view name, int dim) {
  if (dim < 1 || dim > kMaxDim) throw InvalidInput("dimension must be 1 or 2");
  const Mat a = Mat::identity(dim);
  if (name == "free" || name == "zero") return LagrangianSpec(a, Potential::zero(dim));
  if (name == "pendulum") return LagrangianSpec(a, Potential::cosine(1.0, unit_k(dim, 1.0)));
  if (name == "two_well") return LagrangianSpec(a, Potential::cosine(1.0, unit_k(dim, 2.0)));
  if (name == "traveling")
    return LagrangianSpec(a, Potential::traveling(0.2, unit_k(dim, 1.0), 1.0), 1.0);
  throw InvalidInput("unknown built-in spec '" + std::string(name) + "'");
}

std::vector<std::string> builtin_spec_names() {
  return {"free", "pendulum", "two_well", "traveling"};
}

std::vector<std::string> periodic_spec_names() { return {"pendulum", "two_well", "traveling"}; }

TransportInstance builtin_instance(std::string_view name) {
  if (name == "two_atom")
    return {"two_atom", builtin_spec("free"), DiscreteMeasure::uniform({pt(0.0), pt(0.5)}),
            DiscreteMeasure::uniform({pt(0.1), pt(0.6)}), 1.0, 64};
  if (name == "dirac")
    return {"dirac", builtin_spec("free"), DiscreteMeasure::dirac(pt(0.1)),
            DiscreteMeasure::dirac(pt(0.4)), 1.0, 64};
  if (name == "pushforward") {
    std::vector<TorusPoint> xs, ys;
    for (int i = 0; i < 64; ++i) {
      const double x = i / 64.0;
      xs.push_back(pt(x));
      ys.push_back(pt(x + 0.1 * std::sin(2 * std::numbers::pi * x)));
    }
    return {"pushforward", builtin_spec("free"), DiscreteMeasure::uniform(xs),
            DiscreteMeasure::uniform(ys), 1.0, 64};
  }
  if (name == "pendulum") {
    std::vector<TorusPoint> xs, ys;
    std::vector<double> w;
    for (int k = 0; k < 8; ++k) {
      xs.push_back(pt((k + 0.5) / 8.0));
      ys.push_back(pt(k / 8.0 + 0.2));
      w.push_back(1.0 + k % 3);
    }
    return {"pendulum", builtin_spec("pendulum"), DiscreteMeasure::uniform(xs),
            DiscreteMeasure::normalized(ys, w), 1.0, 128};
  }
  if (name == "identity") {
    auto mu = DiscreteMeasure::uniform(GridSpec(16, 1).nodes());
    return {"identity", builtin_spec("free"), mu, mu, 1.0, 64};
  }
  throw InvalidInput("unknown built-in instance '" + std::string(name) + "'");
}

std::vector<std::string> builtin_instance_names() {
  return {"two_atom", "dirac", "pushforward", "pendulum", "identity"};
}

std::vector<std::size_t> monotone_rearrangement(const DiscreteMeasure& mu0,
                                                const DiscreteMeasure& mu1) {
  const std::size_t n = mu0.size();
  if (mu0.dim() != 1 || mu1.dim() != 1 || mu1.size() != n)
    throw InvalidInput("monotone rearrangement needs two circle measures of equal size");
  auto order = [](const DiscreteMeasure& mu) {
    std::vector<std::size_t> idx(mu.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return mu.atom(a)[0] < mu.atom(b)[0]; });
    return idx;
  };
  const auto ox = order(mu0), oy = order(mu1);
  std::size_t best_shift = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = distance(mu0.atom(ox[i]), mu1.atom(oy[(i + k) % n]));
      c += d * d;
    }
    if (c < best) {
      best = c;
      best_shift = k;
    }
  }
  std::vector<std::size_t> image(n);
  for (std::size_t i = 0; i < n; ++i) image[ox[i]] = oy[(i + best_shift) % n];
  return image;
}

}  // namespace lagot
