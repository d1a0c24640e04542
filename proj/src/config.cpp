#include "lagot/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "lagot/error.hpp"
#include "lagot/instances.hpp"

namespace lagot {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"spec",
       {"kinetic", "potential", "amplitude", "wavevector", "speed", "amplitude2", "wavevector2",
        "time_period", "dim"}},
      {"problem",
       {"instance", "T", "grid", "mu0", "mu1", "winding_range", "times", "epsilons", "T_values"}},
      {"solver",
       {"tolerance", "knots_per_unit_time", "steps_per_unit_time", "max_newton_iterations",
        "max_descent_iterations", "cost_accuracy", "mask_slack", "random_triples", "cache_dir",
        "seed"}},
      {"output", {"directory", "formats"}},
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Values may carry a trailing "; comment" or "# comment".
std::string strip_comment(const std::string& v) {
  const auto c = v.find_first_of(";#");
  return trim(c == std::string::npos ? v : v.substr(0, c));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : v) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  std::optional<std::string> raw(const std::string& key) const {
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return strip_comment(*v);
  }

  double number(const std::string& key, double fallback) const {
    const auto v = raw(key);
    return v ? parse_double(key, *v) : fallback;
  }

  long integer(const std::string& key, long fallback) const {
    const auto v = raw(key);
    if (!v) return fallback;
    long out = 0;
    const auto r = std::from_chars(v->data(), v->data() + v->size(), out);
    if (r.ec != std::errc() || r.ptr != v->data() + v->size()) fail(key, *v, "an integer");
    return out;
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    if (const auto v = raw(key))
      for (const auto& item : split_list(*v)) out.push_back(parse_double(key, item));
    return out;
  }

  double parse_double(const std::string& key, const std::string& v) const {
    std::size_t used = 0;
    double out = 0.0;
    try {
      out = std::stod(v, &used);
    } catch (const std::exception&) {
      fail(key, v, "a number");
    }
    if (used != v.size() || !std::isfinite(out)) fail(key, v, "a finite number");
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& v, const char* what) const {
    throw ConfigError("[" + name_ + "] " + key + " = '" + v + "' is not " + what);
  }

 private:
  std::string name_;
  const pt::ptree* tree_;
};

Vec vec_of(const Section& s, const std::string& key, int dim, double fallback_first) {
  Vec v = Vec::zero(dim);
  v[0] = fallback_first;
  const auto xs = s.numbers(key);
  if (xs.empty()) return v;
  if (static_cast<int>(xs.size()) != dim)
    throw ConfigError("[spec] " + key + " needs " + std::to_string(dim) + " components");
  for (int i = 0; i < dim; ++i) v[i] = xs[static_cast<std::size_t>(i)];
  return v;
}

Mat kinetic_of(const Section& s, int dim) {
  const auto xs = s.numbers("kinetic");
  if (xs.empty()) return Mat::identity(dim);
  Mat a = Mat::identity(dim);
  if (static_cast<int>(xs.size()) == dim) {
    for (int i = 0; i < dim; ++i) a(i, i) = xs[static_cast<std::size_t>(i)];
  } else if (dim == 2 && xs.size() == 4) {
    for (int i = 0; i < 4; ++i) a.a[static_cast<std::size_t>(i)] = xs[static_cast<std::size_t>(i)];
  } else {
    throw ConfigError("[spec] kinetic needs the diagonal or, in 2-D, all four entries");
  }
  return a;
}

LagrangianSpec spec_of(const Section& s, int dim) {
  const std::string name = s.raw("potential").value_or("zero");
  std::optional<double> period;
  if (const auto p = s.raw("time_period")) {
    if (*p != "none") period = s.parse_double("time_period", *p);
  }
  const Mat a = kinetic_of(s, dim);
  const double amp = s.number("amplitude", 1.0);
  Potential pot = Potential::zero(dim);
  if (name == "zero" || name == "free") {
    pot = Potential::zero(dim);
  } else if (name == "cosine") {
    pot = Potential::cosine(amp, vec_of(s, "wavevector", dim, 1.0));
  } else if (name == "pendulum" || name == "two_well" || name == "traveling") {
    const LagrangianSpec b = builtin_spec(name, dim);
    pot = b.potential();
    if (!period) period = b.time_period();
  } else if (name == "two_mode") {
    pot = Potential::two_mode(amp, vec_of(s, "wavevector", dim, 1.0), s.number("amplitude2", 0.0),
                              vec_of(s, "wavevector2", dim, 2.0));
  } else if (name == "traveling_cosine") {
    pot = Potential::traveling(amp, vec_of(s, "wavevector", dim, 1.0), s.number("speed", 1.0));
  } else {
    throw ConfigError("[spec] potential '" + name + "' is not a built-in");
  }
  try {
    return LagrangianSpec(a, std::move(pot), period);
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("[spec] ") + e.what());
  }
}

}  // namespace

std::vector<double> RunConfig::slice_times() const {
  if (!times.empty()) return times;
  std::vector<double> out;
  for (int k = 1; k < 8; ++k) out.push_back(k * T / 8.0);
  return out;
}

std::vector<double> RunConfig::lipschitz_epsilons() const {
  if (!epsilons.empty()) return epsilons;
  return {T / 8.0, T / 4.0, 3.0 * T / 8.0};
}

std::filesystem::path RunConfig::cache_path() const {
  return cache_dir ? *cache_dir : out_dir / "cache";
}

bool RunConfig::wants(std::string_view format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

DiscreteMeasure resolve_measure(std::string_view value, const std::filesystem::path& base_dir) {
  const std::string v = trim(value);
  auto parts = [&](std::size_t from) {
    std::vector<double> xs;
    std::stringstream ss(v.substr(from));
    std::string item;
    while (std::getline(ss, item, ':')) {
      try {
        std::size_t used = 0;
        xs.push_back(std::stod(item, &used));
        if (used != item.size()) throw ConfigError("");
      } catch (const std::exception&) {
        throw ConfigError("bad measure '" + v + "'");
      }
    }
    return xs;
  };
  if (v.rfind("dirac:", 0) == 0) {
    const auto xs = parts(6);
    if (xs.empty() || xs.size() > 2) throw ConfigError("bad measure '" + v + "'");
    return DiscreteMeasure::dirac(wrap(std::span<const double>(xs)));
  }
  if (v.rfind("uniform:", 0) == 0) {
    const auto xs = parts(8);
    if (xs.empty() || xs.size() > 2 || xs[0] < 1 || xs[0] != std::floor(xs[0]))
      throw ConfigError("bad measure '" + v + "'");
    const int dim = xs.size() == 2 ? static_cast<int>(xs[1]) : 1;
    if (dim < 1 || dim > 2) throw ConfigError("bad measure '" + v + "'");
    return DiscreteMeasure::uniform(GridSpec(static_cast<int>(xs[0]), dim).nodes());
  }
  std::filesystem::path p(v);
  if (p.is_relative()) p = base_dir / p;
  if (!std::filesystem::exists(p)) throw ConfigError("measure file " + p.string() + " not found");
  try {
    return load_measure_csv(p);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (body.empty()) throw ConfigError("key '" + section + "' outside a section");
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) throw ConfigError("unknown key [" + section + "] " + key);
  }
  auto section = [&](const char* name) {
    return Section(name, tree.get_child_optional(name).get_ptr());
  };
  const Section spec = section("spec"), problem = section("problem"), solver = section("solver"),
                output = section("output");

  RunConfig c;
  c.base_dir = base_dir;

  const int dim = static_cast<int>(spec.integer("dim", 1));
  if (dim < 1 || dim > 2) throw ConfigError("[spec] dim must be 1 or 2");

  if (const auto inst = problem.raw("instance")) {
    try {
      TransportInstance in = builtin_instance(*inst);
      c.instance = in.name;
      c.spec = in.spec;
      c.mu0 = in.mu0;
      c.mu1 = in.mu1;
      c.T = in.T;
      c.grid_n = in.grid_n;
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("[problem] ") + e.what());
    }
  }
  if (spec.raw("potential") || spec.raw("kinetic") || spec.raw("time_period") || c.instance.empty())
    c.spec = spec_of(spec, dim);

  c.T = problem.number("T", c.T);
  if (!(c.T > 0.0)) throw ConfigError("[problem] T must be positive");
  c.grid_n = static_cast<int>(problem.integer("grid", c.grid_n));
  if (c.grid_n < 2) throw ConfigError("[problem] grid must be at least 2");
  if (const auto m = problem.raw("mu0")) c.mu0 = resolve_measure(*m, base_dir);
  if (const auto m = problem.raw("mu1")) c.mu1 = resolve_measure(*m, base_dir);
  for (const auto* mu : {&c.mu0, &c.mu1})
    if (*mu && (*mu)->dim() != c.spec.dim())
      throw ConfigError("measure dimension does not match the spec");
  c.action.winding_range = static_cast<int>(problem.integer("winding_range", c.action.winding_range));
  if (c.action.winding_range < 0) throw ConfigError("[problem] winding_range must be >= 0");
  c.times = problem.numbers("times");
  for (double t : c.times)
    if (!(t > 0.0 && t < c.T)) throw ConfigError("[problem] times must lie in (0, T)");
  std::sort(c.times.begin(), c.times.end());
  c.epsilons = problem.numbers("epsilons");
  std::sort(c.epsilons.begin(), c.epsilons.end());
  for (double e : c.epsilons)
    if (!(e > 0.0)) throw ConfigError("[problem] epsilons must be positive");
  if (problem.raw("T_values")) {
    c.T_values.clear();
    for (double t : problem.numbers("T_values")) {
      if (t < 1 || t != std::floor(t)) throw ConfigError("[problem] T_values must be positive integers");
      c.T_values.push_back(static_cast<int>(t));
    }
  }

  c.action.tolerance = solver.number("tolerance", c.action.tolerance);
  c.action.knots_per_unit_time =
      static_cast<int>(solver.integer("knots_per_unit_time", c.action.knots_per_unit_time));
  c.action.max_newton_iterations =
      static_cast<int>(solver.integer("max_newton_iterations", c.action.max_newton_iterations));
  c.action.max_descent_iterations =
      static_cast<int>(solver.integer("max_descent_iterations", c.action.max_descent_iterations));
  c.steps_per_unit_time = static_cast<int>(solver.integer("steps_per_unit_time", c.steps_per_unit_time));
  c.cost_accuracy = solver.number("cost_accuracy", c.cost_accuracy);
  c.mask_slack = solver.number("mask_slack", c.mask_slack);
  c.random_triples = static_cast<int>(solver.integer("random_triples", c.random_triples));
  if (!(c.action.tolerance > 0.0) || !(c.cost_accuracy > 0.0) || !(c.mask_slack > 0.0))
    throw ConfigError("[solver] tolerances must be positive");
  if (c.action.knots_per_unit_time < 1 || c.steps_per_unit_time < 1 ||
      c.action.max_newton_iterations < 1 || c.action.max_descent_iterations < 0 ||
      c.random_triples < 0)
    throw ConfigError("[solver] step and iteration counts must be positive");
  if (const auto d = solver.raw("cache_dir")) {
    std::filesystem::path p(*d);
    c.cache_dir = p.is_relative() ? base_dir / p : p;
  }
  if (const auto s = solver.raw("seed")) {
    std::uint64_t seed = 0;
    const auto r = std::from_chars(s->data(), s->data() + s->size(), seed);
    if (r.ec != std::errc() || r.ptr != s->data() + s->size())
      throw ConfigError("[solver] seed must be an unsigned 64-bit integer");
    c.seed = seed;
  }

  if (const auto d = output.raw("directory")) {
    std::filesystem::path p(*d);
    c.out_dir = p.is_relative() ? base_dir / p : p;
  } else {
    c.out_dir = base_dir / "out";
  }
  if (const auto f = output.raw("formats")) {
    c.formats = split_list(*f);
    for (const auto& fmt : c.formats)
      if (fmt != "csv" && fmt != "json" && fmt != "dat")
        throw ConfigError("[output] unknown format '" + fmt + "'");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace lagot
