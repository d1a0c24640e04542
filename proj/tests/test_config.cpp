#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lagot/config.hpp"
#include "lagot/instances.hpp"

using namespace lagot;
namespace fs = std::filesystem;

TEST_CASE("defaults and built-in instance") {
  const RunConfig c = parse_config("[problem]\ninstance = two_atom\n", "/tmp/x");
  CHECK(c.instance == "two_atom");
  REQUIRE(c.mu0);
  REQUIRE(c.mu1);
  CHECK(c.mu0->size() == 2);
  CHECK(c.T == 1.0);
  CHECK(c.grid_n == 64);
  CHECK(c.out_dir == fs::path("/tmp/x") / "out");
  CHECK(c.cache_path() == fs::path("/tmp/x") / "out" / "cache");
  CHECK(c.slice_times().size() == 7);
  CHECK(c.slice_times().front() == doctest::Approx(0.125));
  CHECK(c.lipschitz_epsilons() == std::vector<double>{0.125, 0.25, 0.375});
  CHECK(c.seed == 0);
}

TEST_CASE("every section and key") {
  const char* text = R"(
; comment line
[spec]
dim = 1
kinetic = 2
potential = traveling_cosine
amplitude = 0.3
wavevector = 1
speed = 1
time_period = 1

[problem]
T = 2
grid = 32
mu0 = dirac:0.25
mu1 = uniform:4
winding_range = 1
times = 1.5, 0.5 ,1
epsilons = 0.5 0.25
T_values = 1,2,3

[solver]
tolerance = 1e-10   ; tighter
knots_per_unit_time = 128
steps_per_unit_time = 2000
max_newton_iterations = 50
max_descent_iterations = 10
cost_accuracy = 1e-8
mask_slack = 2
random_triples = 0
cache_dir = /tmp/lagot-cache
seed = 18446744073709551615

[output]
directory = results
formats = csv json
)";
  const RunConfig c = parse_config(text, "/base");
  CHECK(c.spec.kinetic()(0, 0) == 2.0);
  CHECK(c.spec.potential().time_dependent());
  CHECK(c.spec.time_period() == 1.0);
  CHECK(c.T == 2.0);
  CHECK(c.grid_n == 32);
  CHECK(c.mu0->size() == 1);
  CHECK(c.mu0->atom(0)[0] == 0.25);
  CHECK(c.mu1->size() == 4);
  CHECK(c.action.winding_range == 1);
  CHECK(c.times == std::vector<double>{0.5, 1.0, 1.5});
  CHECK(c.epsilons == std::vector<double>{0.25, 0.5});
  CHECK(c.T_values == std::vector<int>{1, 2, 3});
  CHECK(c.action.tolerance == 1e-10);
  CHECK(c.action.knots_per_unit_time == 128);
  CHECK(c.steps_per_unit_time == 2000);
  CHECK(c.action.max_newton_iterations == 50);
  CHECK(c.action.max_descent_iterations == 10);
  CHECK(c.cost_accuracy == 1e-8);
  CHECK(c.mask_slack == 2.0);
  CHECK(c.random_triples == 0);
  CHECK(*c.cache_dir == fs::path("/tmp/lagot-cache"));
  CHECK(c.seed == 18446744073709551615ull);
  CHECK(c.out_dir == fs::path("/base/results"));
  CHECK(c.wants("csv"));
  CHECK(!c.wants("dat"));
}

TEST_CASE("explicit keys override the instance") {
  const RunConfig c = parse_config("[problem]\ninstance = pendulum\ngrid = 16\nT = 2\n");
  CHECK(c.grid_n == 16);
  CHECK(c.T == 2.0);
  CHECK(c.spec.potential().name() == "cosine");
  const RunConfig d = parse_config("[spec]\npotential = free\n[problem]\ninstance = pendulum\n");
  CHECK(d.spec.potential().name() == "zero");
}

TEST_CASE("two-dimensional spec") {
  const RunConfig c =
      parse_config("[spec]\ndim = 2\nkinetic = 2 0.5 0.5 1\npotential = cosine\nwavevector = 1 1\n"
                   "[problem]\nmu0 = dirac:0.1:0.2\n");
  CHECK(c.spec.dim() == 2);
  CHECK(c.spec.kinetic()(0, 1) == 0.5);
  CHECK(c.mu0->dim() == 2);
}

TEST_CASE("measure files resolve against the config directory") {
  const fs::path dir = fs::temp_directory_path() / "lagot_test_config";
  fs::create_directories(dir);
  std::ofstream(dir / "mu.csv") << "x1,weight\n0.1,1\n0.6,3\n";
  std::ofstream(dir / "run.ini") << "[problem]\nmu0 = mu.csv\nmu1 = mu.csv\n";
  const RunConfig c = load_config(dir / "run.ini");
  REQUIRE(c.mu0);
  CHECK(c.mu0->weight(1) == doctest::Approx(0.75));
  CHECK(c.out_dir == dir / "out");
}

TEST_CASE("configuration errors") {
  auto bad = [](const char* text) { CHECK_THROWS_AS(parse_config(text), ConfigError); };
  bad("[spec]\npotential = nope\n");
  bad("[nosuch]\nx = 1\n");
  bad("[spec]\nunknown = 1\n");
  bad("[problem]\nT = -1\n");
  bad("[problem]\nT = abc\n");
  bad("[problem]\ngrid = 1\n");
  bad("[problem]\ngrid = 2.5\n");
  bad("[problem]\ninstance = nope\n");
  bad("[problem]\nmu0 = missing_file.csv\n");
  bad("[problem]\nmu0 = dirac:\n");
  bad("[problem]\ntimes = 0, 0.5\n");
  bad("[problem]\nT_values = 1.5\n");
  bad("[solver]\ntolerance = 0\n");
  bad("[solver]\nmask_slack = -1\n");
  bad("[solver]\nseed = -3\n");
  bad("[spec]\nkinetic = -1\n");
  bad("[spec]\ndim = 3\n");
  bad("[spec]\ndim = 2\n[problem]\nmu0 = dirac:0.5\n");
  bad("[output]\nformats = pdf\n");
  bad("[spec]\npotential = free\npotential = pendulum\n");
  bad("[spec\n");
  CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), ConfigError);
}

TEST_CASE("built-in specs and instances") {
  for (const auto& n : builtin_spec_names()) CHECK_NOTHROW(builtin_spec(n));
  for (const auto& n : builtin_instance_names()) {
    const TransportInstance in = builtin_instance(n);
    CHECK(in.name == n);
    CHECK(in.mu0.dim() == 1);
  }
  CHECK(builtin_spec("traveling").time_period() == 1.0);
  CHECK(builtin_instance("pendulum").grid_n == 128);
  CHECK(builtin_instance("pendulum").mu1.weight(2) == doctest::Approx(3.0 / 15.0));
  CHECK_THROWS_AS(builtin_spec("nope"), InvalidInput);
  CHECK_THROWS_AS(builtin_instance("nope"), InvalidInput);
}

TEST_CASE("monotone rearrangement oracle") {
  // Cyclic shift by one: sorted sources to sorted targets shifted.
  const auto mu0 = DiscreteMeasure::uniform({wrap(Vec(0.0)), wrap(Vec(0.25)), wrap(Vec(0.5)), wrap(Vec(0.75))});
  const auto mu1 = DiscreteMeasure::uniform({wrap(Vec(0.55)), wrap(Vec(0.05)), wrap(Vec(0.8)), wrap(Vec(0.3))});
  const auto img = monotone_rearrangement(mu0, mu1);
  CHECK(img == std::vector<std::size_t>{1, 3, 0, 2});
  // Small rotations either way; x - 0.1 wraps 0 to 0.9.
  const auto r1 = DiscreteMeasure::uniform({wrap(Vec(0.1)), wrap(Vec(0.35)), wrap(Vec(0.6)), wrap(Vec(0.85))});
  CHECK(monotone_rearrangement(mu0, r1) == std::vector<std::size_t>{0, 1, 2, 3});
  const auto r2 = DiscreteMeasure::uniform({wrap(Vec(0.9)), wrap(Vec(0.15)), wrap(Vec(0.4)), wrap(Vec(0.65))});
  CHECK(monotone_rearrangement(mu0, r2) == std::vector<std::size_t>{0, 1, 2, 3});
  // Rotating by 0.2 with spacing 0.25 is cheaper as a shift back by 0.05.
  const auto r3 = DiscreteMeasure::uniform({wrap(Vec(0.2)), wrap(Vec(0.45)), wrap(Vec(0.7)), wrap(Vec(0.95))});
  CHECK(monotone_rearrangement(mu0, r3) == std::vector<std::size_t>{3, 0, 1, 2});
}
