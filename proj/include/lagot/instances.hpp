#pragma once

// Named specs and transport problems used by the CLI and the acceptance
// suite. Everything here is on the circle unless a dimension is given.

#include <string>
#include <string_view>
#include <vector>

#include "lagot/dynamics.hpp"
#include "lagot/kantorovich.hpp"

namespace lagot {

// "free" (V = 0), "pendulum" (cos 2 pi x), "two_well" (cos 4 pi x) and
// "traveling" (0.2 cos 2 pi (x - t), period 1). Unit kinetic matrix.
LagrangianSpec builtin_spec(std::string_view name, int dim = 1);
std::vector<std::string> builtin_spec_names();

// The time-periodic built-ins, in the order pendulum, two_well, traveling.
std::vector<std::string> periodic_spec_names();

struct TransportInstance {
  std::string name;
  LagrangianSpec spec;
  DiscreteMeasure mu0;
  DiscreteMeasure mu1;
  double T = 1.0;
  int grid_n = 64;  // resolution of the Hamilton-Jacobi grid
};

//   two_atom     free, (d0 + d0.5)/2 -> (d0.1 + d0.6)/2
//   dirac        free, d0.1 -> d0.4
//   pushforward  free, uniform on 64 nodes -> x + 0.1 sin 2 pi x
//   pendulum     8 atoms at (k + 1/2)/8 -> k/8 + 0.2 with weights 1 + k % 3
//   identity     free, uniform on 16 nodes to itself
TransportInstance builtin_instance(std::string_view name);
std::vector<std::string> builtin_instance_names();

// Monotone rearrangement on the circle for two uniform measures with the same
// number of atoms: sorts both sides and picks the cyclic shift of least
// quadratic cost. Returns the target index of each source atom.
std::vector<std::size_t> monotone_rearrangement(const DiscreteMeasure& mu0,
                                                const DiscreteMeasure& mu1);

}  // namespace lagot
