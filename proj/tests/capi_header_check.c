/* Compiled as C: the public header must not depend on C++. */
#include "lagot/lagot.h"

int lagot_c_header_check(void) {
  lagot_spec* spec = 0;
  lagot_status s = lagot_spec_builtin("free", 1, &spec);
  if (s != LAGOT_OK) return 1;
  lagot_spec_destroy(spec);
  return lagot_exit_code(LAGOT_ERR_MISSING_DEPENDENCY) == 4 ? 0 : 1;
}
