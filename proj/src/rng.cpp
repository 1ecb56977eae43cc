#include "pam1d/rng.hpp"

namespace pam1d {

static_assert(mix64(0) != mix64(1));
static_assert(to_unit_open(0) > 0.0 && to_unit_open(~0ULL) < 1.0);

}  // namespace pam1d
