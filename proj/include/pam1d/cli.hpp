#pragma once

namespace pam1d {

/// Entry point of the pam1d tool. Returns 0 on success, 2 on configuration
/// errors (including bad command lines) and 3 on numerical failures.
int cli_main(int argc, const char* const* argv);

}  // namespace pam1d
