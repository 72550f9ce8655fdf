#pragma once

#include <iosfwd>

namespace adaptive_rd {

// Exit codes: 0 success, 1 runtime failure, 2 configuration or input error.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace adaptive_rd
