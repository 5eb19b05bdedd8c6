#pragma once

#include <spdlog/spdlog.h>

namespace softtree {

// Configures the library logger from the SOFTTREE_LOG environment variable
// (error|info|debug, default info). Safe to call more than once.
void init_logging();

// Logger shared by all modules; writes to stderr.
spdlog::logger& logger();

}  // namespace softtree
