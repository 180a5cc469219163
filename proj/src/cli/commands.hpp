#pragma once

#include "config.hpp"

namespace mollescore::cli {

// returns a process exit code: 0 ok, 2 config error, 3 numerical failure
int run_command(const std::string& name, const json& cfg,
                const CommonOpts& opts);

}  // namespace mollescore::cli
