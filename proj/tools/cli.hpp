#pragma once

#include <string>
#include <vector>

namespace bsdwear::cli {

/// Exit codes: 0 success, 1 usage error, 2 data error, 3 end-of-life
/// criterion exceeded (`eol` only).
int run_command(const std::vector<std::string>& args);

}  // namespace bsdwear::cli
