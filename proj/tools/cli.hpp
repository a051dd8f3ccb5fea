#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sdlab::cli {

/// Exit codes: 0 success, 1 invalid usage or config, 2 precondition failure,
/// 3 a verification reported FAIL.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a, printed in config headers.
std::uint64_t fnv1a(const std::string& text);

}  // namespace sdlab::cli
