#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace zeroeff {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 1 estimator failure, 2 invalid input or config.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace zeroeff
