#pragma once

#include <iosfwd>

namespace emsrl::cli {

// Exit codes: 0 success, 1 failure, 2 configuration error, 3 data-file error.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kDataError = 3;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace emsrl::cli
