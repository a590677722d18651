#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace margin::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitIo = 74;

/// Entry point behind the `marginloan` binary. CSV goes to `out` unless
/// --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// %.17g with a "." decimal point regardless of locale.
std::string format_number(double value);

}  // namespace margin::cli
