#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shortrace::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitCheckFailed = 3;

// args excludes the program name. JSON goes to `out` unless --out names a file.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shortrace::cli
