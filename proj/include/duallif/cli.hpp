#pragma once

#include <ostream>

namespace duallif::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Entry point behind the `duallif` executable. Errors are reported as a single line
/// "error: <validation|io>: <reason>" on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace duallif::cli
