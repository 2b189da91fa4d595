#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pico {

// Exit codes: 0 success, 1 config/validation, 2 I/O, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitNumerical = 3;

// Entry point behind the pico binary; also callable from tests.
// args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pico
