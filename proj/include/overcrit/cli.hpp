#pragma once

#include <iosfwd>

namespace overcrit {

// Exit codes: 0 success, 1 domain error, 2 usage or configuration-syntax error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

} // namespace overcrit
