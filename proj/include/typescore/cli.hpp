#pragma once

#include <iosfwd>

namespace typescore::cli {

// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace typescore::cli
