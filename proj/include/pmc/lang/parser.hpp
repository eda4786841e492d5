#pragma once

#include "pmc/lang/ast.hpp"

#include <string_view>

namespace pmc::lang {

// Parses a dtmc model in the guarded-command language. Renamed modules
// (module B = A[x=y,...] endmodule) are expanded into concrete modules.
// Throws Error(SyntaxError) with line:col positions.
Program parse(std::string_view text, const std::string& filename = "<input>");

Program parse_file(const std::string& path);

} // namespace pmc::lang
