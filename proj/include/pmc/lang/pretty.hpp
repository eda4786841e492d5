#pragma once

#include "pmc/lang/ast.hpp"

#include <string>

namespace pmc::lang {

std::string pretty(const ExprPtr& e);
std::string pretty(const Program& p);

} // namespace pmc::lang
