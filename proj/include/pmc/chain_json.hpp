#pragma once

#include "pmc/chain.hpp"

#include <json.hpp>

namespace pmc {

// Canonical JSON form of a chain: states with labels, transitions as
// numerator/denominator pairs (constant rows) or polynomial term lists.
nlohmann::json to_json(const MarkovChain& mc);
nlohmann::json to_json(const Polynomial& p);
nlohmann::json to_json(const Rational& q);

} // namespace pmc
