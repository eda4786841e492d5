#pragma once

#include "pmc/chain.hpp"

#include <iosfwd>
#include <vector>

namespace pmc::engine {

// Backward Bellman iteration with the absorbing matrix: entry s of the
// result is Pr(s |= <>^{<=h} T), exact rationals.
std::vector<Rational> bounded_reach_explicit(const MarkovChain& mc, unsigned h);

// All columns 0..h (table rows are states, columns horizons).
std::vector<std::vector<Rational>> bounded_reach_table(const MarkovChain& mc, unsigned h);

// Double-precision variant for scaling runs.
std::vector<double> bounded_reach_explicit_float(const MarkovChain& mc, unsigned h);

// Exact unbounded reachability via the linear system on the states that can
// reach T but are not targets. SizeCap above the given model size.
std::vector<Rational> unbounded_reach(const MarkovChain& mc, std::size_t size_cap = 50);

// CSV rows (state,h,probability) for horizons 0..h.
void write_reach_csv(std::ostream& os, const MarkovChain& mc, unsigned h);

} // namespace pmc::engine
