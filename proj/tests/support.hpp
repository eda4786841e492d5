#pragma once

#include "pmc/chain.hpp"

#include <random>

namespace testsupport {

using namespace pmc;

// The four-state toy chain: s=<0,0> (initial), t=<0,1>, u=<1,0> (target),
// v=<1,1>. s: 0.6 self / 0.4 to t; t: 0.5 u / 0.5 v; u: 0.6 s / 0.4 v;
// v: 0.5 u / 0.5 self.
inline MarkovChain toy_chain() {
    MarkovChain mc;
    StateId s = mc.add_state({"<0,0>", {0, 0}, false});
    StateId t = mc.add_state({"<0,1>", {0, 1}, false});
    StateId u = mc.add_state({"<1,0>", {1, 0}, false});
    StateId v = mc.add_state({"<1,1>", {1, 1}, false});
    mc.set_initial(s);
    mc.add_target(u);
    mc.set_row(s, Distribution::constants({{s, Rational::from_int(3, 5)}, {t, Rational::from_int(2, 5)}}));
    mc.set_row(t, Distribution::constants({{u, Rational::from_int(1, 2)}, {v, Rational::from_int(1, 2)}}));
    mc.set_row(u, Distribution::constants({{s, Rational::from_int(3, 5)}, {v, Rational::from_int(2, 5)}}));
    mc.set_row(v, Distribution::constants({{u, Rational::from_int(1, 2)}, {v, Rational::from_int(1, 2)}}));
    mc.validate();
    return mc;
}

// The parametric variant: s: 1-p self / p to t; t: q u / 1-q v;
// u: 1-p s / p v; v: q u / 1-q s.
inline MarkovChain toy_pmc() {
    MarkovChain mc;
    StateId s = mc.add_state({"<0,0>", {0, 0}, false});
    StateId t = mc.add_state({"<0,1>", {0, 1}, false});
    StateId u = mc.add_state({"<1,0>", {1, 0}, false});
    StateId v = mc.add_state({"<1,1>", {1, 1}, false});
    mc.set_initial(s);
    mc.add_target(u);
    mc.set_parameters({"p", "q"});
    Polynomial p = Polynomial::variable("p");
    Polynomial q = Polynomial::variable("q");
    Polynomial one(Rational(1));
    mc.set_row(s, Distribution::parametric({{s, one - p}, {t, p}}));
    mc.set_row(t, Distribution::parametric({{u, q}, {v, one - q}}));
    mc.set_row(u, Distribution::parametric({{s, one - p}, {v, p}}));
    mc.set_row(v, Distribution::parametric({{u, q}, {s, one - q}}));
    mc.validate();
    return mc;
}

// Random chain with exact rational rows, out-degree <= max_degree.
inline MarkovChain random_chain(std::mt19937& rng, unsigned max_states, unsigned max_degree,
                                bool ensure_target = true) {
    std::uniform_int_distribution<unsigned> state_count(2, max_states);
    unsigned n = state_count(rng);
    MarkovChain mc;
    for (unsigned i = 0; i < n; ++i) {
        mc.add_state({"s" + std::to_string(i), {}, false});
    }
    mc.set_initial(0);
    std::uniform_int_distribution<unsigned> degree(1, max_degree);
    std::uniform_int_distribution<unsigned> pick_state(0, n - 1);
    std::uniform_int_distribution<int> numerator(1, 20);
    for (unsigned s = 0; s < n; ++s) {
        unsigned k = std::min(degree(rng), n);
        std::vector<StateId> succ;
        while (succ.size() < k) {
            StateId t = pick_state(rng);
            if (std::find(succ.begin(), succ.end(), t) == succ.end()) succ.push_back(t);
        }
        std::vector<int> parts(k);
        int total = 0;
        for (auto& part : parts) {
            part = numerator(rng);
            total += part;
        }
        std::vector<std::pair<StateId, Rational>> branches;
        for (unsigned j = 0; j < k; ++j) {
            branches.emplace_back(succ[j], Rational::from_int(parts[j], total));
        }
        mc.set_row(s, Distribution::constants(std::move(branches)));
    }
    std::bernoulli_distribution one_in_four(0.25);
    for (unsigned s = 0; s < n; ++s) {
        if (one_in_four(rng)) mc.add_target(s);
    }
    if (ensure_target && mc.targets().empty()) {
        mc.add_target(pick_state(rng));
    }
    mc.validate();
    return mc;
}

} // namespace testsupport
