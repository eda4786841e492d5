// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Everything is checked in exact arithmetic unless a tolerance is
// stated, and every criterion carries its own wall-clock budget.

#include "pmc/bench/generators.hpp"
#include "pmc/chain.hpp"
#include "pmc/engine/add.hpp"
#include "pmc/engine/explicit.hpp"
#include "pmc/engine/wmc.hpp"
#include "pmc/errors.hpp"
#include "pmc/lang/parser.hpp"
#include "pmc/lang/semantics.hpp"

#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

using namespace pmc;
using testsupport::random_chain;
using testsupport::toy_chain;

namespace {

int failures = 0;

void report(int index, const char* name, bool ok, double seconds, const std::string& detail) {
    std::printf("%s %2d %-28s %7.2fs%s%s\n", ok ? "PASS" : "FAIL", index, name, seconds,
                detail.empty() ? "" : "  ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void criterion(int index, const char* name, double budget_seconds,
               const std::function<bool(std::string&)>& body) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (ok && elapsed > budget_seconds) {
        ok = false;
        detail = "over the time budget of " + std::to_string(budget_seconds) + "s";
    }
    report(index, name, ok, elapsed, detail);
}

Rational q(long long n, long long d) { return Rational::from_int(n, d); }

lang::ResolvedProgram resolve_text(const std::string& text) {
    return lang::resolve(lang::parse(text));
}

// float-mode instantiate-then-iterate reference for criterion 8; the chain
// is compiled once so per-valuation work is pure arithmetic
struct FloatChain {
    struct Term {
        double coeff;
        std::vector<std::pair<std::size_t, int>> powers; // parameter index, exponent
    };
    struct FloatBranch {
        StateId target;
        std::vector<Term> terms;
    };
    std::vector<std::vector<FloatBranch>> rows;
    std::vector<bool> is_target;
    StateId initial = 0;

    static FloatChain compile(const MarkovChain& pmc, const std::vector<std::string>& params) {
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < params.size(); ++i) index.emplace(params[i], i);
        FloatChain out;
        out.initial = pmc.initial();
        out.is_target.resize(pmc.num_states());
        out.rows.resize(pmc.num_states());
        for (StateId s = 0; s < pmc.num_states(); ++s) {
            out.is_target[s] = pmc.is_target(s);
            for (const auto& b : pmc.row(s).branches()) {
                FloatBranch fb;
                fb.target = b.target;
                for (const auto& [monomial, coeff] : b.weight.terms()) {
                    Term term{coeff.to_double(), {}};
                    for (const auto& [name, exp] : monomial) {
                        term.powers.emplace_back(index.at(name), exp);
                    }
                    fb.terms.push_back(std::move(term));
                }
                out.rows[s].push_back(std::move(fb));
            }
        }
        return out;
    }

    double reach(const std::vector<double>& u, unsigned h) const {
        std::size_t n = rows.size();
        std::vector<double> x(n, 0.0);
        for (StateId s = 0; s < n; ++s) x[s] = is_target[s] ? 1.0 : 0.0;
        for (unsigned i = 0; i < h; ++i) {
            std::vector<double> next(n, 0.0);
            for (StateId s = 0; s < n; ++s) {
                if (is_target[s]) {
                    next[s] = 1.0;
                    continue;
                }
                double sum = 0;
                for (const auto& b : rows[s]) {
                    double w = 0;
                    for (const auto& term : b.terms) {
                        double t = term.coeff;
                        for (const auto& [p, exp] : term.powers) {
                            for (int e = 0; e < exp; ++e) t *= u[p];
                        }
                        w += t;
                    }
                    sum += w * x[b.target];
                }
                next[s] = sum;
            }
            x = std::move(next);
        }
        return x[initial];
    }
};

} // namespace

int main() {
    // 1. all three engines find 21/50 on the toy chain at h=3
    criterion(1, "toy-chain-regression", 1.0, [](std::string& detail) {
        MarkovChain mc = toy_chain();
        Rational expected = q(21, 50);
        Rational via_explicit = engine::bounded_reach_explicit(mc, 3)[mc.initial()];
        engine::AddEngine add(mc);
        Rational via_add = add.bounded_reach(3).value_at_initial.constant_value();
        Rational via_wmc = wmc::unroll_chain(mc, 3).evaluate();
        detail = "explicit=" + via_explicit.str() + " add=" + via_add.str() +
                 " wmc=" + via_wmc.str();
        return via_explicit == expected && via_add == expected && via_wmc == expected;
    });

    // 2. the full 16-entry bounded-reachability table
    criterion(2, "per-state-horizon-table", 1.0, [](std::string& detail) {
        MarkovChain mc = toy_chain();
        auto table = engine::bounded_reach_table(mc, 3);
        const std::vector<std::vector<Rational>> expected = {
            {q(0, 1), q(0, 1), q(1, 5), q(21, 50)},
            {q(0, 1), q(1, 2), q(3, 4), q(7, 8)},
            {q(1, 1), q(1, 1), q(1, 1), q(1, 1)},
            {q(0, 1), q(1, 2), q(3, 4), q(7, 8)},
        };
        int checked = 0;
        for (StateId s = 0; s < 4; ++s) {
            for (unsigned h = 0; h <= 3; ++h) {
                if (table[h][s] != expected[s][h]) {
                    detail = "mismatch at state " + std::to_string(s) + ", h=" + std::to_string(h);
                    return false;
                }
                ++checked;
            }
        }
        detail = std::to_string(checked) + " entries exact";
        return checked == 16;
    });

    // 3. the h=3 causal encoding is node-identical to the worked formula and
    //    counts to 21/50 under the stated weights
    criterion(3, "wmc-formula-regression", 1.0, [](std::string& detail) {
        MarkovChain mc = toy_chain();
        wmc::SolutionFunction sf = wmc::unroll_chain(mc, 3);
        auto& m = sf.manager();
        auto cs = [&](unsigned t) { return m.bdd_var(3 * t); };
        auto ct = [&](unsigned t) { return m.bdd_var(3 * t + 1); };
        auto cv = [&](unsigned t) { return m.bdd_var(3 * t + 2); };
        dd::NodeId formula = m.bdd_or(
            m.bdd_or(m.bdd_and(cs(0), m.bdd_and(m.bdd_not(cs(1)), ct(2))),
                     m.bdd_and(m.bdd_not(cs(0)), ct(1))),
            m.bdd_and(m.bdd_not(cs(0)), m.bdd_and(m.bdd_not(ct(1)), cv(2))));
        if (formula != sf.root()) {
            detail = "canonical nodes differ";
            return false;
        }
        std::vector<Rational> weights;
        for (const auto& coin : sf.coins()) {
            bool is_s = coin.name.rfind("c[<0,0>", 0) == 0;
            weights.push_back(is_s ? q(3, 5) : q(1, 2));
        }
        Rational counted = wmc::weighted_model_count(m, sf.root(), weights);
        detail = "WMC=" + counted.str();
        return counted == q(21, 50);
    });

    // 4. WMC at h=1 is the product of the strike probabilities
    criterion(4, "factory-product-law", 5.0, [](std::string& detail) {
        for (unsigned n = 1; n <= 8; ++n) {
            lang::ResolvedProgram rp = resolve_text(bench::gen_factories(n, false, 13 * n + 1));
            Rational expected(1);
            for (unsigned i = 1; i <= n; ++i) {
                expected *= rp.constants.at("p" + std::to_string(i)).poly.constant_value();
            }
            Rational counted = wmc::unroll_program(rp, "allStrike", 1).evaluate();
            if (counted != expected) {
                detail = "n=" + std::to_string(n) + ": " + counted.str() + " != " + expected.str();
                return false;
            }
        }
        detail = "n=1..8 exact products";
        return true;
    });

    // 5. 200 seeded chains: all three engines equal the path oracle exactly
    criterion(5, "oracle-equivalence", 120.0, [](std::string& detail) {
        std::mt19937 rng(20210521);
        for (int round = 0; round < 200; ++round) {
            MarkovChain mc = random_chain(rng, 8, 4);
            unsigned h = rng() % 9;
            Rational oracle = enumerate_reaching_paths(mc, h).mass_rational();
            if (engine::bounded_reach_explicit(mc, h)[mc.initial()] != oracle) {
                detail = "explicit engine differs in round " + std::to_string(round);
                return false;
            }
            engine::AddEngine add(mc);
            if (add.bounded_reach(h).value_at_initial.constant_value() != oracle) {
                detail = "add engine differs in round " + std::to_string(round);
                return false;
            }
            if (wmc::unroll_chain(mc, h).evaluate() != oracle) {
                detail = "wmc engine differs in round " + std::to_string(round);
                return false;
            }
        }
        detail = "200 chains, h <= 8";
        return true;
    });

    // 6. linear horizon growth of the causal BDD, under the causal-order bound
    criterion(6, "linear-horizon-growth", 30.0, [](std::string& detail) {
        lang::ResolvedProgram rp = resolve_text(bench::gen_factories(4, false, 2));
        std::vector<long long> counts;
        std::size_t m_per_step = 0;
        for (unsigned h = 2; h <= 20; ++h) {
            wmc::SolutionFunction sf = wmc::unroll_program(rp, "allStrike", h);
            counts.push_back(static_cast<long long>(sf.node_count()));
            m_per_step = sf.coins_per_step();
            // h * |S x S_psi| * m * 2^m with |S| = 2^4 and |S_psi| = 2
            long double bound = static_cast<long double>(h) * (16.0L * 2) * m_per_step *
                                std::pow(2.0L, static_cast<long double>(m_per_step));
            if (static_cast<long double>(counts.back()) > bound) {
                detail = "count exceeds the causal bound at h=" + std::to_string(h);
                return false;
            }
        }
        long long diff = counts[1] - counts[0];
        for (std::size_t i = 1; i + 1 < counts.size(); ++i) {
            if (counts[i + 1] - counts[i] != diff) {
                detail = "first differences change at h=" + std::to_string(i + 3);
                return false;
            }
        }
        detail = "slope " + std::to_string(diff) + " nodes/step, m=" + std::to_string(m_per_step);
        return true;
    });

    // 7. few distinct weights while the ADD matrix leaf count blows up
    criterion(7, "weight-economy-vs-add", 120.0, [](std::string& detail) {
        std::size_t previous_leaves = 0;
        std::size_t leaves_at_7 = 0;
        for (unsigned n = 2; n <= 7; ++n) {
            lang::ResolvedProgram rp = resolve_text(bench::gen_weather(n));
            wmc::SolutionFunction sf = wmc::unroll_program(rp, "allStrike", 3);
            std::size_t weights = sf.distinct_weight_values().size();
            if (weights > 4 * n + 4) {
                detail = "n=" + std::to_string(n) + " has " + std::to_string(weights) + " weights";
                return false;
            }
            lang::BuiltModel built = lang::build_explicit(rp, "allStrike");
            engine::AddEngine add(built.chain);
            std::size_t leaves = add.manager().terminal_values(add.transition_add()).size();
            if (leaves <= previous_leaves) {
                detail = "leaf count not increasing at n=" + std::to_string(n);
                return false;
            }
            previous_leaves = leaves;
            if (n == 7) leaves_at_7 = leaves;
        }
        if (leaves_at_7 <= 128) {
            detail = "leaf count at n=7 is only " + std::to_string(leaves_at_7);
            return false;
        }
        detail = "n=7: " + std::to_string(leaves_at_7) + " matrix leaves";
        return true;
    });

    // 8. one parametric BDD, a thousand valuations, amortized evaluation
    criterion(8, "parametric-sampling", 180.0, [](std::string& detail) {
        lang::ResolvedProgram rp = resolve_text(bench::gen_factories(6, true, 0));
        wmc::SolutionFunction sf = wmc::unroll_program(rp, "allStrike", 10);
        sf.freeze();
        lang::BuiltModel built = lang::build_explicit(rp, "allStrike");
        FloatChain compiled = FloatChain::compile(built.chain, rp.parameters);
        std::mt19937 rng(4242);
        std::uniform_int_distribution<int> den_dist(2, 1000);
        auto random_rational = [&]() {
            int den = den_dist(rng);
            return Rational::from_int(1 + static_cast<int>(rng() % (den - 1)), den);
        };
        for (int i = 0; i < 1000; ++i) {
            Valuation u;
            std::vector<double> uf(rp.parameters.size());
            for (int j = 1; j <= 6; ++j) {
                for (const char* base : {"p", "q"}) {
                    std::string name = base + std::to_string(j);
                    Rational v = random_rational();
                    auto slot = std::find(rp.parameters.begin(), rp.parameters.end(), name);
                    uf[static_cast<std::size_t>(slot - rp.parameters.begin())] = v.to_double();
                    u.set(name, std::move(v));
                }
            }
            if (i < 50) {
                Rational got = sf.evaluate(u);
                if (sf.last_nodes_touched() > sf.node_count()) {
                    detail = "evaluation touched a node twice";
                    return false;
                }
                Rational reference = engine::bounded_reach_explicit(
                    instantiate(built.chain, u), 10)[built.chain.initial()];
                if (got != reference) {
                    detail = "exact mismatch at valuation " + std::to_string(i);
                    return false;
                }
            } else {
                double got = sf.evaluate_float(u);
                if (sf.last_nodes_touched() > sf.node_count()) {
                    detail = "evaluation touched a node twice";
                    return false;
                }
                double reference = compiled.reach(uf, 10);
                if (std::abs(got - reference) > 1e-12) {
                    detail = "float mismatch at valuation " + std::to_string(i);
                    return false;
                }
            }
        }
        detail = "50 exact + 950 float, " + std::to_string(sf.node_count()) + " nodes";
        return true;
    });

    // 9. indefinite-horizon sandwich with shrinking gaps
    criterion(9, "indefinite-horizon-sandwich", 60.0, [](std::string& detail) {
        std::mt19937 rng(906090);
        for (int round = 0; round < 20; ++round) {
            MarkovChain mc = random_chain(rng, 8, 4);
            Rational exact = engine::unbounded_reach(mc)[mc.initial()];
            Rational prev_lower(0), prev_upper(1);
            for (unsigned h = 0; h <= 12; ++h) {
                wmc::Bounds b = wmc::indefinite_bounds(mc, h);
                bool sandwich = b.lower <= exact && exact <= b.upper;
                bool nested = prev_lower <= b.lower && b.upper <= prev_upper;
                if (!sandwich || !nested) {
                    detail = "violated in round " + std::to_string(round) + " at h=" +
                             std::to_string(h);
                    return false;
                }
                prev_lower = b.lower;
                prev_upper = b.upper;
            }
        }
        detail = "20 chains, h <= 12";
        return true;
    });

    // 10. binarization preserves first-visit mass under the horizon map
    criterion(10, "binarization-soundness", 60.0, [](std::string& detail) {
        std::mt19937 rng(515151);
        for (int round = 0; round < 50; ++round) {
            MarkovChain mc = random_chain(rng, 8, 5);
            BinarizedChain bin = binarize(mc);
            for (unsigned h = 0; h <= 3; ++h) {
                Rational original = enumerate_reaching_paths(mc, h).mass_rational();
                Rational mapped =
                    enumerate_reaching_paths(bin.chain, bin.horizon(h)).mass_rational();
                if (original != mapped) {
                    detail = "mass differs in round " + std::to_string(round) + " at h=" +
                             std::to_string(h);
                    return false;
                }
            }
        }
        detail = "50 chains, out-degree <= 5";
        return true;
    });

    if (failures == 0) {
        std::printf("all criteria passed\n");
    } else {
        std::printf("%d criteria failed\n", failures);
    }
    return failures == 0 ? 0 : 1;
}
