#include "pmc/engine/explicit.hpp"

#include "pmc/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace pmc;
using namespace pmc::engine;
using testsupport::random_chain;
using testsupport::toy_chain;

TEST_CASE("the toy chain bounded-reachability table") {
    MarkovChain mc = toy_chain();
    auto table = bounded_reach_table(mc, 3);
    auto q = [](long long n, long long d) { return Rational::from_int(n, d); };
    // rows: horizon columns per state s,t,u,v
    std::vector<std::vector<Rational>> expected = {
        {q(0, 1), q(0, 1), q(1, 5), q(21, 50)},
        {q(0, 1), q(1, 2), q(3, 4), q(7, 8)},
        {q(1, 1), q(1, 1), q(1, 1), q(1, 1)},
        {q(0, 1), q(1, 2), q(3, 4), q(7, 8)},
    };
    for (StateId s = 0; s < 4; ++s) {
        for (unsigned h = 0; h <= 3; ++h) {
            CHECK(table[h][s] == expected[s][h]);
        }
    }
}

TEST_CASE("horizon zero is the target indicator") {
    MarkovChain mc = toy_chain();
    auto x = bounded_reach_explicit(mc, 0);
    for (StateId s = 0; s < mc.num_states(); ++s) {
        CHECK(x[s] == (mc.is_target(s) ? Rational(1) : Rational(0)));
    }
}

TEST_CASE("agreement with the path oracle on seeded chains") {
    std::mt19937 rng(2024);
    for (int round = 0; round < 30; ++round) {
        MarkovChain mc = random_chain(rng, 7, 4);
        unsigned h = rng() % 7;
        auto x = bounded_reach_explicit(mc, h);
        for (StateId s = 0; s < mc.num_states(); ++s) {
            CHECK(x[s] == enumerate_reaching_paths_from(mc, s, h).mass_rational());
        }
    }
}

TEST_CASE("monotone in the horizon") {
    std::mt19937 rng(5);
    MarkovChain mc = random_chain(rng, 8, 4);
    auto table = bounded_reach_table(mc, 8);
    for (unsigned h = 0; h < 8; ++h) {
        for (StateId s = 0; s < mc.num_states(); ++s) {
            CHECK(table[h][s] <= table[h + 1][s]);
        }
    }
}

TEST_CASE("unbounded reachability on the toy chain is one everywhere") {
    MarkovChain mc = toy_chain();
    auto x = unbounded_reach(mc);
    for (StateId s = 0; s < mc.num_states(); ++s) CHECK(x[s] == Rational(1));
}

TEST_CASE("unbounded reachability: bad states get zero, loops resolve exactly") {
    MarkovChain mc;
    StateId a = mc.add_state({"a", {}, false});
    StateId t = mc.add_state({"t", {}, false});
    StateId dead = mc.add_state({"dead", {}, false});
    mc.set_initial(a);
    mc.add_target(t);
    // a loops with 1/2, exits to t with 1/4 and to dead with 1/4
    mc.set_row(a, Distribution::constants({{a, Rational::from_int(1, 2)},
                                           {t, Rational::from_int(1, 4)},
                                           {dead, Rational::from_int(1, 4)}}));
    mc.set_row(t, Distribution::dirac(t));
    mc.set_row(dead, Distribution::dirac(dead));
    mc.validate();
    auto x = unbounded_reach(mc);
    CHECK(x[a] == Rational::from_int(1, 2));
    CHECK(x[t] == Rational(1));
    CHECK(x[dead] == Rational(0));
}

TEST_CASE("a looping state whose only exits lead to the target reaches it surely") {
    MarkovChain mc;
    StateId a = mc.add_state({"a", {}, false});
    StateId t = mc.add_state({"t", {}, false});
    mc.set_initial(a);
    mc.add_target(t);
    mc.set_row(a, Distribution::constants(
                      {{a, Rational::from_int(9, 10)}, {t, Rational::from_int(1, 10)}}));
    mc.set_row(t, Distribution::dirac(t));
    mc.validate();
    CHECK(unbounded_reach(mc)[a] == Rational(1));
}

TEST_CASE("sandwich between bounded value and bad-set complement") {
    std::mt19937 rng(77);
    for (int round = 0; round < 10; ++round) {
        MarkovChain mc = random_chain(rng, 6, 3);
        auto exact = unbounded_reach(mc);
        // Bad must be reached before T, so T stays absorbing
        MarkovChain bad_chain = with_targets(make_absorbing(mc), bad_states(mc));
        Rational prev_gap(1);
        for (unsigned h = 0; h <= 6; ++h) {
            Rational lower = bounded_reach_explicit(mc, h)[mc.initial()];
            Rational upper =
                Rational(1) - bounded_reach_explicit(bad_chain, h)[bad_chain.initial()];
            CHECK(lower <= exact[mc.initial()]);
            CHECK(exact[mc.initial()] <= upper);
            Rational gap = upper - lower;
            CHECK(gap <= prev_gap);
            prev_gap = gap;
        }
    }
}

TEST_CASE("size cap on the exact solver") {
    std::mt19937 rng(1);
    MarkovChain mc = random_chain(rng, 8, 3);
    while (mc.num_states() <= 4) mc = random_chain(rng, 8, 3);
    CHECK_THROWS_AS(unbounded_reach(mc, 4), Error);
}

TEST_CASE("float mode tracks the exact values") {
    std::mt19937 rng(13);
    MarkovChain mc = random_chain(rng, 8, 4);
    auto exact = bounded_reach_explicit(mc, 6);
    auto approx = bounded_reach_explicit_float(mc, 6);
    for (StateId s = 0; s < mc.num_states(); ++s) {
        CHECK(approx[s] == doctest::Approx(exact[s].to_double()).epsilon(1e-12));
    }
}

TEST_CASE("CSV emission shape") {
    std::ostringstream os;
    write_reach_csv(os, toy_chain(), 2);
    std::string text = os.str();
    CHECK(text.rfind("state,h,probability\n", 0) == 0);
    CHECK(text.find("0,2,1/5\n") != std::string::npos);
    CHECK(text.find("2,0,1\n") != std::string::npos);
}

TEST_CASE("engines refuse parametric chains") {
    CHECK_THROWS_AS(bounded_reach_explicit(testsupport::toy_pmc(), 2), Error);
}
