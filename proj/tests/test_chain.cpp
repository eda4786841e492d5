#include "pmc/chain.hpp"

#include "pmc/chain_json.hpp"
#include "pmc/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace pmc;
using testsupport::random_chain;
using testsupport::toy_chain;
using testsupport::toy_pmc;

TEST_CASE("path probabilities on the toy chain") {
    MarkovChain mc = toy_chain();
    CHECK(path_probability(mc, {{0, 1, 2}}) == Rational::from_int(1, 5));
    CHECK(path_probability(mc, {{0}}) == Rational(1));
    CHECK(path_probability(mc, {{0, 0, 1, 2}}) == Rational::from_int(3, 25));
    CHECK_THROWS_AS(path_probability(mc, {{0, 2}}), Error); // no edge s -> u
}

TEST_CASE("first-visit path enumeration matches the worked example") {
    MarkovChain mc = toy_chain();
    PathEnumeration result = enumerate_reaching_paths(mc, 3);
    CHECK(result.paths.size() == 3);
    CHECK(result.mass_rational() == Rational::from_int(21, 50));
}

TEST_CASE("horizon zero with initial target state") {
    MarkovChain mc = toy_chain();
    MarkovChain flipped = with_targets(mc, {mc.initial()});
    PathEnumeration result = enumerate_reaching_paths(flipped, 0);
    CHECK(result.paths.size() == 1);
    CHECK(result.paths[0].states.size() == 1);
    CHECK(result.mass_rational() == Rational(1));
}

TEST_CASE("path cap aborts oversized enumerations") {
    MarkovChain mc = toy_chain();
    CHECK_THROWS_AS(enumerate_reaching_paths(mc, 30, 10), Error);
}

TEST_CASE("instantiate the parametric toy chain") {
    MarkovChain pmc = toy_pmc();
    Valuation u;
    u.set("p", Rational::from_int(2, 5));
    u.set("q", Rational::from_int(1, 2));
    MarkovChain mc = instantiate(pmc, u);
    CHECK(!mc.is_parametric());
    CHECK(enumerate_reaching_paths(mc, 3).mass_rational() == Rational::from_int(21, 50));
}

TEST_CASE("boundary valuations are legal, out-of-range ones are reported") {
    MarkovChain pmc;
    StateId a = pmc.add_state({"a", {}, false});
    StateId b = pmc.add_state({"b", {}, false});
    pmc.set_initial(a);
    pmc.add_target(b);
    pmc.set_parameters({"p"});
    Polynomial p = Polynomial::variable("p");
    pmc.set_row(a, Distribution::parametric({{b, p}, {a, Polynomial(Rational(1)) - p}}));
    pmc.set_row(b, Distribution::dirac(b));
    pmc.validate();

    Valuation zero;
    zero.set("p", Rational(0));
    MarkovChain degenerate = instantiate(pmc, zero);
    CHECK(degenerate.row(a).size() == 1); // the zero branch is dropped
    CHECK(check_well_defined(pmc, zero).empty());

    Valuation two;
    two.set("p", Rational(2));
    auto issues = check_well_defined(pmc, two);
    CHECK(!issues.empty());
    CHECK_THROWS_AS(instantiate(pmc, two), Error);
}

TEST_CASE("well-definedness report lists every violating state") {
    MarkovChain pmc = toy_pmc();
    Valuation good;
    good.set("p", Rational::from_int(1, 3));
    good.set("q", Rational(1));
    CHECK(check_well_defined(pmc, good).empty());

    Valuation bad;
    bad.set("p", Rational(2));
    bad.set("q", Rational::from_int(1, 2));
    auto issues = check_well_defined(pmc, bad);
    // p appears in the rows of states 0 and 2
    std::set<StateId> states;
    for (const auto& issue : issues) states.insert(issue.state);
    CHECK(states.count(0) == 1);
    CHECK(states.count(2) == 1);
}

TEST_CASE("make_absorbing replaces target rows and is idempotent") {
    MarkovChain mc = toy_chain();
    MarkovChain absorbing = make_absorbing(mc);
    CHECK(absorbing.row(2).size() == 1);
    CHECK(absorbing.row(2).branches()[0].target == 2);
    CHECK(absorbing.row(2).branches()[0].weight.constant_value() == Rational(1));
    CHECK(absorbing.row(0).branches().size() == mc.row(0).branches().size());

    MarkovChain twice = make_absorbing(absorbing);
    CHECK(to_json(twice) == to_json(absorbing));

    MarkovChain no_targets = with_targets(mc, {});
    CHECK(to_json(make_absorbing(no_targets)) == to_json(no_targets));

    MarkovChain all_targets = with_targets(mc, {0, 1, 2, 3});
    MarkovChain identity = make_absorbing(all_targets);
    for (StateId s = 0; s < identity.num_states(); ++s) {
        CHECK(identity.row(s).size() == 1);
        CHECK(identity.row(s).branches()[0].target == s);
    }
}

TEST_CASE("bad states: unreachable-target complement") {
    MarkovChain mc = toy_chain();
    CHECK(bad_states(mc).empty());

    MarkovChain sink;
    StateId a = sink.add_state({"a", {}, false});
    StateId b = sink.add_state({"b", {}, false});
    StateId dead = sink.add_state({"dead", {}, false});
    sink.set_initial(a);
    sink.add_target(b);
    sink.set_row(a, Distribution::constants(
                        {{b, Rational::from_int(7, 10)}, {dead, Rational::from_int(3, 10)}}));
    sink.set_row(b, Distribution::dirac(b));
    sink.set_row(dead, Distribution::dirac(dead));
    sink.validate();
    auto bad = bad_states(sink);
    CHECK(bad == std::vector<StateId>{dead});

    MarkovChain none = with_targets(mc, {});
    CHECK(bad_states(none).size() == mc.num_states());
}

TEST_CASE("bad states agree with the path oracle") {
    std::mt19937 rng(7);
    for (int round = 0; round < 25; ++round) {
        MarkovChain mc = random_chain(rng, 8, 4);
        std::vector<bool> is_bad(mc.num_states(), false);
        for (StateId s : bad_states(mc)) is_bad[s] = true;
        for (StateId s = 0; s < mc.num_states(); ++s) {
            auto result =
                enumerate_reaching_paths_from(mc, s, static_cast<unsigned>(mc.num_states()));
            CHECK(is_bad[s] == result.paths.empty());
        }
    }
}

TEST_CASE("binarize reproduces the three-way split shape") {
    MarkovChain mc;
    StateId s = mc.add_state({"s", {}, false});
    StateId t = mc.add_state({"t", {}, false});
    StateId u = mc.add_state({"u", {}, false});
    StateId v = mc.add_state({"v", {}, false});
    mc.set_initial(s);
    mc.add_target(t);
    mc.set_row(s, Distribution::constants({{t, Rational::from_int(1, 3)},
                                           {u, Rational::from_int(1, 3)},
                                           {v, Rational::from_int(1, 3)}}));
    mc.set_row(t, Distribution::dirac(t));
    mc.set_row(u, Distribution::dirac(u));
    mc.set_row(v, Distribution::dirac(v));
    mc.validate();

    BinarizedChain bin = binarize(mc);
    CHECK(bin.steps_per_original == 2);
    CHECK(bin.horizon(3) == 6);

    // s -> s1 (1/3) with s1 -> t dirac; s -> s2 (2/3) splitting u/v evenly
    const auto& row = bin.chain.row(s).branches();
    REQUIRE(row.size() == 2);
    StateId s1 = row[0].target;
    StateId s2 = row[1].target;
    CHECK(row[0].weight.constant_value() == Rational::from_int(1, 3));
    CHECK(row[1].weight.constant_value() == Rational::from_int(2, 3));
    CHECK(bin.chain.info(s1).auxiliary);
    CHECK(bin.chain.info(s2).auxiliary);
    REQUIRE(bin.chain.row(s1).size() == 1);
    CHECK(bin.chain.row(s1).branches()[0].target == t);
    const auto& split = bin.chain.row(s2).branches();
    REQUIRE(split.size() == 2);
    CHECK(split[0].target == u);
    CHECK(split[1].target == v);
    CHECK(split[0].weight.constant_value() == Rational::from_int(1, 2));
    CHECK(split[1].weight.constant_value() == Rational::from_int(1, 2));
}

TEST_CASE("binarize leaves binary chains untouched") {
    MarkovChain mc = toy_chain();
    BinarizedChain bin = binarize(mc);
    CHECK(bin.steps_per_original == 1);
    CHECK(to_json(bin.chain) == to_json(mc));
}

TEST_CASE("four-way split resolves in two steps") {
    MarkovChain mc;
    StateId s = mc.add_state({"s", {}, false});
    std::vector<StateId> leaves;
    for (int i = 0; i < 4; ++i) {
        leaves.push_back(mc.add_state({"l" + std::to_string(i), {}, false}));
    }
    mc.set_initial(s);
    mc.add_target(leaves[2]);
    std::vector<std::pair<StateId, Rational>> branches;
    for (StateId leaf : leaves) branches.emplace_back(leaf, Rational::from_int(1, 4));
    mc.set_row(s, Distribution::constants(std::move(branches)));
    for (StateId leaf : leaves) mc.set_row(leaf, Distribution::dirac(leaf));
    mc.validate();

    BinarizedChain bin = binarize(mc);
    CHECK(bin.steps_per_original == 2);
    Rational original = enumerate_reaching_paths(mc, 1).mass_rational();
    Rational binarized = enumerate_reaching_paths(bin.chain, bin.horizon(1)).mass_rational();
    CHECK(original == binarized);
    CHECK(original == Rational::from_int(1, 4));
}

TEST_CASE("binarize preserves first-visit mass on seeded chains") {
    std::mt19937 rng(99);
    for (int round = 0; round < 30; ++round) {
        MarkovChain mc = random_chain(rng, 8, 5);
        BinarizedChain bin = binarize(mc);
        for (unsigned h = 0; h <= 3; ++h) {
            Rational original = enumerate_reaching_paths(mc, h).mass_rational();
            Rational transformed =
                enumerate_reaching_paths(bin.chain, bin.horizon(h)).mass_rational();
            CHECK(original == transformed);
        }
    }
}

TEST_CASE("parametric path oracle commutes with instantiation") {
    MarkovChain pmc = toy_pmc();
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> den(2, 30);
    for (int round = 0; round < 20; ++round) {
        int dp = den(rng), dq = den(rng);
        Valuation u;
        u.set("p", Rational::from_int(rng() % dp, dp));
        u.set("q", Rational::from_int(rng() % dq, dq));
        Polynomial symbolic = enumerate_reaching_paths(pmc, 4).mass;
        Rational direct = enumerate_reaching_paths(instantiate(pmc, u), 4).mass_rational();
        CHECK(symbolic.evaluate(u) == direct);
    }
}

TEST_CASE("row sums are exactly one by construction") {
    CHECK_THROWS_AS(
        Distribution::constants({{0, Rational::from_int(1, 2)}, {1, Rational::from_int(1, 3)}}),
        Error);
    CHECK_THROWS_AS(Distribution::constants({{0, Rational::from_int(3, 2)}}), Error);
    // duplicate targets merge
    Distribution d = Distribution::constants(
        {{0, Rational::from_int(1, 2)}, {0, Rational::from_int(1, 4)}, {1, Rational::from_int(1, 4)}});
    CHECK(d.size() == 2);
    CHECK(d.probability_of(0) == Rational::from_int(3, 4));
}

TEST_CASE("canonical JSON carries ids, labels and exact fractions") {
    nlohmann::json j = to_json(toy_chain());
    CHECK(j["initial"] == 0);
    CHECK(j["targets"] == std::vector<StateId>{2});
    CHECK(j["states"][1]["name"] == "<0,1>");
    CHECK(j["transitions"][0]["branches"][0]["prob"]["num"] == "3");
    CHECK(j["transitions"][0]["branches"][0]["prob"]["den"] == "5");

    nlohmann::json pj = to_json(toy_pmc());
    CHECK(pj["parameters"] == std::vector<std::string>{"p", "q"});
    CHECK(pj["transitions"][0]["branches"][1].contains("poly"));
}

#ifndef PMC_TEST_DATA_DIR
#define PMC_TEST_DATA_DIR "tests/golden"
#endif

TEST_CASE("golden file: canonical JSON of the toy chains is stable") {
    auto read = [](const char* name) {
        std::ifstream in(std::string(PMC_TEST_DATA_DIR) + "/" + name);
        REQUIRE(in.good());
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    CHECK(to_json(toy_chain()).dump(2) + "\n" == read("toy_chain.json"));
    CHECK(to_json(toy_pmc()).dump(2) + "\n" == read("toy_pmc.json"));
}

TEST_CASE("every in-range valuation of the parametric toy chain is well-defined") {
    MarkovChain pmc = toy_pmc();
    std::mt19937 rng(40);
    std::uniform_int_distribution<int> den(1, 50);
    for (int round = 0; round < 20; ++round) {
        int dp = den(rng), dq = den(rng);
        Valuation u;
        u.set("p", Rational::from_int(rng() % (dp + 1), dp));
        u.set("q", Rational::from_int(rng() % (dq + 1), dq));
        CHECK(check_well_defined(pmc, u).empty());
    }
}
