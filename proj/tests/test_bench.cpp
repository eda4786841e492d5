#include "pmc/bench/generators.hpp"

#include "pmc/chain.hpp"
#include "pmc/engine/add.hpp"
#include "pmc/engine/explicit.hpp"
#include "pmc/engine/wmc.hpp"
#include "pmc/errors.hpp"
#include "pmc/lang/parser.hpp"
#include "pmc/lang/semantics.hpp"

#include <doctest.h>

using namespace pmc;
using namespace pmc::bench;

namespace {

lang::ResolvedProgram resolve_text(const std::string& text) {
    return lang::resolve(lang::parse(text));
}

} // namespace

TEST_CASE("generation is deterministic per spec and seed") {
    BenchSpec spec;
    spec.family = "factories";
    spec.size = 5;
    spec.seed = 42;
    CHECK(generate(spec) == generate(spec));
    spec.family = "herman";
    spec.size = 5;
    spec.random_biases = true;
    CHECK(generate(spec) == generate(spec));
    spec.seed = 43;
    std::string other = generate(spec);
    spec.seed = 42;
    CHECK(generate(spec) != other);
}

TEST_CASE("every family parses, builds, and has targets at its smallest size") {
    std::vector<BenchSpec> specs(5);
    specs[0].family = "factories";
    specs[0].size = 1;
    specs[1].family = "weather";
    specs[1].size = 1;
    specs[2].family = "weather2";
    specs[2].size = 1;
    specs[3].family = "queues";
    specs[3].size = 4;
    specs[3].capacity = 1;
    specs[4].family = "herman";
    specs[4].size = 3;
    for (const auto& spec : specs) {
        CAPTURE(spec.family);
        lang::ResolvedProgram rp = resolve_text(generate(spec));
        std::string label = rp.labels.begin()->first;
        lang::BuiltModel built = lang::build_explicit(rp, label);
        CHECK(!built.chain.targets().empty());
    }
}

TEST_CASE("all engines agree with the oracle on the smallest family instances") {
    std::vector<std::pair<BenchSpec, std::string>> cases;
    BenchSpec factories;
    factories.family = "factories";
    factories.size = 2;
    factories.seed = 7;
    cases.emplace_back(factories, "allStrike");
    BenchSpec weather;
    weather.family = "weather";
    weather.size = 1;
    cases.emplace_back(weather, "allStrike");
    BenchSpec weather2;
    weather2.family = "weather2";
    weather2.size = 1;
    cases.emplace_back(weather2, "allStrike");
    BenchSpec queues;
    queues.family = "queues";
    queues.size = 4;
    queues.capacity = 1;
    cases.emplace_back(queues, "target");
    BenchSpec herman;
    herman.family = "herman";
    herman.size = 3;
    cases.emplace_back(herman, "stable");

    for (const auto& [spec, label] : cases) {
        CAPTURE(spec.family);
        lang::ResolvedProgram rp = resolve_text(generate(spec));
        lang::BuiltModel built = lang::build_explicit(rp, label);
        for (unsigned h = 0; h <= 4; ++h) {
            Rational oracle = enumerate_reaching_paths(built.chain, h).mass_rational();
            CHECK(engine::bounded_reach_explicit(built.chain, h)[built.chain.initial()] == oracle);
            engine::AddEngine add(built.chain);
            CHECK(add.bounded_reach(h).value_at_initial.constant_value() == oracle);
            CHECK(wmc::unroll_program(rp, label, h).evaluate() == oracle);
        }
    }
}

TEST_CASE("weather at one factory has the expected state count") {
    lang::ResolvedProgram rp = resolve_text(gen_weather(1));
    lang::BuiltModel built = lang::build_explicit(rp, "allStrike");
    CHECK(built.chain.num_states() == 4); // sun x strike
    CHECK(rp.labels.count("allStrike") == 1);
}

TEST_CASE("weather uses the fixed constants") {
    std::string text = gen_weather(7);
    CHECK(text.find("const double p7 = 0.4345;") != std::string::npos);
    CHECK(text.find("const double q7 = 0.2939;") != std::string::npos);
    CHECK(text.find("0.7: (sun'=sun)") != std::string::npos);
    lang::ResolvedProgram rp = resolve_text(text);
    CHECK(rp.module_names.size() == 8);
}

TEST_CASE("queues mirrors the listing") {
    std::string text = gen_queues(8, 5);
    CHECK(text.find("const double p8=0.96;") != std::string::npos);
    CHECK(text.find("const int N = 5;") != std::string::npos);
    CHECK(text.find("pos1 < N1 -> p1: (pos1'=pos1+1)") != std::string::npos);
    lang::ResolvedProgram rp = resolve_text(text);
    CHECK(rp.module_names.size() == 8);
    // label: 3 conjuncts and K-3 disjuncts
    const lang::ExprPtr& label = rp.labels.at("target");
    CHECK(label->bin_op == lang::BinOp::And);
    std::string pretty_label = gen_queues(6, 2);
    lang::ResolvedProgram six = resolve_text(pretty_label);
    CHECK(six.labels.count("target") == 1);
}

TEST_CASE("factories at h=1 multiply the strike probabilities") {
    lang::ResolvedProgram rp = resolve_text(gen_factories(5, false, 17));
    Rational expected(1);
    for (int i = 1; i <= 5; ++i) {
        auto it = rp.constants.find("p" + std::to_string(i));
        REQUIRE(it != rp.constants.end());
        expected *= it->second.poly.constant_value();
    }
    CHECK(wmc::unroll_program(rp, "allStrike", 1).evaluate() == expected);

    lang::ResolvedProgram single = resolve_text(gen_factories(1, true, 1));
    wmc::SolutionFunction sf = wmc::unroll_program(single, "allStrike", 1);
    Valuation u;
    u.set("p1", Rational::from_int(1, 2));
    u.set("q1", Rational::from_int(1, 3));
    CHECK(sf.evaluate(u) == Rational::from_int(1, 2));
}

TEST_CASE("herman rejects even rings and accepts stabilized inits") {
    CHECK_THROWS_AS(gen_herman(4, false, 1), Error);
    CHECK_THROWS_AS(gen_herman(1, false, 1), Error);

    // exactly one token in the initial state: probability 1 at h=0
    std::vector<bool> bits{false, false, true};
    lang::ResolvedProgram rp = resolve_text(gen_herman(3, false, 1, bits));
    CHECK(wmc::unroll_program(rp, "stable", 0).evaluate() == Rational(1));

    // default all-true start has all tokens, not stable at h=0
    lang::ResolvedProgram all = resolve_text(gen_herman(3, false, 1));
    CHECK(wmc::unroll_program(all, "stable", 0).evaluate() == Rational(0));
}

TEST_CASE("herman with random biases agrees with the oracle") {
    lang::ResolvedProgram rp = resolve_text(gen_herman(3, true, 77));
    lang::BuiltModel built = lang::build_explicit(rp, "stable");
    CHECK(built.chain.num_states() == 8);
    for (unsigned h = 0; h <= 3; ++h) {
        Rational oracle = enumerate_reaching_paths(built.chain, h).mass_rational();
        CHECK(wmc::unroll_program(rp, "stable", h).evaluate() == oracle);
    }
}

TEST_CASE("unknown family errors out") {
    BenchSpec spec;
    spec.family = "nonsense";
    CHECK_THROWS_AS(generate(spec), Error);
}

TEST_CASE("weather at two factories spans the full product space") {
    lang::ResolvedProgram rp = resolve_text(gen_weather(2));
    lang::BuiltModel built = lang::build_explicit(rp, "allStrike");
    CHECK(built.chain.num_states() == 8); // 2 weather x 4 factory combinations
}
