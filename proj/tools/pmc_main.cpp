#include "pmc/bench/generators.hpp"
#include "pmc/chain_json.hpp"
#include "pmc/engine/add.hpp"
#include "pmc/engine/explicit.hpp"
#include "pmc/engine/wmc.hpp"
#include "pmc/errors.hpp"
#include "pmc/lang/parser.hpp"
#include "pmc/lang/semantics.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace pmc;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitModelError = 3;
constexpr int kExitCap = 4;
constexpr int kExitDisagreement = 5;

double ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

std::size_t env_cap(const char* name, std::size_t fallback) {
    if (const char* value = std::getenv(name)) {
        char* end = nullptr;
        unsigned long long parsed = std::strtoull(value, &end, 10);
        if (end && *end == '\0' && parsed > 0) return static_cast<std::size_t>(parsed);
    }
    return fallback;
}

struct ModelContext {
    lang::Program program;
    lang::ResolvedProgram resolved;
    std::string label;
    Valuation params;
    std::size_t state_cap = 0;
};

ModelContext load_model(const std::string& path, const std::string& label,
                        const std::vector<std::string>& param_args, std::size_t state_cap) {
    ModelContext ctx;
    ctx.program = lang::parse_file(path);
    ctx.resolved = lang::resolve(ctx.program);
    ctx.label = label;
    ctx.state_cap = state_cap;
    if (!label.empty() && !ctx.resolved.labels.count(label)) {
        throw Error(ErrorKind::UnknownVariable, "unknown label \"" + label + "\"");
    }
    for (const std::string& arg : param_args) {
        auto eq = arg.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::SyntaxError, "--param expects name=value, got '" + arg + "'");
        }
        auto value = Rational::parse(arg.substr(eq + 1));
        if (!value) {
            throw Error(ErrorKind::SyntaxError, "cannot parse parameter value in '" + arg + "'");
        }
        ctx.params.set(arg.substr(0, eq), *value);
    }
    return ctx;
}

// explicit chain with parameters substituted when the command line pins them
MarkovChain concrete_chain(const ModelContext& ctx) {
    lang::BuildOptions options;
    options.state_cap = ctx.state_cap;
    lang::BuiltModel built = lang::build_explicit(ctx.resolved, ctx.label, options);
    if (!built.chain.is_parametric()) return std::move(built.chain);
    if (ctx.params.values.empty()) {
        throw Error(ErrorKind::NotWellDefined,
                    "model is parametric; pass --param name=value or use `sample`");
    }
    return instantiate(built.chain, ctx.params);
}

std::string decimal(const Rational& q) { return q.decimal_str(12); }

json value_json(const Rational& q) {
    return json{{"fraction", q.str()}, {"decimal", decimal(q)}};
}

int classify(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::StateCapExceeded:
        case ErrorKind::BudgetExceeded:
        case ErrorKind::SizeCap:
            return kExitCap;
        default:
            return kExitModelError;
    }
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::SyntaxError, "cannot open output file '" + path + "'");
    }
    return out;
}

struct EngineRun {
    std::string name;
    Rational value;
    double time_ms = 0;
    json stats;
};

// --- check -----------------------------------------------------------------

int cmd_check(const std::string& model, const std::string& label, unsigned horizon,
              const std::string& engine, const std::string& format, const std::string& table_path,
              const std::string& dot_path, const std::vector<std::string>& params,
              std::size_t state_cap, const std::string& inject) {
    ModelContext ctx = load_model(model, label, params, state_cap);
    std::vector<EngineRun> runs;
    bool want_explicit = engine == "explicit" || engine == "all";
    bool want_add = engine == "add" || engine == "all";
    bool want_wmc = engine == "wmc" || engine == "all";

    std::optional<MarkovChain> chain;
    auto the_chain = [&]() -> const MarkovChain& {
        if (!chain) chain = concrete_chain(ctx);
        return *chain;
    };

    if (want_explicit) {
        auto start = std::chrono::steady_clock::now();
        const MarkovChain& mc = the_chain();
        auto values = engine::bounded_reach_explicit(mc, horizon);
        EngineRun run;
        run.name = "explicit";
        run.value = values[mc.initial()];
        run.stats["states"] = mc.num_states();
        run.time_ms = ms_since(start);
        runs.push_back(std::move(run));
        if (!table_path.empty()) {
            auto out = open_output(table_path);
            engine::write_reach_csv(out, mc, horizon);
        }
    }
    if (want_add) {
        auto start = std::chrono::steady_clock::now();
        const MarkovChain& mc = the_chain();
        engine::AddEngine add(mc);
        auto result = add.bounded_reach(horizon);
        EngineRun run;
        run.name = "add";
        run.value = result.value_at_initial.constant_value();
        run.stats["matrix_nodes"] = add.manager().node_count(add.transition_add_absorbing());
        run.stats["matrix_leaves"] =
            add.manager().terminal_values(add.transition_add_absorbing()).size();
        run.stats["vector_nodes"] = result.stats.back().vector_nodes;
        run.stats["vector_leaves"] = result.stats.back().vector_leaves;
        run.time_ms = ms_since(start);
        runs.push_back(std::move(run));
    }
    if (want_wmc) {
        auto start = std::chrono::steady_clock::now();
        wmc::SolutionFunction sf = wmc::unroll_program(ctx.resolved, ctx.label, horizon);
        EngineRun run;
        run.name = "wmc";
        run.value = sf.evaluate(ctx.params);
        run.stats["bdd_nodes"] = sf.node_count();
        run.stats["coins_per_step"] = sf.coins_per_step();
        if (ctx.resolved.parameters.empty()) {
            run.stats["distinct_weights"] = sf.distinct_weight_values().size();
        }
        run.time_ms = ms_since(start);
        runs.push_back(std::move(run));
        if (!dot_path.empty()) {
            auto out = open_output(dot_path);
            out << sf.to_dot();
        }
    }

    for (auto& run : runs) {
        if (run.name == inject) run.value += Rational::from_int(1, 1000000);
    }

    bool agree = true;
    for (const auto& run : runs) agree = agree && run.value == runs.front().value;

    json out;
    out["model"] = model;
    out["label"] = label;
    out["horizon"] = horizon;
    json engines = json::object();
    for (const auto& run : runs) {
        json e = run.stats;
        e["value"] = value_json(run.value);
        e["time_ms"] = run.time_ms;
        engines[run.name] = std::move(e);
    }
    out["engines"] = std::move(engines);
    out["agreement"] = agree;
    if (agree) out["value"] = value_json(runs.front().value);

    if (format == "json") {
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "engine,fraction,decimal,time_ms\n";
        for (const auto& run : runs) {
            std::cout << run.name << "," << run.value.str() << "," << decimal(run.value) << ","
                      << run.time_ms << "\n";
        }
    }
    if (!agree) {
        std::cerr << "error: engines disagree\n";
        return kExitDisagreement;
    }
    return kExitOk;
}

// --- sample ------------------------------------------------------------------

std::vector<Valuation> read_valuations(const std::string& path,
                                       const std::vector<std::string>& parameters) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::SyntaxError, "cannot open valuations file '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) return {};
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    for (const auto& name : header) {
        if (std::find(parameters.begin(), parameters.end(), name) == parameters.end()) {
            throw Error(ErrorKind::UnknownVariable, "unknown parameter '" + name + "' in header");
        }
    }
    std::vector<Valuation> out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        Valuation u;
        std::size_t i = 0;
        while (std::getline(ls, cell, ',')) {
            if (i >= header.size()) {
                throw Error(ErrorKind::SyntaxError, "row has more cells than the header");
            }
            auto value = Rational::parse(cell);
            if (!value) {
                throw Error(ErrorKind::SyntaxError, "cannot parse value '" + cell + "'");
            }
            u.set(header[i++], *value);
        }
        if (i != header.size()) {
            throw Error(ErrorKind::SyntaxError, "row has fewer cells than the header");
        }
        out.push_back(std::move(u));
    }
    return out;
}

int cmd_sample(const std::string& model, const std::string& label, unsigned horizon,
               const std::string& valuations_path, const std::string& output,
               const std::string& arith, const std::string& format, std::size_t state_cap) {
    ModelContext ctx = load_model(model, label, {}, state_cap);
    if (ctx.resolved.parameters.empty()) {
        throw Error(ErrorKind::TypeError, "sampling needs a parametric model");
    }
    auto build_start = std::chrono::steady_clock::now();
    wmc::SolutionFunction sf = wmc::unroll_program(ctx.resolved, ctx.label, horizon);
    sf.freeze();
    double build_ms = ms_since(build_start);
    std::vector<Valuation> valuations = read_valuations(valuations_path, ctx.resolved.parameters);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!output.empty()) {
        file = open_output(output);
        os = &file;
    }

    bool exact = arith == "exact";
    json rows = json::array();
    std::ostringstream csv;
    csv << "row,decimal,fraction,status,eval_ms\n";
    for (std::size_t i = 0; i < valuations.size(); ++i) {
        auto start = std::chrono::steady_clock::now();
        wmc::SampleOutcome outcome;
        try {
            if (exact) {
                outcome.value = sf.evaluate(valuations[i]);
                outcome.value_float = outcome.value.to_double();
            } else {
                outcome.value_float = sf.evaluate_float(valuations[i]);
            }
            outcome.ok = true;
        } catch (const Error& e) {
            outcome.error = e.what();
        }
        double eval_ms = ms_since(start);
        if (format == "json") {
            json row;
            row["row"] = i;
            row["status"] = outcome.ok ? "ok" : "not-well-defined";
            if (outcome.ok && exact) {
                row["value"] = value_json(outcome.value);
            } else if (outcome.ok) {
                row["value"] = outcome.value_float;
            } else {
                row["error"] = outcome.error;
            }
            row["eval_ms"] = eval_ms;
            rows.push_back(std::move(row));
        } else {
            csv << i << ",";
            if (outcome.ok && exact) {
                csv << decimal(outcome.value) << "," << outcome.value.str() << ",ok,";
            } else if (outcome.ok) {
                csv << outcome.value_float << ",,ok,";
            } else {
                csv << ",,not-well-defined,";
            }
            csv << eval_ms << "\n";
        }
    }
    if (format == "json") {
        json out;
        out["model"] = model;
        out["label"] = label;
        out["horizon"] = horizon;
        out["build_ms"] = build_ms;
        out["bdd_nodes"] = sf.node_count();
        out["rows"] = std::move(rows);
        *os << out.dump(2) << "\n";
    } else {
        std::cerr << "build_ms=" << build_ms << " bdd_nodes=" << sf.node_count() << "\n";
        *os << csv.str();
    }
    return kExitOk;
}

// --- bounds --------------------------------------------------------------

int cmd_bounds(const std::string& model, const std::string& label, unsigned horizon, bool sweep,
               const std::string& format, std::size_t state_cap) {
    ModelContext ctx = load_model(model, label, {}, state_cap);
    json rows = json::array();
    std::ostringstream csv;
    csv << "h,lower_fraction,lower_decimal,upper_fraction,upper_decimal\n";
    unsigned from = sweep ? 1 : horizon;
    for (unsigned h = from; h <= horizon; ++h) {
        wmc::Bounds b = wmc::indefinite_bounds_program(ctx.resolved, ctx.label, h, ctx.state_cap);
        rows.push_back(json{{"h", h},
                            {"lower", value_json(b.lower)},
                            {"upper", value_json(b.upper)},
                            {"gap", value_json(b.upper - b.lower)}});
        csv << h << "," << b.lower.str() << "," << decimal(b.lower) << "," << b.upper.str() << ","
            << decimal(b.upper) << "\n";
    }
    if (format == "json") {
        json out;
        out["model"] = model;
        out["label"] = label;
        out["bounds"] = std::move(rows);
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << csv.str();
    }
    return kExitOk;
}

// --- stats -----------------------------------------------------------------

const char* kStatsHeader = "model,h,engine,states,nodes,leaves,vector_nodes,vector_leaves,"
                           "coins_per_step,distinct_weights,time_ms";

int cmd_stats(const std::string& model, const std::string& label, unsigned horizon,
              std::size_t state_cap) {
    ModelContext ctx = load_model(model, label, {}, state_cap);
    std::cout << kStatsHeader << "\n";

    auto start = std::chrono::steady_clock::now();
    lang::BuildOptions options;
    options.state_cap = state_cap;
    lang::BuiltModel built = lang::build_explicit(ctx.resolved, ctx.label, options);
    const MarkovChain& mc = built.chain;
    std::cout << model << "," << horizon << ",explicit," << mc.num_states() << ",,,,,,,"
              << ms_since(start) << "\n";

    if (!mc.is_parametric()) {
        start = std::chrono::steady_clock::now();
        engine::AddEngine add(mc);
        auto result = add.bounded_reach(horizon);
        std::cout << model << "," << horizon << ",add," << mc.num_states() << ","
                  << add.manager().node_count(add.transition_add_absorbing()) << ","
                  << add.manager().terminal_values(add.transition_add_absorbing()).size() << ","
                  << result.stats.back().vector_nodes << "," << result.stats.back().vector_leaves
                  << ",,," << ms_since(start) << "\n";
    }

    start = std::chrono::steady_clock::now();
    wmc::SolutionFunction sf = wmc::unroll_program(ctx.resolved, ctx.label, horizon);
    std::cout << model << "," << horizon << ",wmc,," << sf.node_count() << ",,,,"
              << sf.coins_per_step() << ",";
    if (ctx.resolved.parameters.empty()) std::cout << sf.distinct_weight_values().size();
    std::cout << "," << ms_since(start) << "\n";
    return kExitOk;
}

// --- bench run ----------------------------------------------------------

const char* kBenchHeader = "family,size,h,engine,decimal,states,nodes,leaves,time_ms,status";

int cmd_bench_run(const std::string& family, unsigned size_from, unsigned size_to, unsigned horizon,
                  const std::string& engine, const std::string& arith, unsigned capacity,
                  unsigned long seed, double timeout_sec, const std::string& output,
                  std::size_t state_cap) {
    bool exact = arith == "exact";
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!output.empty()) {
        file = open_output(output);
        os = &file;
    }
    *os << kBenchHeader << "\n";
    for (unsigned size = size_from; size <= size_to; ++size) {
        bench::BenchSpec spec;
        spec.family = family;
        spec.size = size;
        spec.capacity = capacity;
        spec.seed = seed;
        lang::ResolvedProgram rp = lang::resolve(lang::parse(bench::generate(spec)));
        std::string model_label = rp.labels.begin()->first;
        std::vector<std::string> engines;
        if (engine == "all") {
            engines = {"explicit", "add", "wmc"};
        } else {
            engines = {engine};
        }
        for (const auto& which : engines) {
            auto start = std::chrono::steady_clock::now();
            std::string status = "ok";
            std::string value, states, nodes, leaves;
            try {
                if (which == "explicit") {
                    lang::BuildOptions options;
                    options.state_cap = state_cap;
                    lang::BuiltModel built = lang::build_explicit(rp, model_label, options);
                    if (exact) {
                        auto result = engine::bounded_reach_explicit(built.chain, horizon);
                        value = result[built.chain.initial()].decimal_str(12);
                    } else {
                        auto result = engine::bounded_reach_explicit_float(built.chain, horizon);
                        std::ostringstream v;
                        v.precision(12);
                        v << std::fixed << result[built.chain.initial()];
                        value = v.str();
                    }
                    states = std::to_string(built.chain.num_states());
                } else if (which == "add") {
                    lang::BuildOptions options;
                    options.state_cap = state_cap;
                    lang::BuiltModel built = lang::build_explicit(rp, model_label, options);
                    engine::AddEngine add(built.chain);
                    auto result = add.bounded_reach(horizon);
                    value = result.value_at_initial.constant_value().decimal_str(12);
                    states = std::to_string(built.chain.num_states());
                    nodes =
                        std::to_string(add.manager().node_count(add.transition_add_absorbing()));
                    leaves = std::to_string(
                        add.manager().terminal_values(add.transition_add_absorbing()).size());
                } else {
                    wmc::SolutionFunction sf = wmc::unroll_program(rp, model_label, horizon);
                    if (exact) {
                        value = sf.evaluate().decimal_str(12);
                    } else {
                        std::ostringstream v;
                        v.precision(12);
                        v << std::fixed << sf.evaluate_float();
                        value = v.str();
                    }
                    nodes = std::to_string(sf.node_count());
                    leaves = std::to_string(sf.distinct_weight_values().size());
                }
            } catch (const Error& e) {
                status = std::string("error:") + to_string(e.kind());
            }
            double elapsed = ms_since(start);
            if (timeout_sec > 0 && elapsed > timeout_sec * 1000) status = "timeout";
            *os << family << "," << size << "," << horizon << "," << which << ","
                << (status == "ok" ? value : "") << "," << states << "," << nodes << "," << leaves
                << "," << elapsed << "," << status << "\n";
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-horizon probabilistic model checker"};
    app.require_subcommand(1);

    std::string model, label, engine = "all", arith = "exact", format = "json";
    std::string valuations, output, table_path, dot_path, inject;
    std::vector<std::string> params;
    unsigned horizon = 1;
    bool sweep = false;
    std::size_t state_cap = env_cap("PMC_STATE_CAP", 1u << 20);

    auto* check = app.add_subcommand("check", "bounded reachability of a label");
    check->add_option("--model", model, "model file")->required();
    check->add_option("--label", label, "target label")->required();
    check->add_option("--horizon", horizon, "step bound h")->required();
    check->add_option("--engine", engine, "explicit|add|wmc|all")
        ->check(CLI::IsMember({"explicit", "add", "wmc", "all"}));
    check->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    check->add_option("--param", params, "pin a parameter, name=value");
    check->add_option("--table", table_path, "write the per-state CSV table here");
    check->add_option("--dot", dot_path, "write the WMC BDD in DOT form here");
    check->add_option("--state-cap", state_cap, "explicit state cap");
    check->add_option("--inject-error", inject, "testing aid: perturb one engine's value")
        ->check(CLI::IsMember({"explicit", "add", "wmc"}));

    auto* sample = app.add_subcommand("sample", "evaluate a parametric model at many valuations");
    sample->add_option("--model", model, "model file")->required();
    sample->add_option("--label", label, "target label")->required();
    sample->add_option("--horizon", horizon, "step bound h")->required();
    sample->add_option("--valuations", valuations, "CSV with a parameter-name header")->required();
    sample->add_option("-o,--output", output, "output file (default stdout)");
    sample->add_option("--arith", arith, "exact|float")->check(CLI::IsMember({"exact", "float"}));
    sample->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    sample->add_option("--state-cap", state_cap, "explicit state cap");

    auto* bounds = app.add_subcommand("bounds", "indefinite-horizon sandwich bounds");
    bounds->add_option("--model", model, "model file")->required();
    bounds->add_option("--label", label, "target label")->required();
    bounds->add_option("--horizon", horizon, "step bound h")->required();
    bounds->add_flag("--sweep", sweep, "report every horizon 1..h");
    bounds->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    bounds->add_option("--state-cap", state_cap, "explicit state cap");

    auto* stats = app.add_subcommand("stats", "per-engine structural statistics");
    stats->add_option("--model", model, "model file")->required();
    stats->add_option("--label", label, "target label")->required();
    stats->add_option("--horizon", horizon, "step bound h")->required();
    stats->add_option("--state-cap", state_cap, "explicit state cap");

    auto* bench_cmd = app.add_subcommand("bench", "benchmark model generators");
    bench_cmd->require_subcommand(1);
    std::string family;
    unsigned size = 3, capacity = 3;
    unsigned long seed = 1;
    bool parametric = false, random_biases = false;
    auto* gen = bench_cmd->add_subcommand("gen", "emit one benchmark model");
    gen->add_option("--family", family, "factories|weather|weather2|queues|herman")->required();
    gen->add_option("--size", size, "number of components")->required();
    gen->add_option("--capacity", capacity, "queue capacity Q");
    gen->add_option("--seed", seed, "seed for randomized constants");
    gen->add_flag("--parametric", parametric, "leave probabilities as parameters");
    gen->add_flag("--random-biases", random_biases, "herman (R) variant");
    gen->add_option("-o,--output", output, "output file (default stdout)");

    std::string run_engine = "wmc";
    unsigned size_from = 2, size_to = 4;
    double timeout_sec = 0;
    auto* run = bench_cmd->add_subcommand("run", "sweep a family and emit a CSV table");
    run->add_option("--family", family, "factories|weather|weather2|queues|herman")->required();
    run->add_option("--size-from", size_from, "smallest size");
    run->add_option("--size-to", size_to, "largest size");
    run->add_option("--horizon", horizon, "step bound h")->required();
    run->add_option("--engine", run_engine, "explicit|add|wmc|all")
        ->check(CLI::IsMember({"explicit", "add", "wmc", "all"}));
    run->add_option("--arith", arith, "exact|float (float for scaling sweeps)")
        ->check(CLI::IsMember({"exact", "float"}));
    run->add_option("--capacity", capacity, "queue capacity Q");
    run->add_option("--seed", seed, "seed for randomized constants");
    run->add_option("--timeout", timeout_sec, "per-cell soft timeout in seconds");
    run->add_option("-o,--output", output, "output file (default stdout)");
    run->add_option("--state-cap", state_cap, "explicit state cap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*check) {
            return cmd_check(model, label, horizon, engine, format, table_path, dot_path, params,
                             state_cap, inject);
        }
        if (*sample) {
            return cmd_sample(model, label, horizon, valuations, output, arith, format, state_cap);
        }
        if (*bounds) {
            return cmd_bounds(model, label, horizon, sweep, format, state_cap);
        }
        if (*stats) {
            return cmd_stats(model, label, horizon, state_cap);
        }
        if (*gen) {
            bench::BenchSpec spec;
            spec.family = family;
            spec.size = size;
            spec.capacity = capacity;
            spec.seed = seed;
            spec.parametric = parametric;
            spec.random_biases = random_biases;
            std::string text = bench::generate(spec);
            if (output.empty()) {
                std::cout << text;
            } else {
                open_output(output) << text;
            }
            return kExitOk;
        }
        if (*run) {
            return cmd_bench_run(family, size_from, size_to, horizon, run_engine, arith, capacity,
                                 seed, timeout_sec, output, state_cap);
        }
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return classify(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModelError;
    }
    return kExitUsage;
}
