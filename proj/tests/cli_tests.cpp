// End-to-end checks of the command-line surface: exit codes, output schemas,
// determinism of golden outputs modulo timing columns.
//
// usage: cli_tests <path-to-pmc-binary>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace {

int failures = 0;

#define EXPECT(cond, msg)                                        \
    do {                                                         \
        if (!(cond)) {                                           \
            std::fprintf(stderr, "FAIL: %s\n", msg);             \
            ++failures;                                          \
        }                                                        \
    } while (0)

std::string g_binary;
std::filesystem::path g_dir;

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

RunResult run(const std::string& args) {
    std::filesystem::path out = g_dir / "stdout.txt";
    std::filesystem::path err = g_dir / "stderr.txt";
    std::string cmd = g_binary + " " + args + " > " + out.string() + " 2> " + err.string();
    int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out);
    result.err = slurp(err);
    return result;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

// strips every time-valued cell/field so golden comparisons ignore timing
std::string strip_times(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        auto time_field = line.find("\"time_ms\"");
        if (time_field != std::string::npos) continue;
        auto build_field = line.find("\"build_ms\"");
        if (build_field != std::string::npos) continue;
        auto eval_field = line.find("\"eval_ms\"");
        if (eval_field != std::string::npos) continue;
        out << line << "\n";
    }
    return out.str();
}

std::string strip_csv_column(const std::string& text, std::size_t column) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i == column) continue;
            out << cells[i] << (i + 1 == cells.size() ? "" : ",");
        }
        out << "\n";
    }
    return out.str();
}

const char* kToyModel = R"(
dtmc
module toy
    x : [0..1] init 0;
    y : [0..1] init 0;
    [] x=0 & y=0 -> 0.6: (x'=0)&(y'=0) + 0.4: (x'=0)&(y'=1);
    [] x=0 & y=1 -> 0.5: (x'=1)&(y'=0) + 0.5: (x'=1)&(y'=1);
    [] x=1 & y=0 -> 0.6: (x'=0)&(y'=0) + 0.4: (x'=1)&(y'=1);
    [] x=1 & y=1 -> 0.5: (x'=1)&(y'=0) + 0.5: (x'=1)&(y'=1);
endmodule
label "goal" = x=1 & y=0;
)";

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: cli_tests <pmc-binary>\n");
        return 2;
    }
    g_binary = argv[1];
    g_dir = std::filesystem::temp_directory_path() /
            ("pmc-cli-tests-" + std::to_string(::getpid()));
    std::filesystem::create_directories(g_dir);
    std::filesystem::path toy = g_dir / "toy.pm";
    write_file(toy, kToyModel);

    // worked example across all engines, machine-readable output
    {
        RunResult r = run("check --model " + toy.string() + " --label goal --horizon 3 --engine all");
        EXPECT(r.exit_code == 0, "check exits 0");
        EXPECT(contains(r.out, "\"fraction\": \"21/50\""), "check finds 21/50");
        EXPECT(contains(r.out, "\"agreement\": true"), "check reports agreement");
        EXPECT(contains(r.out, "\"decimal\": \"0.420000000000\""), "check formats the decimal");
    }

    // identical runs differ only in timing fields
    {
        RunResult a = run("check --model " + toy.string() + " --label goal --horizon 3");
        RunResult b = run("check --model " + toy.string() + " --label goal --horizon 3");
        EXPECT(strip_times(a.out) == strip_times(b.out), "check output is deterministic");
    }

    // exit code contract
    {
        RunResult r = run("check --model " + toy.string());
        EXPECT(r.exit_code == 2, "missing required options exit 2");
        write_file(g_dir / "broken.pm", "dtmc\nmodule m\n");
        RunResult broken =
            run("check --model " + (g_dir / "broken.pm").string() + " --label goal --horizon 1");
        EXPECT(broken.exit_code == 3, "syntax errors exit 3");
        RunResult missing = run("check --model " + (g_dir / "missing.pm").string() +
                                " --label goal --horizon 1");
        EXPECT(missing.exit_code == 3, "missing files exit 3");
        RunResult injected = run("check --model " + toy.string() +
                                 " --label goal --horizon 3 --engine all --inject-error add");
        EXPECT(injected.exit_code == 5, "engine disagreement exits 5");
        EXPECT(contains(injected.out, "\"agreement\": false"), "disagreement is reported");
    }

    // cap errors exit 4
    {
        RunResult r = run("bench gen --family factories --size 4 --seed 3 -o " +
                          (g_dir / "f4.pm").string());
        EXPECT(r.exit_code == 0, "bench gen succeeds");
        RunResult capped = run("check --model " + (g_dir / "f4.pm").string() +
                               " --label allStrike --horizon 2 --engine explicit --state-cap 3");
        EXPECT(capped.exit_code == 4, "state cap exits 4");
    }

    // per-state table matches the worked example
    {
        RunResult r = run("check --model " + toy.string() + " --label goal --horizon 3 " +
                          "--engine explicit --table " + (g_dir / "table.csv").string());
        EXPECT(r.exit_code == 0, "table emission succeeds");
        std::string table = slurp(g_dir / "table.csv");
        EXPECT(table.rfind("state,h,probability\n", 0) == 0, "table header");
        EXPECT(contains(table, "0,3,21/50"), "table h=3 initial entry");
        EXPECT(contains(table, "1,2,3/4"), "table h=2 entry");
    }

    // bench gen is byte-deterministic per seed
    {
        run("bench gen --family herman --size 5 --random-biases --seed 9 -o " +
            (g_dir / "h1.pm").string());
        run("bench gen --family herman --size 5 --random-biases --seed 9 -o " +
            (g_dir / "h2.pm").string());
        run("bench gen --family herman --size 5 --random-biases --seed 10 -o " +
            (g_dir / "h3.pm").string());
        EXPECT(slurp(g_dir / "h1.pm") == slurp(g_dir / "h2.pm"), "same seed, same text");
        EXPECT(slurp(g_dir / "h1.pm") != slurp(g_dir / "h3.pm"), "different seed, different text");
    }

    // sampling: values, per-row errors, empty input
    {
        run("bench gen --family factories --size 3 --parametric -o " + (g_dir / "fp.pm").string());
        write_file(g_dir / "vals.csv",
                   "p1,p2,p3,q1,q2,q3\n"
                   "0.5,0.5,0.5,0.1,0.1,0.1\n"
                   "2,0.5,0.5,0.1,0.1,0.1\n"
                   "1/2,1/3,1/4,0.2,0.2,0.2\n");
        RunResult r = run("sample --model " + (g_dir / "fp.pm").string() +
                          " --label allStrike --horizon 1 --valuations " +
                          (g_dir / "vals.csv").string() + " --format csv -o " +
                          (g_dir / "out.csv").string());
        EXPECT(r.exit_code == 0, "sample exits 0");
        std::string out = slurp(g_dir / "out.csv");
        EXPECT(out.rfind("row,decimal,fraction,status,eval_ms\n", 0) == 0, "sample csv header");
        EXPECT(contains(out, "0,0.125000000000,1/8,ok"), "first valuation is 1/8");
        EXPECT(contains(out, "1,,,not-well-defined"), "bad valuation keeps its slot");
        EXPECT(contains(out, "2,0.041666666667,1/24,ok"), "third valuation is 1/24");

        write_file(g_dir / "empty.csv", "p1,p2,p3,q1,q2,q3\n");
        RunResult empty = run("sample --model " + (g_dir / "fp.pm").string() +
                              " --label allStrike --horizon 1 --valuations " +
                              (g_dir / "empty.csv").string() + " --format csv -o " +
                              (g_dir / "empty_out.csv").string());
        EXPECT(empty.exit_code == 0, "empty sample exits 0");
        EXPECT(slurp(g_dir / "empty_out.csv") == "row,decimal,fraction,status,eval_ms\n",
               "empty sample emits only the header");
    }

    // bounds sweep: nested intervals with a trivial upper bound on the toy
    {
        RunResult r = run("bounds --model " + toy.string() +
                          " --label goal --horizon 5 --sweep --format csv");
        EXPECT(r.exit_code == 0, "bounds exits 0");
        std::istringstream in(r.out);
        std::string line;
        std::getline(in, line);
        EXPECT(line == "h,lower_fraction,lower_decimal,upper_fraction,upper_decimal",
               "bounds csv header");
        bool lower_at_3 = false;
        while (std::getline(in, line)) {
            EXPECT(contains(line, ",1,1.000000000000"), "upper bound stays 1");
            if (line.rfind("3,", 0) == 0) lower_at_3 = contains(line, "21/50");
        }
        EXPECT(lower_at_3, "lower bound at h=3 is 21/50");
    }

    // stats: documented header, byte-exact
    {
        RunResult r = run("stats --model " + toy.string() + " --label goal --horizon 3");
        EXPECT(r.exit_code == 0, "stats exits 0");
        std::istringstream in(r.out);
        std::string header;
        std::getline(in, header);
        EXPECT(header == "model,h,engine,states,nodes,leaves,vector_nodes,vector_leaves,"
                         "coins_per_step,distinct_weights,time_ms",
               "stats header is the documented schema");
    }

    // bench run: documented header and determinism modulo the time column
    {
        RunResult a = run("bench run --family factories --size-from 2 --size-to 4 --horizon 5 "
                          "--engine all --seed 8");
        RunResult b = run("bench run --family factories --size-from 2 --size-to 4 --horizon 5 "
                          "--engine all --seed 8");
        EXPECT(a.exit_code == 0, "bench run exits 0");
        std::istringstream in(a.out);
        std::string header;
        std::getline(in, header);
        EXPECT(header == "family,size,h,engine,decimal,states,nodes,leaves,time_ms,status",
               "bench run header is the documented schema");
        EXPECT(strip_csv_column(a.out, 8) == strip_csv_column(b.out, 8),
               "bench run is deterministic modulo timing");
        EXPECT(contains(a.out, "factories,3,5,wmc"), "bench run covers the sweep");
    }

    // parametric check needs pinned parameters
    {
        RunResult r = run("check --model " + (g_dir / "fp.pm").string() +
                          " --label allStrike --horizon 1 --engine wmc");
        EXPECT(r.exit_code == 3, "parametric check without --param exits 3");
        RunResult pinned = run(
            "check --model " + (g_dir / "fp.pm").string() +
            " --label allStrike --horizon 1 --engine all --param p1=0.5 --param p2=0.5 "
            "--param p3=0.5 --param q1=0.1 --param q2=0.1 --param q3=0.1");
        EXPECT(pinned.exit_code == 0, "pinned parametric check exits 0");
        EXPECT(contains(pinned.out, "\"fraction\": \"1/8\""), "pinned check value");
    }

    // DOT export of the solution BDD
    {
        RunResult r = run("check --model " + toy.string() + " --label goal --horizon 3 " +
                          "--engine wmc --dot " + (g_dir / "phi.dot").string());
        EXPECT(r.exit_code == 0, "dot export exits 0");
        std::string dot = slurp(g_dir / "phi.dot");
        EXPECT(contains(dot, "digraph"), "dot file has a graph");
        EXPECT(contains(dot, "u(toy."), "dot file names the coin sites");
    }

    std::filesystem::remove_all(g_dir);
    if (failures == 0) {
        std::printf("cli_tests: all checks passed\n");
        return 0;
    }
    std::printf("cli_tests: %d checks failed\n", failures);
    return 1;
}
