#include "pmc/bench/generators.hpp"

#include "pmc/errors.hpp"

#include <random>
#include <sstream>

namespace pmc::bench {

namespace {

// rationals with denominator <= 1000 keep exact arithmetic cheap
std::string seeded_probability(std::mt19937& rng) {
    std::uniform_int_distribution<int> den_dist(2, 1000);
    int den = den_dist(rng);
    std::uniform_int_distribution<int> num_dist(1, den - 1);
    int num = num_dist(rng);
    return std::to_string(num) + "/" + std::to_string(den);
}

constexpr const char* kWeatherP[7] = {"0.1", "0.2", "0.41", "0.94", "0.434", "0.4341", "0.4345"};
constexpr const char* kWeatherQ[7] = {"0.2", "0.3", "0.45", "0.243", "0.293", "0.2934", "0.2939"};
constexpr const char* kQueueP[8] = {"0.4", "0.5", "0.65", "0.75", "0.85", "0.9", "0.92", "0.96"};

} // namespace

std::string gen_factories(unsigned n, bool parametric, unsigned long seed) {
    if (n < 1) throw Error(ErrorKind::TypeError, "factories needs n >= 1");
    std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
    std::ostringstream os;
    os << "dtmc\n\n";
    if (parametric) {
        os << "const double ";
        for (unsigned i = 1; i <= n; ++i) os << "p" << i << ", ";
        for (unsigned i = 1; i <= n; ++i) os << "q" << i << (i == n ? "" : ", ");
        os << ";\n";
    } else {
        for (unsigned i = 1; i <= n; ++i) {
            os << "const double p" << i << " = " << seeded_probability(rng) << ";\n";
            os << "const double q" << i << " = " << seeded_probability(rng) << ";\n";
        }
    }
    os << "\nmodule F1\n";
    os << "    c1 : bool init false;\n";
    os << "    [a] !c1 -> p1: (c1'=1) + 1-p1: (c1'=0);\n";
    os << "    [a] c1 -> q1: (c1'=0) + 1-q1: (c1'=1);\n";
    os << "endmodule\n";
    for (unsigned i = 2; i <= n; ++i) {
        os << "module F" << i << " = F1[c1=c" << i << ",p1=p" << i << ",q1=q" << i
           << "] endmodule\n";
    }
    os << "\nlabel \"allStrike\" = ";
    for (unsigned i = 1; i <= n; ++i) os << (i > 1 ? " & " : "") << "c" << i;
    os << ";\n";
    return os.str();
}

namespace {

void weather_factories(std::ostringstream& os, unsigned n) {
    for (unsigned i = 1; i <= n; ++i) {
        os << "const double p" << i << " = " << kWeatherP[(i - 1) % 7] << ";\n";
        os << "const double q" << i << " = " << kWeatherQ[(i - 1) % 7] << ";\n\n";
    }
}

void weather_factory_modules(std::ostringstream& os, unsigned n) {
    os << "module factory1\n";
    os << "    state1 : bool init false;\n";
    os << "    [act] state1 & sun  -> 0.3 * p1: (state1'=true) + 1-(0.3 * p1): (state1'=false);\n";
    os << "    [act] !state1 & sun -> 0.7 * q1: (state1'=true) + 1-(0.7 * q1): (state1'=false);\n";
    os << "    [act] state1 & !sun -> 0.6 * p1: (state1'=true) + 1-(0.6 * p1): (state1'=false);\n";
    os << "    [act] !state1 & !sun -> 0.4 * q1: (state1'=true) + 1-(0.4 * q1): (state1'=false);\n";
    os << "endmodule\n";
    for (unsigned i = 2; i <= n; ++i) {
        os << "module factory" << i << " = factory1[state1=state" << i << ",p1=p" << i << ",q1=q"
           << i << "] endmodule\n";
    }
    os << "\nlabel \"allStrike\" = ";
    for (unsigned i = 1; i <= n; ++i) os << (i > 1 ? " & " : "") << "state" << i;
    os << ";\n";
}

} // namespace

std::string gen_weather(unsigned n) {
    if (n < 1) throw Error(ErrorKind::TypeError, "weather needs n >= 1");
    std::ostringstream os;
    os << "dtmc\n\n";
    weather_factories(os, n);
    os << "\nmodule weathermodule\n";
    os << "    sun : bool init true;\n";
    os << "    [act]  sun -> 0.7: (sun'=sun) + 0.3: (sun'=!sun);\n";
    os << "    [act] !sun -> 0.4: (sun'=sun) + 0.6: (sun'=!sun);\n";
    os << "endmodule\n\n";
    weather_factory_modules(os, n);
    return os.str();
}

std::string gen_weather2(unsigned n) {
    if (n < 1) throw Error(ErrorKind::TypeError, "weather2 needs n >= 1");
    std::ostringstream os;
    os << "dtmc\n\n";
    weather_factories(os, n);
    os << "\nmodule windmodule\n";
    os << "    wind : bool init false;\n";
    os << "    [act] wind -> 0.8: (wind'=true) + 0.2: (wind'=false);\n";
    os << "    [act] !wind -> 0.3: (wind'=true) + 0.7: (wind'=false);\n";
    os << "endmodule\n\n";
    os << "module sunmodule\n";
    os << "    sun : bool init true;\n";
    os << "    [act] sun & !wind -> 0.8: (sun'=true) + 0.2: (sun'=false);\n";
    os << "    [act] sun & wind -> 0.4: (sun'=true) + 0.6: (sun'=false);\n";
    os << "    [act] !sun & !wind -> 0.5: (sun'=true) + 0.5: (sun'=false);\n";
    os << "    [act] !sun & wind -> 0.2: (sun'=true) + 0.8: (sun'=false);\n";
    os << "endmodule\n\n";
    weather_factory_modules(os, n);
    return os.str();
}

std::string gen_queues(unsigned k, unsigned q) {
    if (k < 4) throw Error(ErrorKind::TypeError, "queues needs K >= 4");
    if (q < 1) throw Error(ErrorKind::TypeError, "queues needs Q >= 1");
    std::ostringstream os;
    os << "dtmc\n\n";
    for (unsigned i = 1; i <= k; ++i) {
        os << "const double p" << i << "=" << kQueueP[(i - 1) % 8] << ";\n";
    }
    os << "\nconst int N = " << q << ";\n";
    for (unsigned i = 1; i <= k; ++i) os << "const int N" << i << " = N;\n";
    os << "\nmodule queue1\n";
    os << "    pos1 : [0..N1] init 0;\n";
    os << "    [step] pos1 < N1 -> p1: (pos1'=pos1+1) + 1-p1: (pos1'=pos1);\n";
    os << "    [step] pos1 = N1 -> 1: (pos1'=pos1);\n";
    os << "endmodule\n";
    for (unsigned i = 2; i <= k; ++i) {
        os << "module queue" << i << "=queue1[pos1=pos" << i << ",p1=p" << i << ",N1=N" << i
           << "] endmodule\n";
    }
    os << "\nlabel \"target\" = pos1=N1 & pos2=N2 & pos3=N3 & (";
    for (unsigned i = 4; i <= k; ++i) {
        os << (i > 4 ? " | " : "") << "pos" << i << " < N" << i;
    }
    os << ");\n";
    return os.str();
}

std::string gen_herman(unsigned n, bool random_biases, unsigned long seed,
                       const std::vector<bool>& init_bits) {
    if (n % 2 == 0) throw Error(ErrorKind::EvenN, "herman needs an odd ring size");
    if (n < 3) throw Error(ErrorKind::EvenN, "herman needs n >= 3");
    if (!init_bits.empty() && init_bits.size() != n) {
        throw Error(ErrorKind::TypeError, "herman init bits must match the ring size");
    }
    std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
    std::ostringstream os;
    os << "dtmc\n\n";
    if (random_biases) {
        for (unsigned i = 1; i <= n; ++i) {
            os << "const double b" << i << " = " << seeded_probability(rng) << ";\n";
        }
        os << "\n";
    }
    for (unsigned i = 1; i <= n; ++i) {
        unsigned left = i == 1 ? n : i - 1;
        bool init = init_bits.empty() ? true : init_bits[i - 1];
        std::string bias = random_biases ? "b" + std::to_string(i) : "0.5";
        os << "module P" << i << "\n";
        os << "    x" << i << " : bool init " << (init ? "true" : "false") << ";\n";
        os << "    [step] x" << i << " = x" << left << " -> " << bias << ": (x" << i
           << "'=true) + 1-" << bias << ": (x" << i << "'=false);\n";
        os << "    [step] !(x" << i << " = x" << left << ") -> 1: (x" << i << "'=x" << left
           << ");\n";
        os << "endmodule\n";
    }
    os << "\nlabel \"stable\" = ExactlyOneOf(";
    for (unsigned i = 1; i <= n; ++i) {
        unsigned left = i == 1 ? n : i - 1;
        os << (i > 1 ? ", " : "") << "x" << i << " = x" << left;
    }
    os << ");\n";
    return os.str();
}

std::string generate(const BenchSpec& spec) {
    if (spec.family == "factories") return gen_factories(spec.size, spec.parametric, spec.seed);
    if (spec.family == "weather") return gen_weather(spec.size);
    if (spec.family == "weather2") return gen_weather2(spec.size);
    if (spec.family == "queues") return gen_queues(spec.size, spec.capacity);
    if (spec.family == "herman") {
        return gen_herman(spec.size, spec.random_biases, spec.seed, spec.herman_init);
    }
    throw Error(ErrorKind::TypeError, "unknown benchmark family '" + spec.family + "'");
}

} // namespace pmc::bench
