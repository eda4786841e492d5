#pragma once

#include <string>
#include <vector>

namespace pmc::bench {

struct BenchSpec {
    std::string family;          // factories | weather | weather2 | queues | herman
    unsigned size = 3;           // number of factories / queues / processes
    unsigned capacity = 3;       // queue capacity Q
    unsigned long seed = 1;      // randomized constants
    bool parametric = false;     // leave probabilities as parameters (factories)
    bool random_biases = false;  // herman (R) variant
    std::vector<bool> herman_init; // optional initial bits, defaults to all true
};

// Same spec -> byte-identical model text.
std::string generate(const BenchSpec& spec);

std::string gen_factories(unsigned n, bool parametric, unsigned long seed);
std::string gen_weather(unsigned n);
std::string gen_weather2(unsigned n);
std::string gen_queues(unsigned k, unsigned q);
std::string gen_herman(unsigned n, bool random_biases, unsigned long seed,
                       const std::vector<bool>& init_bits = {});

} // namespace pmc::bench
