#pragma once

#include "pmc/polynomial.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pmc {

using StateId = std::uint32_t;

struct StateInfo {
    std::string name;
    std::vector<long long> values; // variable assignment for program-built chains
    bool auxiliary = false;        // inserted by binarize
};

struct Branch {
    StateId target;
    Polynomial weight;
};

// One-step distribution. Branches are sorted by target id, duplicates merged,
// zero-weight branches dropped. For parametric rows the stored weights sum to
// the constant 1 syntactically (the last declared branch is replaced by the
// complement); the declared polynomials live on as constraint rows checked
// per valuation.
class Distribution {
public:
    static Distribution dirac(StateId target);
    static Distribution constants(std::vector<std::pair<StateId, Rational>> branches);
    static Distribution parametric(std::vector<std::pair<StateId, Polynomial>> branches);
    // Branches must already sum to the constant 1 syntactically; the caller
    // supplies the well-definedness rows (e.g. one per command instance for
    // product rows).
    static Distribution with_constraints(std::vector<std::pair<StateId, Polynomial>> branches,
                                         std::vector<std::vector<Polynomial>> constraint_rows);

    const std::vector<Branch>& branches() const { return branches_; }
    // Each row must evaluate entrywise into [0,1] and sum to 1 at a
    // well-defined valuation. Empty for constant rows.
    const std::vector<std::vector<Polynomial>>& constraint_rows() const { return constraint_rows_; }

    bool is_constant() const;
    Rational probability_of(StateId target) const; // 0 when absent; requires constant row

    std::size_t size() const { return branches_.size(); }

private:
    std::vector<Branch> branches_;
    std::vector<std::vector<Polynomial>> constraint_rows_;
};

struct Path {
    std::vector<StateId> states; // nonempty
    std::size_t length() const { return states.size() - 1; }
};

// Finite-state (parametric) Markov chain with dense state ids, a unique
// initial state and a target set. Immutable once built via Builder/validate.
class MarkovChain {
public:
    StateId add_state(StateInfo info);
    void set_initial(StateId s) { initial_ = s; }
    void set_row(StateId s, Distribution d);
    void add_target(StateId s);
    void set_parameters(std::vector<std::string> params) { parameters_ = std::move(params); }

    // Checks structural invariants; throws on violation. Call after building.
    void validate() const;

    std::size_t num_states() const { return states_.size(); }
    const StateInfo& info(StateId s) const { return states_.at(s); }
    StateId initial() const { return initial_; }
    const Distribution& row(StateId s) const;
    const std::vector<StateId>& targets() const { return targets_; }
    bool is_target(StateId s) const { return target_mask_.size() > s && target_mask_[s]; }
    const std::vector<std::string>& parameters() const { return parameters_; }
    bool is_parametric() const { return !parameters_.empty(); }

private:
    std::vector<StateInfo> states_;
    std::vector<Distribution> rows_;
    StateId initial_ = 0;
    std::vector<StateId> targets_;
    std::vector<bool> target_mask_;
    std::vector<std::string> parameters_;
};

// --- well-definedness and instantiation ---------------------------------

struct WellDefinednessIssue {
    StateId state;
    std::size_t row;     // constraint row index
    std::size_t branch;  // entry within the row (== row size for sum issues)
    Rational value;      // evaluated declared weight, or the row sum
    bool row_sum_issue;  // true: the row does not sum to 1
};

// Lists every (state, branch) whose declared weight falls outside [0,1] at u,
// plus one entry per constraint row whose weights do not sum to 1.
std::vector<WellDefinednessIssue> check_well_defined(const MarkovChain& pmc, const Valuation& u);

// Replaces parameters by the valuation; throws NotWellDefined unless the
// report above is empty.
MarkovChain instantiate(const MarkovChain& pmc, const Valuation& u);

// --- paths ----------------------------------------------------------------

Rational path_probability(const MarkovChain& mc, const Path& pi);

struct PathEnumeration {
    std::vector<Path> paths;
    Polynomial mass;

    Rational mass_rational() const { return mass.is_zero() ? Rational(0) : mass.constant_value(); }
};

inline constexpr std::size_t kDefaultPathCap = 1'000'000;

// Brute-force oracle: all first-visit paths from `from` of length <= h ending
// in the target set, together with their probability mass. Works on
// parametric chains (mass is then a polynomial in the parameters).
PathEnumeration enumerate_reaching_paths(const MarkovChain& mc, unsigned h,
                                         std::size_t path_cap = kDefaultPathCap);
PathEnumeration enumerate_reaching_paths_from(const MarkovChain& mc, StateId from, unsigned h,
                                              std::size_t path_cap = kDefaultPathCap);

// --- structural transforms -------------------------------------------------

// Target rows become probability-1 self-loops.
MarkovChain make_absorbing(const MarkovChain& mc);

// Same chain, different target set.
MarkovChain with_targets(const MarkovChain& mc, const std::vector<StateId>& targets);

// States from which no target is reachable (complement of backward
// reachability from the target set).
std::vector<StateId> bad_states(const MarkovChain& mc);

struct BinarizedChain {
    MarkovChain chain;
    // Every original transition takes exactly steps_per_original transitions
    // in the binarized chain.
    unsigned steps_per_original = 1;
    unsigned horizon(unsigned h) const { return steps_per_original * h; }
};

// Bounds the out-degree by two via auxiliary states. All branches of a state
// resolve in the same number of steps, so bounded reachability transfers
// exactly under the horizon map. Constant chains only.
BinarizedChain binarize(const MarkovChain& mc);

} // namespace pmc
