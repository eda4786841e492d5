#pragma once

#include "pmc/chain.hpp"
#include "pmc/dd.hpp"
#include "pmc/lang/semantics.hpp"

#include <atomic>
#include <memory>
#include <string>
#include <vector>

namespace pmc::wmc {

// One step-indexed binary choice variable and its weight (the probability of
// the high edge, i.e. of taking the lexicographically first alternative).
struct CoinInfo {
    std::string name;
    unsigned step = 0;
    Polynomial weight;
};

// A residual probability that is not a polynomial in the model parameters;
// it is materialized as a fresh symbol whose value num/den is computed per
// valuation.
struct DerivedParam {
    std::string name;
    Polynomial numerator;
    Polynomial denominator;
};

// Conditional-chain encoding of a k-way split: coin j (heads) selects branch
// j with weight w_j / (1 - sum_{i<j} w_i); all tails select the last branch.
struct CoinChain {
    std::vector<Polynomial> weights;
    std::vector<DerivedParam> derived;
};

CoinChain coin_chain(const std::vector<Polynomial>& branch_weights,
                     const std::string& site_prefix = "r");

// A frozen causal-coin BDD plus its parametric weight function: evaluating at
// a valuation yields Pr(<>^{<=h} T) of the instantiated chain, one linear
// bottom-up pass per valuation.
class SolutionFunction {
public:
    SolutionFunction() = default;
    SolutionFunction(SolutionFunction&& other) noexcept { *this = std::move(other); }
    SolutionFunction& operator=(SolutionFunction&& other) noexcept {
        manager_ = std::move(other.manager_);
        root_ = other.root_;
        coins_ = std::move(other.coins_);
        coins_per_step_ = other.coins_per_step_;
        constraint_rows_ = std::move(other.constraint_rows_);
        derived_ = std::move(other.derived_);
        parameters_ = std::move(other.parameters_);
        last_nodes_touched_.store(other.last_nodes_touched_.load());
        return *this;
    }

    dd::DdManager& manager() const { return *manager_; }
    dd::NodeId root() const { return root_; }
    // Freezing is the caller's choice: frozen solution functions are safe to
    // evaluate from several threads.
    void freeze() const { manager_->freeze(); }
    const std::vector<CoinInfo>& coins() const { return coins_; }
    std::size_t coins_per_step() const { return coins_per_step_; }
    std::size_t node_count() const { return manager_->node_count(root_); }
    const std::vector<std::string>& parameters() const { return parameters_; }
    const std::vector<std::vector<Polynomial>>& constraint_rows() const { return constraint_rows_; }

    // Exact weighted model count at the valuation; NotWellDefined when a
    // constraint row fails. Pass an empty valuation for constant models.
    Rational evaluate(const Valuation& u = {}) const;
    double evaluate_float(const Valuation& u = {}) const;

    // DP memo misses of the most recent evaluate call (<= node_count()).
    std::size_t last_nodes_touched() const { return last_nodes_touched_.load(); }

    // Distinct values of the weight function (constant models only).
    std::vector<Rational> distinct_weight_values() const;

    std::string to_dot() const { return manager_->to_dot(root_, "solution"); }

private:
    friend class Unroller;
    friend class ChainUnroller;

    std::shared_ptr<dd::DdManager> manager_;
    dd::NodeId root_ = 0;
    std::vector<CoinInfo> coins_;
    std::size_t coins_per_step_ = 0;
    std::vector<std::vector<Polynomial>> constraint_rows_;
    std::vector<DerivedParam> derived_;
    std::vector<std::string> parameters_;
    mutable std::atomic<std::size_t> last_nodes_touched_ = 0;

    Valuation extend(const Valuation& u) const;
    std::vector<Rational> weights_at(const Valuation& extended) const;
};

// Causal unrolling of an explicit (parametric) chain: one coin chain per
// non-target state per step, step-major variable order, latched target hit.
SolutionFunction unroll_chain(const MarkovChain& mc, unsigned h);

// Causal unrolling of a program without building its state space: coins are
// allocated per (module, command, expansion case, chain position) plus
// uniform-scheduler coins, so independent modules share structure.
SolutionFunction unroll_program(const lang::ResolvedProgram& rp, const std::string& target_label,
                                unsigned h,
                                lang::OverlapPolicy overlap = lang::OverlapPolicy::Multiplicity);

// Same, with an explicit list of target states instead of a label.
SolutionFunction unroll_program_states(const lang::ResolvedProgram& rp,
                                       const std::vector<lang::StateValues>& target_states,
                                       unsigned h,
                                       lang::OverlapPolicy overlap = lang::OverlapPolicy::Multiplicity);

// First-visit race: counts coin assignments whose path reaches a target
// state within h steps without visiting an avoid state earlier.
SolutionFunction unroll_program_reach_avoid(const lang::ResolvedProgram& rp,
                                            const std::vector<lang::StateValues>& target_states,
                                            const lang::ExprPtr& avoid, unsigned h,
                                            lang::OverlapPolicy overlap = lang::OverlapPolicy::Multiplicity);

// Bottom-up weighted model count with per-variable weights: value(v) =
// W(v)*value(high) + (1-W(v))*value(low).
Rational weighted_model_count(const dd::DdManager& m, dd::NodeId root,
                              const std::vector<Rational>& weights_by_var);

// The chain induced by a BDD and weights: inner nodes move to the high child
// with W(var) and to the low child with 1-W(var); terminals are absorbing and
// the true terminal is the target.
MarkovChain bdd_as_mc(const dd::DdManager& m, dd::NodeId root,
                      const std::vector<Rational>& weights_by_var);

struct SampleOutcome {
    bool ok = false;
    Rational value;
    double value_float = 0.0;
    std::string error;
};

// Order-preserving batch evaluation; ill-defined valuations yield per-item
// errors instead of aborting the batch.
std::vector<SampleOutcome> sample_many(const SolutionFunction& sf,
                                       const std::vector<Valuation>& valuations, bool exact = true);

struct Bounds {
    Rational lower;
    Rational upper;
};

// Pr(<>^{<=h} T) <= Pr(<> T) <= 1 - Pr(<>^{<=h} Bad), both sides by WMC.
Bounds indefinite_bounds(const MarkovChain& mc, unsigned h);
Bounds indefinite_bounds_program(const lang::ResolvedProgram& rp, const std::string& target_label,
                                 unsigned h, std::size_t state_cap = 1u << 20);

} // namespace pmc::wmc
