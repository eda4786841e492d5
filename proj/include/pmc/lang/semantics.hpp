#pragma once

#include "pmc/chain.hpp"
#include "pmc/lang/ast.hpp"
#include "pmc/polynomial.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pmc::lang {

using StateValues = std::vector<long long>;

struct StateVar {
    std::string name;
    bool is_bool = false;
    long long low = 0;
    long long high = 1;
    long long init = 0;
    std::size_t module_index = 0;

    long long domain_size() const { return high - low + 1; }
};

struct ResolvedUpdate {
    ExprPtr probability; // null = implicit 1
    std::vector<std::pair<std::size_t, ExprPtr>> assignments;
};

struct ResolvedCommand {
    std::size_t module_index = 0;
    std::size_t index_in_module = 0;
    std::string action;
    ExprPtr guard;
    std::vector<ResolvedUpdate> updates;
    SourcePos pos;
};

// One scheduling unit: a named action spanning all modules that mention it,
// or a single anonymous command.
struct ActionInfo {
    std::string display;
    // (module index, commands of that module carrying the action), module order
    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> per_module;
};

struct EvalValue {
    enum class Kind { Bool, Int, Rat };
    Kind kind = Kind::Int;
    bool b = false;
    long long i = 0;
    Polynomial poly;

    static EvalValue boolean(bool v) { return {Kind::Bool, v, 0, {}}; }
    static EvalValue integer(long long v) { return {Kind::Int, false, v, {}}; }
    static EvalValue rational(Polynomial p) { return {Kind::Rat, false, 0, std::move(p)}; }
};

struct ResolvedProgram {
    std::vector<StateVar> variables;
    std::map<std::string, std::size_t> variable_index;
    std::vector<std::string> parameters;
    std::map<std::string, EvalValue> constants;
    std::vector<std::string> module_names;
    std::vector<ResolvedCommand> commands; // flattened, module then source order
    std::vector<ActionInfo> actions;
    std::map<std::string, ExprPtr> labels;
    StateValues initial;
    unsigned shared_bitwidth = 1; // bitwidth of the largest domain

    const StateVar& var(std::size_t i) const { return variables[i]; }
    std::string state_name(const StateValues& values) const;
};

// Name resolution, constant folding, type checking, initial-state
// computation. Throws on duplicate variables, unknown identifiers, type
// errors, non-single init predicates.
ResolvedProgram resolve(const Program& program);

// Evaluates an expression at a state (pass nullptr for stateless contexts).
// Parameters evaluate to polynomials unless `valuation` pins them.
EvalValue eval_expr(const ResolvedProgram& rp, const ExprPtr& e, const StateValues* state,
                    const Valuation* valuation = nullptr);

enum class OverlapPolicy { Multiplicity, Reject };

struct StepOptions {
    OverlapPolicy overlap = OverlapPolicy::Multiplicity;
};

struct StepResult {
    // Successor states with weights, merged, in first-encounter order.
    std::vector<std::pair<StateValues, Polynomial>> successors;
    // Declared branch probabilities of every parametric command instance that
    // fired; each row must evaluate into [0,1] and sum to 1 per valuation.
    std::vector<std::vector<Polynomial>> constraint_rows;
    bool stuttered = false;
};

// One synchronous step: enabled action combinations are selected uniformly
// (overlapping guards give an action combination multiplicity), then each
// module's update fires with its declared probability; reads before writes.
StepResult step_semantics(const ResolvedProgram& rp, const StateValues& state,
                          const StepOptions& options = {});

struct BuildOptions {
    std::size_t state_cap = 1u << 20;
    StepOptions step;
};

struct BuiltModel {
    MarkovChain chain;
    std::vector<StateValues> values; // per state id, BFS order
};

// Forward reachable exploration from the initial state. Targets are the
// states satisfying the given label (empty = no targets).
BuiltModel build_explicit(const ResolvedProgram& rp, const std::string& target_label,
                          const BuildOptions& options = {});

struct OverlapHit {
    std::size_t module_index;
    std::string action;
    StateValues state;
};

// Enumerates reachable states and reports every (module, action, state)
// where two or more same-action guards hold.
std::vector<OverlapHit> check_guard_overlap(const ResolvedProgram& rp,
                                            std::size_t state_cap = 1u << 20);

// --- probability expansion (used by the symbolic engine) -------------------

struct ExpandedCase {
    std::vector<std::pair<std::size_t, long long>> fixings; // variable index -> value
    std::vector<Polynomial> weights;  // normalized: sums to 1 syntactically
    std::vector<Polynomial> declared; // pre-normalization, for well-definedness
    bool poisoned = false;            // probability evaluation failed for this case
    std::string poison_message;
};

struct ExpandedCommand {
    std::size_t command_index; // into ResolvedProgram::commands
    std::vector<ExpandedCase> cases;
};

// Rewrites state-dependent probabilities into per-value cases with constant
// (or parameter-polynomial) weights by enumerating the values of the state
// variables the probability expressions mention.
std::vector<ExpandedCommand> expand_probabilities(const ResolvedProgram& rp);

} // namespace pmc::lang
