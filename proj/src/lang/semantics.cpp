#include "pmc/lang/semantics.hpp"

#include "pmc/errors.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <sstream>

namespace pmc::lang {

namespace {

Polynomial probability_value(const ResolvedProgram& rp, const ExprPtr& expr,
                             const StateValues* state) {
    if (!expr) return Polynomial(Rational(1));
    EvalValue v = eval_expr(rp, expr, state);
    switch (v.kind) {
        case EvalValue::Kind::Int: return Polynomial(Rational(v.i));
        case EvalValue::Kind::Rat: return v.poly;
        case EvalValue::Kind::Bool:
            throw Error(ErrorKind::TypeError, "boolean update probability");
    }
    throw Error(ErrorKind::Internal, "bad value");
}

// Per-command branch weights at a state: constant rows are validated on the
// spot, parametric rows get the complement convention and produce a
// constraint row.
struct CommandWeights {
    std::vector<Polynomial> weights;
    std::vector<Polynomial> declared;
    bool parametric = false;
};

CommandWeights command_weights(const ResolvedProgram& rp, const ResolvedCommand& cmd,
                               const StateValues& state) {
    CommandWeights out;
    Polynomial sum;
    bool all_constant = true;
    for (const auto& update : cmd.updates) {
        Polynomial w = probability_value(rp, update.probability, &state);
        all_constant = all_constant && w.is_constant();
        sum += w;
        out.declared.push_back(w);
    }
    out.weights = out.declared;
    if (all_constant) {
        Rational total(0);
        for (const auto& w : out.weights) {
            Rational v = w.constant_value();
            if (!v.in_unit_interval()) {
                throw Error(ErrorKind::NotWellDefined,
                            "update probability " + v.str() + " outside [0,1] at state " +
                                rp.state_name(state) + " (command at " +
                                std::to_string(cmd.pos.line) + ":" + std::to_string(cmd.pos.col) +
                                ")");
            }
            total += v;
        }
        if (total != Rational(1)) {
            throw Error(ErrorKind::NotWellDefined,
                        "update probabilities sum to " + total.str() + " at state " +
                            rp.state_name(state) + " (command at " + std::to_string(cmd.pos.line) +
                            ":" + std::to_string(cmd.pos.col) + ")");
        }
        return out;
    }
    out.parametric = true;
    if (sum != Polynomial(Rational(1))) {
        Polynomial rest;
        for (std::size_t i = 0; i + 1 < out.weights.size(); ++i) rest += out.weights[i];
        out.weights.back() = Rational(1) - rest;
    }
    return out;
}

long long assignment_value(const ResolvedProgram& rp, const StateVar& var, const ExprPtr& expr,
                           const StateValues& state, SourcePos pos) {
    EvalValue v = eval_expr(rp, expr, &state);
    long long value;
    if (var.is_bool) {
        if (v.kind != EvalValue::Kind::Bool) {
            throw Error(ErrorKind::TypeError, "non-boolean assigned to '" + var.name + "'");
        }
        value = v.b ? 1 : 0;
    } else {
        if (v.kind == EvalValue::Kind::Int) {
            value = v.i;
        } else if (v.kind == EvalValue::Kind::Rat && v.poly.is_constant() &&
                   v.poly.constant_value().is_integer()) {
            value = v.poly.constant_value().numerator().convert_to<long long>();
        } else {
            throw Error(ErrorKind::TypeError, "non-integer assigned to '" + var.name + "'");
        }
    }
    if (value < var.low || value > var.high) {
        throw Error(ErrorKind::OutOfDomain,
                    "update at " + std::to_string(pos.line) + ":" + std::to_string(pos.col) +
                        " sets " + var.name + "=" + std::to_string(value) + " outside [" +
                        std::to_string(var.low) + ".." + std::to_string(var.high) + "] at state " +
                        rp.state_name(state));
    }
    return value;
}

std::vector<std::vector<std::size_t>> enabled_combinations(const ResolvedProgram& rp,
                                                           const std::vector<bool>& enabled,
                                                           const StepOptions& options) {
    std::vector<std::vector<std::size_t>> combos;
    for (const auto& action : rp.actions) {
        std::vector<std::vector<std::size_t>> lists;
        bool action_enabled = true;
        for (const auto& [mi, cmds] : action.per_module) {
            std::vector<std::size_t> ok;
            for (std::size_t c : cmds) {
                if (enabled[c]) ok.push_back(c);
            }
            if (ok.empty()) {
                action_enabled = false;
                break;
            }
            if (ok.size() >= 2 && options.overlap == OverlapPolicy::Reject) {
                throw Error(ErrorKind::GuardOverlap,
                            "overlapping guards for action '" + action.display + "' in module '" +
                                rp.module_names[mi] + "'");
            }
            lists.push_back(std::move(ok));
        }
        if (!action_enabled) continue;
        std::vector<std::size_t> pick(lists.size(), 0);
        while (true) {
            std::vector<std::size_t> combo;
            for (std::size_t i = 0; i < lists.size(); ++i) combo.push_back(lists[i][pick[i]]);
            combos.push_back(std::move(combo));
            std::size_t i = lists.size();
            while (i > 0) {
                --i;
                if (++pick[i] < lists[i].size()) break;
                pick[i] = 0;
                if (i == 0) goto done;
            }
            if (lists.empty()) break;
        }
    done:;
    }
    return combos;
}

} // namespace

StepResult step_semantics(const ResolvedProgram& rp, const StateValues& state,
                          const StepOptions& options) {
    StepResult result;
    std::vector<bool> enabled(rp.commands.size());
    for (std::size_t i = 0; i < rp.commands.size(); ++i) {
        enabled[i] = eval_expr(rp, rp.commands[i].guard, &state).b;
    }
    auto combos = enabled_combinations(rp, enabled, options);
    std::map<StateValues, std::size_t> successor_index;
    auto add_successor = [&](const StateValues& next, const Polynomial& weight) {
        auto [it, inserted] = successor_index.emplace(next, result.successors.size());
        if (inserted) {
            result.successors.emplace_back(next, weight);
        } else {
            result.successors[it->second].second += weight;
        }
    };

    if (combos.empty()) {
        // deadlock: stutter
        result.stuttered = true;
        add_successor(state, Polynomial(Rational(1)));
        return result;
    }

    Rational selection(1, static_cast<long long>(combos.size()));
    for (const auto& combo : combos) {
        std::vector<CommandWeights> weights;
        for (std::size_t c : combo) {
            CommandWeights w = command_weights(rp, rp.commands[c], state);
            if (w.parametric) result.constraint_rows.push_back(w.declared);
            weights.push_back(std::move(w));
        }
        // cross product of update choices, reads before writes
        std::vector<std::size_t> choice(combo.size(), 0);
        while (true) {
            Polynomial joint(selection);
            bool skip = false;
            for (std::size_t i = 0; i < combo.size(); ++i) {
                const Polynomial& w = weights[i].weights[choice[i]];
                if (w.is_zero()) {
                    skip = true;
                    break;
                }
                joint *= w;
            }
            if (!skip) {
                StateValues next = state;
                std::vector<int> writer(rp.variables.size(), -1);
                for (std::size_t i = 0; i < combo.size(); ++i) {
                    const ResolvedCommand& cmd = rp.commands[combo[i]];
                    const ResolvedUpdate& update = cmd.updates[choice[i]];
                    for (const auto& [var_index, expr] : update.assignments) {
                        if (writer[var_index] >= 0 &&
                            static_cast<std::size_t>(writer[var_index]) != combo[i]) {
                            throw Error(ErrorKind::DataRace,
                                        "variable '" + rp.variables[var_index].name +
                                            "' written by two modules in one step at state " +
                                            rp.state_name(state));
                        }
                        writer[var_index] = static_cast<int>(combo[i]);
                        next[var_index] =
                            assignment_value(rp, rp.variables[var_index], expr, state, cmd.pos);
                    }
                }
                add_successor(next, joint);
            }
            std::size_t i = combo.size();
            bool done = true;
            while (i > 0) {
                --i;
                if (++choice[i] < weights[i].weights.size()) {
                    done = false;
                    break;
                }
                choice[i] = 0;
            }
            if (done) break;
        }
    }
    std::sort(result.constraint_rows.begin(), result.constraint_rows.end());
    result.constraint_rows.erase(
        std::unique(result.constraint_rows.begin(), result.constraint_rows.end()),
        result.constraint_rows.end());
    return result;
}

BuiltModel build_explicit(const ResolvedProgram& rp, const std::string& target_label,
                          const BuildOptions& options) {
    ExprPtr label_expr;
    if (!target_label.empty()) {
        auto it = rp.labels.find(target_label);
        if (it == rp.labels.end()) {
            throw Error(ErrorKind::UnknownVariable, "unknown label \"" + target_label + "\"");
        }
        label_expr = it->second;
    }

    BuiltModel out;
    std::map<StateValues, StateId> ids;
    std::deque<StateId> frontier;
    auto intern = [&](const StateValues& values) {
        auto it = ids.find(values);
        if (it != ids.end()) return it->second;
        if (out.values.size() >= options.state_cap) {
            throw Error(ErrorKind::StateCapExceeded,
                        "reachable state space exceeds cap of " +
                            std::to_string(options.state_cap));
        }
        StateInfo info;
        info.name = rp.state_name(values);
        info.values = values;
        StateId id = out.chain.add_state(std::move(info));
        ids.emplace(values, id);
        out.values.push_back(values);
        frontier.push_back(id);
        return id;
    };

    StateId init = intern(rp.initial);
    out.chain.set_initial(init);
    out.chain.set_parameters(rp.parameters);

    while (!frontier.empty()) {
        StateId id = frontier.front();
        frontier.pop_front();
        StateValues state = out.values[id]; // copy: interning may grow the vector
        StepResult step;
        try {
            step = step_semantics(rp, state, options.step);
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " [state " + rp.state_name(state) + "]");
        }
        std::vector<std::pair<StateId, Polynomial>> branches;
        for (const auto& [next, weight] : step.successors) {
            branches.emplace_back(intern(next), weight);
        }
        out.chain.set_row(id, Distribution::with_constraints(std::move(branches),
                                                             std::move(step.constraint_rows)));
    }

    if (label_expr) {
        for (StateId s = 0; s < out.chain.num_states(); ++s) {
            if (eval_expr(rp, label_expr, &out.values[s]).b) out.chain.add_target(s);
        }
    }
    out.chain.validate();
    return out;
}

std::vector<OverlapHit> check_guard_overlap(const ResolvedProgram& rp, std::size_t state_cap) {
    std::vector<OverlapHit> hits;
    std::map<StateValues, bool> seen;
    std::deque<StateValues> frontier;
    seen.emplace(rp.initial, true);
    frontier.push_back(rp.initial);
    std::size_t visited = 0;
    while (!frontier.empty()) {
        StateValues state = frontier.front();
        frontier.pop_front();
        if (++visited > state_cap) {
            throw Error(ErrorKind::StateCapExceeded, "guard overlap check exceeded state cap");
        }
        std::vector<bool> enabled(rp.commands.size());
        for (std::size_t i = 0; i < rp.commands.size(); ++i) {
            enabled[i] = eval_expr(rp, rp.commands[i].guard, &state).b;
        }
        for (const auto& action : rp.actions) {
            for (const auto& [mi, cmds] : action.per_module) {
                std::size_t count = 0;
                for (std::size_t c : cmds) {
                    if (enabled[c]) ++count;
                }
                if (count >= 2) hits.push_back({mi, action.display, state});
            }
        }
        for (const auto& [next, weight] : step_semantics(rp, state).successors) {
            if (seen.emplace(next, true).second) frontier.push_back(next);
        }
    }
    return hits;
}

namespace {

void collect_state_vars(const ResolvedProgram& rp, const ExprPtr& e, std::set<std::size_t>& out) {
    if (!e) return;
    if (e->kind == ExprKind::Ident) {
        auto it = rp.variable_index.find(e->name);
        if (it != rp.variable_index.end()) out.insert(it->second);
        return;
    }
    for (const auto& arg : e->args) collect_state_vars(rp, arg, out);
}

} // namespace

std::vector<ExpandedCommand> expand_probabilities(const ResolvedProgram& rp) {
    std::vector<ExpandedCommand> out;
    for (std::size_t ci = 0; ci < rp.commands.size(); ++ci) {
        const ResolvedCommand& cmd = rp.commands[ci];
        std::set<std::size_t> var_set;
        for (const auto& update : cmd.updates) collect_state_vars(rp, update.probability, var_set);
        std::vector<std::size_t> vars(var_set.begin(), var_set.end());

        double combinations = 1;
        for (std::size_t v : vars) {
            combinations *= static_cast<double>(rp.variables[v].domain_size());
        }
        if (combinations > 65536) {
            throw Error(ErrorKind::StateCapExceeded,
                        "state-dependent probability expansion too large at " +
                            std::to_string(cmd.pos.line) + ":" + std::to_string(cmd.pos.col));
        }

        ExpandedCommand expanded;
        expanded.command_index = ci;
        StateValues probe(rp.variables.size(), 0);
        for (std::size_t i = 0; i < rp.variables.size(); ++i) probe[i] = rp.variables[i].low;

        std::function<void(std::size_t)> walk = [&](std::size_t i) {
            if (i == vars.size()) {
                ExpandedCase ec;
                for (std::size_t v : vars) ec.fixings.emplace_back(v, probe[v]);
                try {
                    Polynomial sum;
                    bool all_constant = true;
                    for (const auto& update : cmd.updates) {
                        Polynomial w = probability_value(rp, update.probability, &probe);
                        all_constant = all_constant && w.is_constant();
                        sum += w;
                        ec.declared.push_back(w);
                    }
                    ec.weights = ec.declared;
                    if (all_constant) {
                        Rational total(0);
                        for (const auto& w : ec.weights) {
                            Rational value = w.constant_value();
                            if (!value.in_unit_interval()) {
                                throw Error(ErrorKind::NotWellDefined,
                                            "update probability " + value.str() +
                                                " outside [0,1] (command at " +
                                                std::to_string(cmd.pos.line) + ":" +
                                                std::to_string(cmd.pos.col) + ")");
                            }
                            total += value;
                        }
                        if (total != Rational(1)) {
                            throw Error(ErrorKind::NotWellDefined,
                                        "update probabilities sum to " + total.str() +
                                            " (command at " + std::to_string(cmd.pos.line) + ":" +
                                            std::to_string(cmd.pos.col) + ")");
                        }
                    } else if (sum != Polynomial(Rational(1))) {
                        Polynomial rest;
                        for (std::size_t k = 0; k + 1 < ec.weights.size(); ++k) {
                            rest += ec.weights[k];
                        }
                        ec.weights.back() = Rational(1) - rest;
                    }
                } catch (const Error& e) {
                    ec.poisoned = true;
                    ec.poison_message = e.what();
                }
                expanded.cases.push_back(std::move(ec));
                return;
            }
            const StateVar& var = rp.variables[vars[i]];
            for (long long v = var.low; v <= var.high; ++v) {
                probe[vars[i]] = v;
                walk(i + 1);
            }
            probe[vars[i]] = var.low;
        };
        walk(0);
        out.push_back(std::move(expanded));
    }
    return out;
}

} // namespace pmc::lang
