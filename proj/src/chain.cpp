#include "pmc/chain.hpp"

#include "pmc/errors.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <sstream>

namespace pmc {

namespace {

// Shared tail of distribution construction: merge duplicate targets, drop
// zero weights, sort by target id.
std::vector<Branch> canonical_branches(std::vector<std::pair<StateId, Polynomial>> in) {
    std::map<StateId, Polynomial> merged;
    for (auto& [target, weight] : in) {
        if (weight.is_zero()) continue;
        merged[target] += weight;
    }
    std::vector<Branch> out;
    for (auto& [target, weight] : merged) {
        if (weight.is_zero()) continue;
        out.push_back({target, std::move(weight)});
    }
    return out;
}

} // namespace

Distribution Distribution::dirac(StateId target) {
    Distribution d;
    d.branches_.push_back({target, Polynomial(Rational(1))});
    return d;
}

Distribution Distribution::constants(std::vector<std::pair<StateId, Rational>> branches) {
    Rational sum(0);
    std::vector<std::pair<StateId, Polynomial>> polys;
    for (auto& [target, weight] : branches) {
        if (weight.is_zero()) continue;
        if (!weight.in_unit_interval()) {
            throw Error(ErrorKind::NotWellDefined,
                        "transition probability " + weight.str() + " outside [0,1]");
        }
        sum += weight;
        polys.emplace_back(target, Polynomial(weight));
    }
    if (sum != Rational(1)) {
        throw Error(ErrorKind::NotWellDefined, "row probabilities sum to " + sum.str() + ", not 1");
    }
    Distribution d;
    d.branches_ = canonical_branches(std::move(polys));
    return d;
}

Distribution Distribution::parametric(std::vector<std::pair<StateId, Polynomial>> branches) {
    std::vector<std::pair<StateId, Polynomial>> live;
    for (auto& b : branches) {
        if (!b.second.is_zero()) live.push_back(std::move(b));
    }
    bool all_constant = true;
    Polynomial sum;
    for (const auto& [target, weight] : live) {
        all_constant = all_constant && weight.is_constant();
        sum += weight;
    }
    if (all_constant) {
        std::vector<std::pair<StateId, Rational>> consts;
        consts.reserve(live.size());
        for (auto& [target, weight] : live) consts.emplace_back(target, weight.constant_value());
        return constants(std::move(consts));
    }
    if (live.empty()) {
        throw Error(ErrorKind::NotWellDefined, "empty distribution");
    }
    Distribution d;
    std::vector<Polynomial> declared;
    for (const auto& [target, weight] : live) declared.push_back(weight);
    d.constraint_rows_.push_back(std::move(declared));
    if (sum != Polynomial(Rational(1))) {
        // Complement convention: the last declared branch is rewritten to
        // 1 - sum(previous); the declared row keeps the original for the
        // per-valuation well-definedness check.
        Polynomial rest;
        for (std::size_t i = 0; i + 1 < live.size(); ++i) rest += live[i].second;
        live.back().second = Rational(1) - rest;
    }
    d.branches_ = canonical_branches(std::move(live));
    return d;
}

Distribution Distribution::with_constraints(std::vector<std::pair<StateId, Polynomial>> branches,
                                            std::vector<std::vector<Polynomial>> constraint_rows) {
    Polynomial sum;
    bool all_constant = true;
    for (const auto& [target, weight] : branches) {
        sum += weight;
        all_constant = all_constant && weight.is_constant();
    }
    if (all_constant) {
        std::vector<std::pair<StateId, Rational>> consts;
        for (auto& [target, weight] : branches) consts.emplace_back(target, weight.constant_value());
        return constants(std::move(consts));
    }
    if (sum != Polynomial(Rational(1))) {
        throw Error(ErrorKind::Internal,
                    "parametric row does not sum to 1 syntactically: " + sum.str());
    }
    Distribution d;
    d.branches_ = canonical_branches(std::move(branches));
    d.constraint_rows_ = std::move(constraint_rows);
    return d;
}

bool Distribution::is_constant() const {
    for (const auto& b : branches_) {
        if (!b.weight.is_constant()) return false;
    }
    return true;
}

Rational Distribution::probability_of(StateId target) const {
    for (const auto& b : branches_) {
        if (b.target == target) return b.weight.constant_value();
    }
    return Rational(0);
}

StateId MarkovChain::add_state(StateInfo info) {
    states_.push_back(std::move(info));
    rows_.emplace_back();
    target_mask_.push_back(false);
    return static_cast<StateId>(states_.size() - 1);
}

void MarkovChain::set_row(StateId s, Distribution d) {
    rows_.at(s) = std::move(d);
}

void MarkovChain::add_target(StateId s) {
    if (s >= states_.size()) {
        throw Error(ErrorKind::Internal, "target id out of range");
    }
    if (!target_mask_[s]) {
        target_mask_[s] = true;
        targets_.push_back(s);
        std::sort(targets_.begin(), targets_.end());
    }
}

const Distribution& MarkovChain::row(StateId s) const {
    return rows_.at(s);
}

void MarkovChain::validate() const {
    if (states_.empty()) throw Error(ErrorKind::Internal, "chain has no states");
    if (initial_ >= states_.size()) throw Error(ErrorKind::Internal, "initial state out of range");
    for (StateId s = 0; s < states_.size(); ++s) {
        if (rows_[s].branches().empty()) {
            throw Error(ErrorKind::Internal, "state " + states_[s].name + " has no transitions");
        }
        for (const auto& b : rows_[s].branches()) {
            if (b.target >= states_.size()) {
                throw Error(ErrorKind::Internal, "transition target out of range");
            }
            for (const auto& p : b.weight.parameters()) {
                if (std::find(parameters_.begin(), parameters_.end(), p) == parameters_.end()) {
                    throw Error(ErrorKind::Internal, "undeclared parameter '" + p + "' in transition");
                }
            }
        }
    }
}

std::vector<WellDefinednessIssue> check_well_defined(const MarkovChain& pmc, const Valuation& u) {
    std::vector<WellDefinednessIssue> issues;
    for (StateId s = 0; s < pmc.num_states(); ++s) {
        const auto& rows = pmc.row(s).constraint_rows();
        for (std::size_t r = 0; r < rows.size(); ++r) {
            Rational sum(0);
            for (std::size_t i = 0; i < rows[r].size(); ++i) {
                Rational v = rows[r][i].evaluate(u);
                sum += v;
                if (!v.in_unit_interval()) {
                    issues.push_back({s, r, i, v, false});
                }
            }
            if (sum != Rational(1)) {
                issues.push_back({s, r, rows[r].size(), sum, true});
            }
        }
    }
    return issues;
}

MarkovChain instantiate(const MarkovChain& pmc, const Valuation& u) {
    auto issues = check_well_defined(pmc, u);
    if (!issues.empty()) {
        std::ostringstream os;
        os << "valuation is not well-defined:";
        for (const auto& issue : issues) {
            os << " [state " << pmc.info(issue.state).name;
            if (issue.row_sum_issue) {
                os << " row sums to " << issue.value.str();
            } else {
                os << " branch " << issue.branch << " = " << issue.value.str();
            }
            os << "]";
        }
        throw Error(ErrorKind::NotWellDefined, os.str());
    }
    MarkovChain mc;
    for (StateId s = 0; s < pmc.num_states(); ++s) mc.add_state(pmc.info(s));
    mc.set_initial(pmc.initial());
    for (StateId t : pmc.targets()) mc.add_target(t);
    for (StateId s = 0; s < pmc.num_states(); ++s) {
        std::vector<std::pair<StateId, Rational>> branches;
        for (const auto& b : pmc.row(s).branches()) {
            branches.emplace_back(b.target, b.weight.evaluate(u));
        }
        mc.set_row(s, Distribution::constants(std::move(branches)));
    }
    mc.validate();
    return mc;
}

Rational path_probability(const MarkovChain& mc, const Path& pi) {
    if (pi.states.empty()) {
        throw Error(ErrorKind::InvalidPath, "empty path");
    }
    Rational prob(1);
    for (std::size_t i = 0; i + 1 < pi.states.size(); ++i) {
        Rational step = mc.row(pi.states[i]).probability_of(pi.states[i + 1]);
        if (step.is_zero()) {
            throw Error(ErrorKind::InvalidPath,
                        "no transition from " + mc.info(pi.states[i]).name + " to " +
                            mc.info(pi.states[i + 1]).name);
        }
        prob *= step;
    }
    return prob;
}

namespace {

struct PathSearch {
    const MarkovChain& mc;
    unsigned horizon;
    std::size_t cap;
    std::size_t visited = 0;
    PathEnumeration result;
    std::vector<StateId> stack;

    void run(StateId from) {
        stack.push_back(from);
        visit(from, 0, Polynomial(Rational(1)));
        stack.pop_back();
    }

    void visit(StateId s, unsigned depth, Polynomial prob) {
        if (++visited > cap) {
            throw Error(ErrorKind::BudgetExceeded,
                        "path enumeration exceeded cap of " + std::to_string(cap));
        }
        if (mc.is_target(s)) {
            result.paths.push_back({stack});
            result.mass += prob;
            return;
        }
        if (depth == horizon) return;
        for (const auto& b : mc.row(s).branches()) {
            stack.push_back(b.target);
            visit(b.target, depth + 1, prob * b.weight);
            stack.pop_back();
        }
    }
};

} // namespace

PathEnumeration enumerate_reaching_paths(const MarkovChain& mc, unsigned h, std::size_t path_cap) {
    return enumerate_reaching_paths_from(mc, mc.initial(), h, path_cap);
}

PathEnumeration enumerate_reaching_paths_from(const MarkovChain& mc, StateId from, unsigned h,
                                              std::size_t path_cap) {
    PathSearch search{mc, h, path_cap, 0, {}, {}};
    search.run(from);
    return std::move(search.result);
}

MarkovChain with_targets(const MarkovChain& mc, const std::vector<StateId>& targets) {
    MarkovChain out;
    for (StateId s = 0; s < mc.num_states(); ++s) out.add_state(mc.info(s));
    out.set_initial(mc.initial());
    out.set_parameters(mc.parameters());
    for (StateId t : targets) out.add_target(t);
    for (StateId s = 0; s < mc.num_states(); ++s) out.set_row(s, mc.row(s));
    out.validate();
    return out;
}

MarkovChain make_absorbing(const MarkovChain& mc) {
    MarkovChain out;
    for (StateId s = 0; s < mc.num_states(); ++s) out.add_state(mc.info(s));
    out.set_initial(mc.initial());
    out.set_parameters(mc.parameters());
    for (StateId t : mc.targets()) out.add_target(t);
    for (StateId s = 0; s < mc.num_states(); ++s) {
        out.set_row(s, mc.is_target(s) ? Distribution::dirac(s) : mc.row(s));
    }
    out.validate();
    return out;
}

std::vector<StateId> bad_states(const MarkovChain& mc) {
    std::vector<std::vector<StateId>> predecessors(mc.num_states());
    for (StateId s = 0; s < mc.num_states(); ++s) {
        for (const auto& b : mc.row(s).branches()) predecessors[b.target].push_back(s);
    }
    std::vector<bool> reaches(mc.num_states(), false);
    std::queue<StateId> queue;
    for (StateId t : mc.targets()) {
        reaches[t] = true;
        queue.push(t);
    }
    while (!queue.empty()) {
        StateId s = queue.front();
        queue.pop();
        for (StateId p : predecessors[s]) {
            if (!reaches[p]) {
                reaches[p] = true;
                queue.push(p);
            }
        }
    }
    std::vector<StateId> bad;
    for (StateId s = 0; s < mc.num_states(); ++s) {
        if (!reaches[s]) bad.push_back(s);
    }
    return bad;
}

namespace {

unsigned ceil_log2(std::size_t k) {
    unsigned d = 0;
    std::size_t cap = 1;
    while (cap < k) {
        cap <<= 1;
        ++d;
    }
    return d;
}

struct Binarizer {
    const MarkovChain& original;
    MarkovChain out;
    unsigned depth;
    std::map<StateId, std::vector<std::pair<StateId, Rational>>> pending;
    unsigned aux_counter = 0;

    StateId fresh_aux(StateId owner) {
        StateInfo info;
        info.name = original.info(owner).name + "#" + std::to_string(aux_counter++);
        info.auxiliary = true;
        return out.add_state(info);
    }

    void edge(StateId from, StateId to, Rational prob) {
        pending[from].emplace_back(to, std::move(prob));
    }

    // Expands branches [lo, hi) of `owner` below `node`, spending exactly
    // `remaining` transitions before an original state is reached again.
    void build(StateId owner, StateId node, const std::vector<Branch>& branches, std::size_t lo,
               std::size_t hi, unsigned remaining, const Rational& mass) {
        std::size_t k = hi - lo;
        if (k == 1) {
            if (remaining == 1) {
                edge(node, branches[lo].target, Rational(1));
            } else {
                StateId aux = fresh_aux(owner);
                edge(node, aux, Rational(1));
                build(owner, aux, branches, lo, hi, remaining - 1, mass);
            }
            return;
        }
        unsigned d = ceil_log2(k);
        if (remaining > d) {
            StateId aux = fresh_aux(owner);
            edge(node, aux, Rational(1));
            build(owner, aux, branches, lo, hi, remaining - 1, mass);
            return;
        }
        if (k == 2) {
            edge(node, branches[lo].target, branches[lo].weight.constant_value() / mass);
            edge(node, branches[lo + 1].target, branches[lo + 1].weight.constant_value() / mass);
            return;
        }
        // Split off the leading branches so the trailing part is a full
        // power of two; for out-degree three this is exactly the shape of a
        // first-vs-rest split.
        std::size_t mid = lo + (k - (std::size_t{1} << (d - 1)));
        Rational left_mass(0);
        for (std::size_t i = lo; i < mid; ++i) left_mass += branches[i].weight.constant_value();
        Rational right_mass = mass - left_mass;
        StateId left = fresh_aux(owner);
        StateId right = fresh_aux(owner);
        edge(node, left, left_mass / mass);
        edge(node, right, right_mass / mass);
        build(owner, left, branches, lo, mid, d - 1, left_mass);
        build(owner, right, branches, mid, hi, d - 1, right_mass);
    }
};

} // namespace

BinarizedChain binarize(const MarkovChain& mc) {
    if (mc.is_parametric()) {
        throw Error(ErrorKind::TypeError, "binarize expects a constant chain");
    }
    unsigned depth = 1;
    for (StateId s = 0; s < mc.num_states(); ++s) {
        depth = std::max(depth, ceil_log2(mc.row(s).size()));
    }
    if (depth == 1) {
        BinarizedChain result{mc, 1};
        return result;
    }
    Binarizer binarizer{mc, {}, depth, {}, 0};
    for (StateId s = 0; s < mc.num_states(); ++s) binarizer.out.add_state(mc.info(s));
    binarizer.out.set_initial(mc.initial());
    for (StateId t : mc.targets()) binarizer.out.add_target(t);
    for (StateId s = 0; s < mc.num_states(); ++s) {
        binarizer.build(s, s, mc.row(s).branches(), 0, mc.row(s).size(), depth, Rational(1));
    }
    for (auto& [state, branches] : binarizer.pending) {
        binarizer.out.set_row(state, Distribution::constants(std::move(branches)));
    }
    binarizer.out.validate();
    return {std::move(binarizer.out), depth};
}

} // namespace pmc
