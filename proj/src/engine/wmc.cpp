#include "pmc/engine/wmc.hpp"

#include "pmc/errors.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace pmc::wmc {

using dd::DdManager;
using dd::NodeId;
using dd::VarId;
using lang::ResolvedProgram;
using lang::StateValues;

// --- coin chains -------------------------------------------------------------

CoinChain coin_chain(const std::vector<Polynomial>& branch_weights,
                     const std::string& site_prefix) {
    CoinChain out;
    if (branch_weights.size() < 2) return out;
    Polynomial consumed;
    for (std::size_t j = 0; j + 1 < branch_weights.size(); ++j) {
        Polynomial residual_den = Rational(1) - consumed;
        const Polynomial& w = branch_weights[j];
        if (residual_den.is_constant()) {
            Rational den = residual_den.constant_value();
            if (den.is_zero()) {
                throw Error(ErrorKind::NonConstantResidual,
                            "probability mass exhausted before branch " + std::to_string(j));
            }
            out.weights.push_back(w.scaled(Rational(1) / den));
        } else if (auto quotient = w.divide_exact(residual_den)) {
            out.weights.push_back(std::move(*quotient));
        } else {
            // auxiliary symbolic case split: the residual becomes a fresh
            // symbol evaluated per valuation, keeping the weight a polynomial
            DerivedParam aux;
            aux.name = "@" + site_prefix + "." + std::to_string(j);
            aux.numerator = w;
            aux.denominator = residual_den;
            out.weights.push_back(Polynomial::variable(aux.name));
            out.derived.push_back(std::move(aux));
        }
        consumed += w;
    }
    return out;
}

// --- solution function -------------------------------------------------------

Valuation SolutionFunction::extend(const Valuation& u) const {
    Valuation ext = u;
    for (const auto& d : derived_) {
        Rational den = d.denominator.evaluate(ext);
        if (den.is_zero()) {
            throw Error(ErrorKind::NotWellDefined,
                        "residual denominator vanishes for " + d.name);
        }
        ext.set(d.name, d.numerator.evaluate(ext) / den);
    }
    return ext;
}

std::vector<Rational> SolutionFunction::weights_at(const Valuation& extended) const {
    std::vector<Rational> weights;
    weights.reserve(coins_.size());
    for (const auto& coin : coins_) {
        Rational w = coin.weight.evaluate(extended);
        if (!w.in_unit_interval()) {
            throw Error(ErrorKind::NotWellDefined,
                        "weight of " + coin.name + " evaluates to " + w.str() + " outside [0,1]");
        }
        weights.push_back(std::move(w));
    }
    return weights;
}

namespace {

void check_rows(const std::vector<std::vector<Polynomial>>& rows, const Valuation& u) {
    for (const auto& row : rows) {
        Rational sum(0);
        for (const auto& entry : row) {
            Rational v = entry.evaluate(u);
            if (!v.in_unit_interval()) {
                throw Error(ErrorKind::NotWellDefined,
                            "declared probability " + entry.str() + " = " + v.str() +
                                " outside [0,1]");
            }
            sum += v;
        }
        if (sum != Rational(1)) {
            throw Error(ErrorKind::NotWellDefined, "declared branch probabilities sum to " +
                                                       sum.str() + ", not 1");
        }
    }
}

} // namespace

Rational SolutionFunction::evaluate(const Valuation& u) const {
    Valuation ext = extend(u);
    check_rows(constraint_rows_, ext);
    std::vector<Rational> weights = weights_at(ext);
    std::size_t touched = 0;

    std::vector<signed char> seen(manager_->size(), 0);
    std::vector<Rational> memo(manager_->size());
    std::function<const Rational&(NodeId)> value = [&](NodeId n) -> const Rational& {
        if (!seen[n]) {
            ++touched;
            seen[n] = 1;
            if (manager_->is_terminal(n)) {
                memo[n] = Rational(manager_->bool_value(n) ? 1 : 0);
            } else {
                const Rational& w = weights[manager_->var_of(n)];
                memo[n] = w * value(manager_->high(n)) +
                          (Rational(1) - w) * value(manager_->low(n));
            }
        }
        return memo[n];
    };
    const Rational& result = value(root_);
    last_nodes_touched_.store(touched);
    return result;
}

double SolutionFunction::evaluate_float(const Valuation& u) const {
    Valuation ext = extend(u);
    check_rows(constraint_rows_, ext);
    std::vector<Rational> weights = weights_at(ext);
    std::vector<double> wf;
    wf.reserve(weights.size());
    for (const auto& w : weights) wf.push_back(w.to_double());
    std::size_t touched = 0;

    std::vector<signed char> seen(manager_->size(), 0);
    std::vector<double> memo(manager_->size(), 0.0);
    std::function<double(NodeId)> value = [&](NodeId n) -> double {
        if (!seen[n]) {
            ++touched;
            seen[n] = 1;
            if (manager_->is_terminal(n)) {
                memo[n] = manager_->bool_value(n) ? 1.0 : 0.0;
            } else {
                double w = wf[manager_->var_of(n)];
                memo[n] = w * value(manager_->high(n)) + (1.0 - w) * value(manager_->low(n));
            }
        }
        return memo[n];
    };
    double result = value(root_);
    last_nodes_touched_.store(touched);
    return result;
}

std::vector<Rational> SolutionFunction::distinct_weight_values() const {
    std::set<Rational, std::less<>> set;
    std::vector<Rational> out;
    for (const auto& coin : coins_) {
        Rational w = coin.weight.constant_value();
        if (set.insert(w).second) out.push_back(w);
    }
    return out;
}

// --- explicit-chain unrolling ------------------------------------------------

namespace {

unsigned bits_for(std::size_t n) {
    unsigned b = 1;
    while ((std::size_t{1} << b) < n) ++b;
    return b;
}

} // namespace

class ChainUnroller {
public:
    ChainUnroller(const MarkovChain& mc, unsigned h) : original_(mc), h_(h) {}

    SolutionFunction run() {
        MarkovChain absorbing = make_absorbing(original_);
        SolutionFunction sf;
        sf.manager_ = std::make_shared<DdManager>();
        DdManager& m = *sf.manager_;
        sf.parameters_ = original_.parameters();

        // per-state coin chains (targets are absorbing and coin-free)
        struct Site {
            StateId state;
            std::size_t position;
            Polynomial weight;
            std::string name;
        };
        std::vector<Site> sites;
        std::vector<std::vector<std::size_t>> state_sites(absorbing.num_states());
        for (StateId s = 0; s < absorbing.num_states(); ++s) {
            const auto& branches = absorbing.row(s).branches();
            if (branches.size() < 2) continue;
            std::vector<Polynomial> weights;
            for (const auto& b : branches) weights.push_back(b.weight);
            CoinChain chain = coin_chain(weights, "s" + std::to_string(s));
            for (auto& d : chain.derived) sf.derived_.push_back(std::move(d));
            for (std::size_t j = 0; j < chain.weights.size(); ++j) {
                std::string name = "c[" + absorbing.info(s).name;
                if (chain.weights.size() > 1) name += "#" + std::to_string(j);
                name += "]";
                state_sites[s].push_back(sites.size());
                sites.push_back({s, j, chain.weights[j], std::move(name)});
            }
        }
        sf.coins_per_step_ = sites.size();

        for (StateId s = 0; s < original_.num_states(); ++s) {
            for (const auto& row : original_.row(s).constraint_rows()) {
                sf.constraint_rows_.push_back(row);
            }
        }
        std::sort(sf.constraint_rows_.begin(), sf.constraint_rows_.end());
        sf.constraint_rows_.erase(
            std::unique(sf.constraint_rows_.begin(), sf.constraint_rows_.end()),
            sf.constraint_rows_.end());

        // causal order: all coins of step t before step t+1
        for (unsigned t = 0; t < h_; ++t) {
            for (const auto& site : sites) {
                m.add_variable(site.name + "@" + std::to_string(t));
                sf.coins_.push_back({site.name + "@" + std::to_string(t), t, site.weight});
            }
        }

        unsigned bits = bits_for(absorbing.num_states());
        std::vector<NodeId> state_bits(bits);
        for (unsigned i = 0; i < bits; ++i) {
            state_bits[i] = ((absorbing.initial() >> i) & 1u) ? m.bdd_true() : m.bdd_false();
        }
        NodeId hit = original_.is_target(original_.initial()) ? m.bdd_true() : m.bdd_false();

        auto in_state = [&](const std::vector<NodeId>& bits_now, StateId s) {
            NodeId cube = m.bdd_true();
            for (unsigned i = 0; i < bits; ++i) {
                NodeId bit = bits_now[i];
                cube = m.bdd_and(cube, ((s >> i) & 1u) ? bit : m.bdd_not(bit));
            }
            return cube;
        };

        for (unsigned t = 0; t < h_ && hit != m.bdd_true(); ++t) {
            std::vector<NodeId> next(bits, m.bdd_false());
            for (StateId s = 0; s < absorbing.num_states(); ++s) {
                NodeId here = in_state(state_bits, s);
                if (here == m.bdd_false()) continue;
                const auto& branches = absorbing.row(s).branches();
                for (std::size_t j = 0; j < branches.size(); ++j) {
                    NodeId select = here;
                    if (branches.size() >= 2) {
                        for (std::size_t i = 0; i < j; ++i) {
                            VarId v = static_cast<VarId>(t * sites.size() + state_sites[s][i]);
                            select = m.bdd_and(select, m.bdd_nvar(v));
                        }
                        if (j + 1 < branches.size()) {
                            VarId v = static_cast<VarId>(t * sites.size() + state_sites[s][j]);
                            select = m.bdd_and(select, m.bdd_var(v));
                        }
                    }
                    StateId target = branches[j].target;
                    for (unsigned i = 0; i < bits; ++i) {
                        if ((target >> i) & 1u) next[i] = m.bdd_or(next[i], select);
                    }
                }
            }
            state_bits = std::move(next);
            NodeId reached = m.bdd_false();
            for (StateId target : original_.targets()) {
                reached = m.bdd_or(reached, in_state(state_bits, target));
            }
            hit = m.bdd_or(hit, reached);
        }
        sf.root_ = hit;
        return sf;
    }

private:
    const MarkovChain& original_;
    unsigned h_;
};

SolutionFunction unroll_chain(const MarkovChain& mc, unsigned h) {
    return ChainUnroller(mc, h).run();
}

// --- program unrolling ---------------------------------------------------

namespace {

// true when the expression is boolean-typed (resolve() has already
// type-checked, so a shallow classification suffices)
bool is_bool_expr(const ResolvedProgram& rp, const lang::ExprPtr& e) {
    using lang::ExprKind;
    switch (e->kind) {
        case ExprKind::BoolLit: return true;
        case ExprKind::IntLit:
        case ExprKind::RatLit: return false;
        case ExprKind::Ident: {
            auto it = rp.variable_index.find(e->name);
            if (it != rp.variable_index.end()) return rp.variables[it->second].is_bool;
            auto cit = rp.constants.find(e->name);
            if (cit != rp.constants.end()) return cit->second.kind == lang::EvalValue::Kind::Bool;
            return false; // parameters are numeric
        }
        case ExprKind::Unary: return e->un_op == lang::UnOp::Not;
        case ExprKind::Binary:
            switch (e->bin_op) {
                case lang::BinOp::And:
                case lang::BinOp::Or:
                case lang::BinOp::Eq:
                case lang::BinOp::Ne:
                case lang::BinOp::Lt:
                case lang::BinOp::Le:
                case lang::BinOp::Gt:
                case lang::BinOp::Ge:
                    return true;
                default:
                    return false;
            }
        case ExprKind::Ternary: return is_bool_expr(rp, e->args[1]);
        case ExprKind::ExactlyOneOf: return true;
    }
    return false;
}

} // namespace

class Unroller {
public:
    Unroller(const ResolvedProgram& rp, unsigned h, lang::OverlapPolicy overlap)
        : rp_(rp), h_(h), overlap_(overlap) {}

    SolutionFunction run(const lang::ExprPtr& label_expr,
                         const std::vector<StateValues>* target_states,
                         const lang::ExprPtr& avoid_expr = nullptr) {
        sf_.manager_ = std::make_shared<DdManager>();
        m_ = sf_.manager_.get();
        sf_.parameters_ = rp_.parameters;
        expanded_ = lang::expand_probabilities(rp_);
        enumerate_sites();
        allocate_variables();

        // initial symbolic state: constants
        bits_.assign(rp_.variables.size(), {});
        for (std::size_t v = 0; v < rp_.variables.size(); ++v) {
            bits_[v].assign(rp_.shared_bitwidth, m_->bdd_false());
            long long offset = rp_.initial[v] - rp_.variables[v].low;
            for (unsigned i = 0; i < rp_.shared_bitwidth; ++i) {
                if ((offset >> i) & 1) bits_[v][i] = m_->bdd_true();
            }
        }

        auto target_now = [&]() {
            if (target_states) {
                NodeId any = m_->bdd_false();
                for (const auto& values : *target_states) any = m_->bdd_or(any, state_cube(values));
                return any;
            }
            return label_expr ? eval_bool(label_expr) : m_->bdd_false();
        };
        auto avoid_now = [&]() { return avoid_expr ? eval_bool(avoid_expr) : m_->bdd_false(); };

        // dual latch: reaching an avoid state first blocks the target hit
        NodeId blocked = m_->bdd_and(avoid_now(), m_->bdd_not(target_now()));
        NodeId hit = m_->bdd_and(target_now(), m_->bdd_not(blocked));
        for (step_ = 0; step_ < h_ && hit != m_->bdd_true(); ++step_) {
            advance();
            NodeId hit_next = m_->bdd_or(hit, m_->bdd_and(m_->bdd_not(blocked), target_now()));
            blocked = m_->bdd_or(blocked, m_->bdd_and(m_->bdd_not(hit), avoid_now()));
            hit = hit_next;
        }
        sf_.root_ = hit;
        std::sort(sf_.constraint_rows_.begin(), sf_.constraint_rows_.end());
        sf_.constraint_rows_.erase(
            std::unique(sf_.constraint_rows_.begin(), sf_.constraint_rows_.end()),
            sf_.constraint_rows_.end());
        return std::move(sf_);
    }

private:
    struct Site {
        std::string name;
        Polynomial weight;
    };

    // --- static coin sites --------------------------------------------------

    std::size_t add_site(std::string name, Polynomial weight) {
        sites_.push_back({std::move(name), std::move(weight)});
        return sites_.size() - 1;
    }

    void enumerate_sites() {
        // per-action possible weights: products over modules of enabled
        // command counts (overlapping guards give multiplicity)
        std::size_t k = rp_.actions.size();
        std::vector<std::vector<long long>> weight_values(k);
        for (std::size_t a = 0; a < k; ++a) {
            std::set<long long> values{1};
            for (const auto& [mi, cmds] : rp_.actions[a].per_module) {
                std::set<long long> next;
                for (long long base : values) {
                    for (std::size_t cnt = 1; cnt <= cmds.size(); ++cnt) {
                        next.insert(base * static_cast<long long>(cnt));
                    }
                }
                values = std::move(next);
            }
            weight_values[a].assign(values.begin(), values.end());
        }

        if (k >= 2) {
            // joint scheduler contexts: one weight (or 0 = disabled) per action
            double total = 1;
            for (std::size_t a = 0; a < k; ++a) {
                total *= static_cast<double>(weight_values[a].size() + 1);
            }
            if (total > 4096) {
                throw Error(ErrorKind::StateCapExceeded, "scheduler context explosion");
            }
            std::vector<std::vector<long long>> contexts{{}};
            for (std::size_t a = 0; a < k; ++a) {
                std::vector<std::vector<long long>> next;
                for (const auto& ctx : contexts) {
                    for (long long w : weight_values[a]) {
                        auto extended = ctx;
                        extended.push_back(w);
                        next.push_back(std::move(extended));
                    }
                    auto disabled = ctx;
                    disabled.push_back(0);
                    next.push_back(std::move(disabled));
                }
                contexts = std::move(next);
            }
            for (const auto& ctx : contexts) {
                std::vector<std::size_t> enabled;
                long long total_weight = 0;
                for (std::size_t a = 0; a < k; ++a) {
                    if (ctx[a] > 0) {
                        enabled.push_back(a);
                        total_weight += ctx[a];
                    }
                }
                if (enabled.size() < 2) continue; // no choice to make
                std::ostringstream sig;
                for (std::size_t a = 0; a < k; ++a) sig << (a ? "," : "") << ctx[a];
                std::vector<std::size_t> coin_sites;
                long long rest = total_weight;
                for (std::size_t j = 0; j + 1 < enabled.size(); ++j) {
                    Rational w(ctx[enabled[j]], rest);
                    coin_sites.push_back(
                        add_site("act(" + sig.str() + ")#" + std::to_string(j), Polynomial(w)));
                    rest -= ctx[enabled[j]];
                }
                scheduler_sites_[ctx] = std::move(coin_sites);
            }
        }

        // per (action, module) uniform command picks for overlap counts >= 2
        for (std::size_t a = 0; a < k; ++a) {
            for (const auto& [mi, cmds] : rp_.actions[a].per_module) {
                for (std::size_t cnt = 2; cnt <= cmds.size(); ++cnt) {
                    std::vector<std::size_t> coins;
                    for (std::size_t j = 0; j + 1 < cnt; ++j) {
                        Rational w(1, static_cast<long long>(cnt - j));
                        coins.push_back(add_site("pick(" + rp_.actions[a].display + "," +
                                                     rp_.module_names[mi] + "," +
                                                     std::to_string(cnt) + ")#" + std::to_string(j),
                                                 Polynomial(w)));
                    }
                    pick_sites_[{a, mi, cnt}] = std::move(coins);
                }
            }
        }

        // update-branch chains per expanded command case
        case_coins_.resize(expanded_.size());
        for (std::size_t c = 0; c < expanded_.size(); ++c) {
            const auto& cmd = rp_.commands[expanded_[c].command_index];
            case_coins_[c].resize(expanded_[c].cases.size());
            for (std::size_t x = 0; x < expanded_[c].cases.size(); ++x) {
                const auto& ec = expanded_[c].cases[x];
                if (ec.poisoned) continue;
                CaseCoins& cc = case_coins_[c][x];
                std::vector<Polynomial> live_weights;
                for (std::size_t u = 0; u < ec.weights.size(); ++u) {
                    if (ec.weights[u].is_zero()) continue;
                    cc.chain_to_update.push_back(u);
                    live_weights.push_back(ec.weights[u]);
                }
                std::string prefix = "u(" + rp_.module_names[cmd.module_index] + "." +
                                     std::to_string(cmd.index_in_module) + "." +
                                     std::to_string(x) + ")";
                CoinChain chain = coin_chain(live_weights, prefix);
                for (auto& d : chain.derived) sf_.derived_.push_back(std::move(d));
                for (std::size_t j = 0; j < chain.weights.size(); ++j) {
                    cc.coins.push_back(add_site(prefix + "#" + std::to_string(j),
                                                std::move(chain.weights[j])));
                }
                bool constant = true;
                for (const auto& w : ec.declared) constant = constant && w.is_constant();
                if (!constant) sf_.constraint_rows_.push_back(ec.declared);
            }
        }
        sf_.coins_per_step_ = sites_.size();
    }

    void allocate_variables() {
        for (unsigned t = 0; t < h_; ++t) {
            for (const auto& site : sites_) {
                std::string name = site.name + "@" + std::to_string(t);
                m_->add_variable(name);
                sf_.coins_.push_back({std::move(name), t, site.weight});
            }
        }
    }

    VarId var_at(std::size_t site) const {
        return static_cast<VarId>(step_ * sites_.size() + site);
    }

    NodeId chain_cube(const std::vector<std::size_t>& coin_sites, std::size_t position,
                      std::size_t arity) {
        // position < arity; coins select the position-th alternative
        NodeId cube = m_->bdd_true();
        for (std::size_t i = 0; i < position; ++i) {
            cube = m_->bdd_and(cube, m_->bdd_nvar(var_at(coin_sites[i])));
        }
        if (position + 1 < arity) {
            cube = m_->bdd_and(cube, m_->bdd_var(var_at(coin_sites[position])));
        }
        return cube;
    }

    // --- symbolic expression evaluation -----------------------------------

    NodeId var_value_cube(std::size_t var_index, long long value) {
        const auto& var = rp_.variables[var_index];
        long long offset = value - var.low;
        NodeId cube = m_->bdd_true();
        for (unsigned i = 0; i < rp_.shared_bitwidth; ++i) {
            NodeId bit = bits_[var_index][i];
            cube = m_->bdd_and(cube, ((offset >> i) & 1) ? bit : m_->bdd_not(bit));
        }
        return cube;
    }

    NodeId state_cube(const StateValues& values) {
        NodeId cube = m_->bdd_true();
        for (std::size_t v = 0; v < rp_.variables.size(); ++v) {
            cube = m_->bdd_and(cube, var_value_cube(v, values[v]));
        }
        return cube;
    }

    using IntCases = std::vector<std::pair<NodeId, long long>>;

    IntCases int_cases(const lang::ExprPtr& e) {
        using lang::BinOp;
        using lang::ExprKind;
        switch (e->kind) {
            case ExprKind::IntLit: return {{m_->bdd_true(), e->int_value}};
            case ExprKind::Ident: {
                auto vit = rp_.variable_index.find(e->name);
                if (vit != rp_.variable_index.end()) {
                    const auto& var = rp_.variables[vit->second];
                    IntCases cases;
                    for (long long v = var.low; v <= var.high; ++v) {
                        NodeId g = var_value_cube(vit->second, v);
                        if (g != m_->bdd_false()) cases.emplace_back(g, v);
                    }
                    return cases;
                }
                auto cit = rp_.constants.find(e->name);
                if (cit != rp_.constants.end() && cit->second.kind == lang::EvalValue::Kind::Int) {
                    return {{m_->bdd_true(), cit->second.i}};
                }
                throw Error(ErrorKind::TypeError,
                            "'" + e->name + "' is not usable as an integer in the symbolic step");
            }
            case ExprKind::Unary: {
                IntCases cases = int_cases(e->args[0]);
                for (auto& [g, v] : cases) v = -v;
                return cases;
            }
            case ExprKind::Binary: {
                IntCases lhs = int_cases(e->args[0]);
                IntCases rhs = int_cases(e->args[1]);
                std::map<long long, NodeId> merged;
                for (const auto& [ga, va] : lhs) {
                    for (const auto& [gb, vb] : rhs) {
                        NodeId g = m_->bdd_and(ga, gb);
                        if (g == m_->bdd_false()) continue;
                        long long v;
                        switch (e->bin_op) {
                            case BinOp::Add: v = va + vb; break;
                            case BinOp::Sub: v = va - vb; break;
                            case BinOp::Mul: v = va * vb; break;
                            default:
                                throw Error(ErrorKind::TypeError,
                                            "unsupported integer operator in update");
                        }
                        auto [it, inserted] = merged.emplace(v, g);
                        if (!inserted) it->second = m_->bdd_or(it->second, g);
                    }
                }
                IntCases out;
                for (const auto& [v, g] : merged) out.emplace_back(g, v);
                return out;
            }
            case ExprKind::Ternary: {
                NodeId cond = eval_bool(e->args[0]);
                std::map<long long, NodeId> merged;
                for (const auto& [g, v] : int_cases(e->args[1])) {
                    NodeId gg = m_->bdd_and(cond, g);
                    if (gg == m_->bdd_false()) continue;
                    auto [it, inserted] = merged.emplace(v, gg);
                    if (!inserted) it->second = m_->bdd_or(it->second, gg);
                }
                NodeId ncond = m_->bdd_not(cond);
                for (const auto& [g, v] : int_cases(e->args[2])) {
                    NodeId gg = m_->bdd_and(ncond, g);
                    if (gg == m_->bdd_false()) continue;
                    auto [it, inserted] = merged.emplace(v, gg);
                    if (!inserted) it->second = m_->bdd_or(it->second, gg);
                }
                IntCases out;
                for (const auto& [v, g] : merged) out.emplace_back(g, v);
                return out;
            }
            default:
                throw Error(ErrorKind::TypeError, "expression is not an integer");
        }
    }

    NodeId eval_bool(const lang::ExprPtr& e) {
        using lang::BinOp;
        using lang::ExprKind;
        switch (e->kind) {
            case ExprKind::BoolLit: return e->bool_value ? m_->bdd_true() : m_->bdd_false();
            case ExprKind::Ident: {
                auto vit = rp_.variable_index.find(e->name);
                if (vit != rp_.variable_index.end() && rp_.variables[vit->second].is_bool) {
                    return bits_[vit->second][0];
                }
                auto cit = rp_.constants.find(e->name);
                if (cit != rp_.constants.end() && cit->second.kind == lang::EvalValue::Kind::Bool) {
                    return cit->second.b ? m_->bdd_true() : m_->bdd_false();
                }
                throw Error(ErrorKind::TypeError, "'" + e->name + "' is not boolean");
            }
            case ExprKind::Unary:
                return m_->bdd_not(eval_bool(e->args[0]));
            case ExprKind::Binary: {
                switch (e->bin_op) {
                    case BinOp::And: return m_->bdd_and(eval_bool(e->args[0]), eval_bool(e->args[1]));
                    case BinOp::Or: return m_->bdd_or(eval_bool(e->args[0]), eval_bool(e->args[1]));
                    case BinOp::Eq:
                    case BinOp::Ne: {
                        if (is_bool_expr(rp_, e->args[0])) {
                            NodeId a = eval_bool(e->args[0]);
                            NodeId b = eval_bool(e->args[1]);
                            NodeId same = m_->bdd_not(m_->bdd_xor(a, b));
                            return e->bin_op == BinOp::Eq ? same : m_->bdd_not(same);
                        }
                        return int_relation(e);
                    }
                    default:
                        return int_relation(e);
                }
            }
            case ExprKind::Ternary:
                return m_->bdd_ite(eval_bool(e->args[0]), eval_bool(e->args[1]),
                                   eval_bool(e->args[2]));
            case ExprKind::ExactlyOneOf: {
                NodeId none = m_->bdd_true();
                NodeId one = m_->bdd_false();
                for (const auto& arg : e->args) {
                    NodeId a = eval_bool(arg);
                    one = m_->bdd_or(m_->bdd_and(one, m_->bdd_not(a)), m_->bdd_and(none, a));
                    none = m_->bdd_and(none, m_->bdd_not(a));
                }
                return one;
            }
            default:
                throw Error(ErrorKind::TypeError, "expression is not boolean");
        }
    }

    NodeId int_relation(const lang::ExprPtr& e) {
        using lang::BinOp;
        IntCases lhs = int_cases(e->args[0]);
        IntCases rhs = int_cases(e->args[1]);
        NodeId out = m_->bdd_false();
        for (const auto& [ga, va] : lhs) {
            for (const auto& [gb, vb] : rhs) {
                bool holds;
                switch (e->bin_op) {
                    case BinOp::Eq: holds = va == vb; break;
                    case BinOp::Ne: holds = va != vb; break;
                    case BinOp::Lt: holds = va < vb; break;
                    case BinOp::Le: holds = va <= vb; break;
                    case BinOp::Gt: holds = va > vb; break;
                    case BinOp::Ge: holds = va >= vb; break;
                    default:
                        throw Error(ErrorKind::TypeError, "unsupported relation");
                }
                if (holds) out = m_->bdd_or(out, m_->bdd_and(ga, gb));
            }
        }
        return out;
    }

    // --- one synchronous step ----------------------------------------------

    void advance() {
        std::size_t k = rp_.actions.size();

        // guards per expanded case and per command
        std::vector<std::vector<NodeId>> case_guard(expanded_.size());
        std::vector<NodeId> cmd_guard(rp_.commands.size(), m_->bdd_false());
        for (std::size_t c = 0; c < expanded_.size(); ++c) {
            const auto& cmd = rp_.commands[expanded_[c].command_index];
            NodeId base = eval_bool(cmd.guard);
            case_guard[c].resize(expanded_[c].cases.size());
            for (std::size_t x = 0; x < expanded_[c].cases.size(); ++x) {
                const auto& ec = expanded_[c].cases[x];
                NodeId g = base;
                for (const auto& [var, value] : ec.fixings) {
                    g = m_->bdd_and(g, var_value_cube(var, value));
                }
                if (ec.poisoned && g != m_->bdd_false()) {
                    throw Error(ErrorKind::NotWellDefined,
                                ec.poison_message + " [reachable at step " +
                                    std::to_string(step_ + 1) + "]");
                }
                case_guard[c][x] = g;
                cmd_guard[expanded_[c].command_index] =
                    m_->bdd_or(cmd_guard[expanded_[c].command_index], g);
            }
        }

        // per (action, module): enabled-count layers and per-command picks
        // pick[c] = this command is the module's choice, given its action fires
        std::vector<NodeId> pick(rp_.commands.size(), m_->bdd_false());
        // per action: (weight, BDD) alternatives
        std::vector<std::vector<std::pair<long long, NodeId>>> action_weights(k);
        for (std::size_t a = 0; a < k; ++a) {
            std::vector<std::pair<long long, NodeId>> acc{{1, m_->bdd_true()}};
            for (const auto& [mi, cmds] : rp_.actions[a].per_module) {
                std::size_t r = cmds.size();
                // prefix[i][n]: among the first i commands exactly n enabled
                std::vector<std::vector<NodeId>> prefix(r + 1,
                                                        std::vector<NodeId>(r + 1, m_->bdd_false()));
                prefix[0][0] = m_->bdd_true();
                for (std::size_t i = 1; i <= r; ++i) {
                    NodeId g = cmd_guard[cmds[i - 1]];
                    for (std::size_t n = 0; n <= i; ++n) {
                        NodeId stay = m_->bdd_and(prefix[i - 1][n], m_->bdd_not(g));
                        NodeId grow = n > 0 ? m_->bdd_and(prefix[i - 1][n - 1], g) : m_->bdd_false();
                        prefix[i][n] = m_->bdd_or(stay, grow);
                    }
                }
                if (overlap_ == lang::OverlapPolicy::Reject) {
                    for (std::size_t n = 2; n <= r; ++n) {
                        if (prefix[r][n] != m_->bdd_false()) {
                            throw Error(ErrorKind::GuardOverlap,
                                        "overlapping guards for action '" + rp_.actions[a].display +
                                            "' in module '" + rp_.module_names[mi] + "'");
                        }
                    }
                }
                // command picks within the module
                for (std::size_t i = 1; i <= r; ++i) {
                    NodeId g = cmd_guard[cmds[i - 1]];
                    for (std::size_t cnt = 1; cnt <= r; ++cnt) {
                        NodeId total = prefix[r][cnt];
                        if (total == m_->bdd_false()) continue;
                        for (std::size_t n = 0; n < cnt; ++n) {
                            NodeId is_nth = m_->bdd_and(prefix[i - 1][n], g);
                            is_nth = m_->bdd_and(is_nth, total);
                            if (is_nth == m_->bdd_false()) continue;
                            if (cnt >= 2) {
                                auto it = pick_sites_.find({a, mi, cnt});
                                is_nth = m_->bdd_and(is_nth, chain_cube(it->second, n, cnt));
                            }
                            pick[cmds[i - 1]] = m_->bdd_or(pick[cmds[i - 1]], is_nth);
                        }
                    }
                }
                // combine the count into the action weight
                std::vector<std::pair<long long, NodeId>> next;
                for (const auto& [w, b] : acc) {
                    for (std::size_t n = 1; n <= r; ++n) {
                        NodeId nb = m_->bdd_and(b, prefix[r][n]);
                        if (nb == m_->bdd_false()) continue;
                        next.emplace_back(w * static_cast<long long>(n), nb);
                    }
                }
                // merge equal weights
                std::map<long long, NodeId> merged;
                for (const auto& [w, b] : next) {
                    auto [it, inserted] = merged.emplace(w, b);
                    if (!inserted) it->second = m_->bdd_or(it->second, b);
                }
                acc.assign(merged.begin(), merged.end());
            }
            action_weights[a] = std::move(acc);
        }

        // action selection
        std::vector<NodeId> selected(k, m_->bdd_false());
        if (k == 1) {
            NodeId enabled = m_->bdd_false();
            for (const auto& [w, b] : action_weights[0]) enabled = m_->bdd_or(enabled, b);
            selected[0] = enabled;
        } else {
            // joint contexts over the per-action weight alternatives
            std::vector<std::pair<std::vector<long long>, NodeId>> contexts{{{}, m_->bdd_true()}};
            for (std::size_t a = 0; a < k; ++a) {
                NodeId enabled = m_->bdd_false();
                for (const auto& [w, b] : action_weights[a]) enabled = m_->bdd_or(enabled, b);
                std::vector<std::pair<std::vector<long long>, NodeId>> next;
                for (const auto& [sig, b] : contexts) {
                    for (const auto& [w, wb] : action_weights[a]) {
                        NodeId nb = m_->bdd_and(b, wb);
                        if (nb == m_->bdd_false()) continue;
                        auto extended = sig;
                        extended.push_back(w);
                        next.emplace_back(std::move(extended), nb);
                    }
                    NodeId nb = m_->bdd_and(b, m_->bdd_not(enabled));
                    if (nb != m_->bdd_false()) {
                        auto extended = sig;
                        extended.push_back(0);
                        next.emplace_back(std::move(extended), nb);
                    }
                }
                contexts = std::move(next);
            }
            for (const auto& [sig, b] : contexts) {
                std::vector<std::size_t> enabled;
                for (std::size_t a = 0; a < k; ++a) {
                    if (sig[a] > 0) enabled.push_back(a);
                }
                if (enabled.empty()) continue; // stutter
                if (enabled.size() == 1) {
                    selected[enabled[0]] = m_->bdd_or(selected[enabled[0]], b);
                    continue;
                }
                auto it = scheduler_sites_.find(sig);
                if (it == scheduler_sites_.end()) {
                    throw Error(ErrorKind::Internal, "unplanned scheduler context");
                }
                for (std::size_t j = 0; j < enabled.size(); ++j) {
                    NodeId sel = m_->bdd_and(b, chain_cube(it->second, j, enabled.size()));
                    selected[enabled[j]] = m_->bdd_or(selected[enabled[j]], sel);
                }
            }
        }

        // map actions back to commands
        std::vector<std::size_t> action_of(rp_.commands.size(), 0);
        for (std::size_t a = 0; a < k; ++a) {
            for (const auto& [mi, cmds] : rp_.actions[a].per_module) {
                for (std::size_t c : cmds) action_of[c] = a;
            }
        }

        // writers per variable
        struct Writer {
            NodeId cond;
            std::size_t module_index;
            std::vector<NodeId> value_bits;
        };
        std::vector<std::vector<Writer>> writers(rp_.variables.size());

        for (std::size_t c = 0; c < expanded_.size(); ++c) {
            std::size_t ci = expanded_[c].command_index;
            const auto& cmd = rp_.commands[ci];
            NodeId fire_cmd = m_->bdd_and(selected[action_of[ci]], pick[ci]);
            if (fire_cmd == m_->bdd_false()) continue;
            for (std::size_t x = 0; x < expanded_[c].cases.size(); ++x) {
                NodeId fire_case = m_->bdd_and(fire_cmd, case_guard[c][x]);
                if (fire_case == m_->bdd_false()) continue;
                const CaseCoins& cc = case_coins_[c][x];
                for (std::size_t pos = 0; pos < cc.chain_to_update.size(); ++pos) {
                    const auto& update = cmd.updates[cc.chain_to_update[pos]];
                    NodeId fire = m_->bdd_and(
                        fire_case, chain_cube(cc.coins, pos, cc.chain_to_update.size()));
                    if (fire == m_->bdd_false()) continue;
                    for (const auto& [var_index, expr] : update.assignments) {
                        writers[var_index].push_back(
                            {fire, cmd.module_index, assignment_bits(var_index, expr, fire)});
                    }
                }
            }
        }

        // data races and next state
        std::vector<std::vector<NodeId>> next = bits_;
        for (std::size_t v = 0; v < rp_.variables.size(); ++v) {
            auto& list = writers[v];
            for (std::size_t i = 0; i < list.size(); ++i) {
                for (std::size_t j = i + 1; j < list.size(); ++j) {
                    if (list[i].module_index == list[j].module_index) continue;
                    if (m_->bdd_and(list[i].cond, list[j].cond) != m_->bdd_false()) {
                        throw Error(ErrorKind::DataRace,
                                    "variable '" + rp_.variables[v].name +
                                        "' written by two modules in step " +
                                        std::to_string(step_ + 1));
                    }
                }
            }
            for (const auto& w : list) {
                for (unsigned i = 0; i < rp_.shared_bitwidth; ++i) {
                    next[v][i] = m_->bdd_ite(w.cond, w.value_bits[i], next[v][i]);
                }
            }
        }
        bits_ = std::move(next);
    }

    std::vector<NodeId> assignment_bits(std::size_t var_index, const lang::ExprPtr& expr,
                                        NodeId fire) {
        const auto& var = rp_.variables[var_index];
        std::vector<NodeId> out(rp_.shared_bitwidth, m_->bdd_false());
        if (var.is_bool) {
            out[0] = eval_bool(expr);
            return out;
        }
        for (const auto& [g, value] : int_cases(expr)) {
            if (value < var.low || value > var.high) {
                if (m_->bdd_and(g, fire) != m_->bdd_false()) {
                    throw Error(ErrorKind::OutOfDomain,
                                "update sets " + var.name + "=" + std::to_string(value) +
                                    " outside [" + std::to_string(var.low) + ".." +
                                    std::to_string(var.high) + "] in step " +
                                    std::to_string(step_ + 1));
                }
                continue;
            }
            long long offset = value - var.low;
            for (unsigned i = 0; i < rp_.shared_bitwidth; ++i) {
                if ((offset >> i) & 1) out[i] = m_->bdd_or(out[i], g);
            }
        }
        return out;
    }

    const ResolvedProgram& rp_;
    unsigned h_;
    lang::OverlapPolicy overlap_;
    SolutionFunction sf_;
    DdManager* m_ = nullptr;
    std::vector<lang::ExpandedCommand> expanded_;

    std::vector<Site> sites_;
    std::map<std::vector<long long>, std::vector<std::size_t>> scheduler_sites_;
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::vector<std::size_t>>
        pick_sites_;
    struct CaseCoins {
        std::vector<std::size_t> coins;           // k-1 chain coin sites
        std::vector<std::size_t> chain_to_update; // chain position -> update index
    };
    std::vector<std::vector<CaseCoins>> case_coins_;

    std::vector<std::vector<NodeId>> bits_; // per variable, LSB first
    unsigned step_ = 0;
};

SolutionFunction unroll_program(const ResolvedProgram& rp, const std::string& target_label,
                                unsigned h, lang::OverlapPolicy overlap) {
    lang::ExprPtr label_expr;
    if (!target_label.empty()) {
        auto it = rp.labels.find(target_label);
        if (it == rp.labels.end()) {
            throw Error(ErrorKind::UnknownVariable, "unknown label \"" + target_label + "\"");
        }
        label_expr = it->second;
    }
    return Unroller(rp, h, overlap).run(label_expr, nullptr);
}

SolutionFunction unroll_program_states(const ResolvedProgram& rp,
                                       const std::vector<StateValues>& target_states, unsigned h,
                                       lang::OverlapPolicy overlap) {
    return Unroller(rp, h, overlap).run(nullptr, &target_states);
}

SolutionFunction unroll_program_reach_avoid(const ResolvedProgram& rp,
                                            const std::vector<StateValues>& target_states,
                                            const lang::ExprPtr& avoid, unsigned h,
                                            lang::OverlapPolicy overlap) {
    return Unroller(rp, h, overlap).run(nullptr, &target_states, avoid);
}

// --- weighted model counting over explicit weights ---------------------------

Rational weighted_model_count(const DdManager& m, NodeId root,
                              const std::vector<Rational>& weights_by_var) {
    std::vector<signed char> seen(m.size(), 0);
    std::vector<Rational> memo(m.size());
    std::function<const Rational&(NodeId)> value = [&](NodeId n) -> const Rational& {
        if (!seen[n]) {
            seen[n] = 1;
            if (m.is_terminal(n)) {
                memo[n] = Rational(m.bool_value(n) ? 1 : 0);
            } else {
                VarId v = m.var_of(n);
                if (v >= weights_by_var.size()) {
                    throw Error(ErrorKind::MissingWeight,
                                "no weight for variable " + m.variable_name(v));
                }
                const Rational& w = weights_by_var[v];
                memo[n] = w * value(m.high(n)) + (Rational(1) - w) * value(m.low(n));
            }
        }
        return memo[n];
    };
    return value(root);
}

MarkovChain bdd_as_mc(const DdManager& m, NodeId root,
                      const std::vector<Rational>& weights_by_var) {
    MarkovChain out;
    std::map<NodeId, StateId> ids;
    std::vector<NodeId> order;
    std::function<void(NodeId)> discover = [&](NodeId n) {
        if (ids.count(n)) return;
        StateInfo info;
        if (m.is_terminal(n)) {
            info.name = m.bool_value(n) ? "T" : "F";
        } else {
            info.name = m.variable_name(m.var_of(n)) + "@" + std::to_string(n);
        }
        ids.emplace(n, out.add_state(std::move(info)));
        order.push_back(n);
        if (!m.is_terminal(n)) {
            discover(m.high(n));
            discover(m.low(n));
        }
    };
    discover(root);
    for (NodeId n : order) {
        StateId s = ids[n];
        if (m.is_terminal(n)) {
            out.set_row(s, Distribution::dirac(s));
            if (m.bool_value(n)) out.add_target(s);
            continue;
        }
        VarId v = m.var_of(n);
        if (v >= weights_by_var.size()) {
            throw Error(ErrorKind::MissingWeight, "no weight for variable " + m.variable_name(v));
        }
        const Rational& w = weights_by_var[v];
        out.set_row(s, Distribution::constants(
                           {{ids[m.high(n)], w}, {ids[m.low(n)], Rational(1) - w}}));
    }
    out.set_initial(ids[root]);
    out.validate();
    return out;
}

std::vector<SampleOutcome> sample_many(const SolutionFunction& sf,
                                       const std::vector<Valuation>& valuations, bool exact) {
    std::vector<SampleOutcome> out;
    out.reserve(valuations.size());
    for (const auto& u : valuations) {
        SampleOutcome item;
        try {
            if (exact) {
                item.value = sf.evaluate(u);
                item.value_float = item.value.to_double();
            } else {
                item.value_float = sf.evaluate_float(u);
            }
            item.ok = true;
        } catch (const Error& e) {
            item.error = e.what();
        }
        out.push_back(std::move(item));
    }
    return out;
}

Bounds indefinite_bounds(const MarkovChain& mc, unsigned h) {
    if (mc.is_parametric()) {
        throw Error(ErrorKind::TypeError, "bounds need a constant chain; instantiate first");
    }
    Bounds bounds;
    bounds.lower = unroll_chain(mc, h).evaluate();
    std::vector<StateId> bad = bad_states(mc);
    if (bad.empty()) {
        bounds.upper = Rational(1);
    } else {
        // Pr(reach Bad before T): targets stay absorbing so mass that already
        // reached T never leaks into Bad
        MarkovChain blocked = with_targets(make_absorbing(mc), bad);
        bounds.upper = Rational(1) - unroll_chain(blocked, h).evaluate();
    }
    return bounds;
}

Bounds indefinite_bounds_program(const ResolvedProgram& rp, const std::string& target_label,
                                 unsigned h, std::size_t state_cap) {
    if (!rp.parameters.empty()) {
        throw Error(ErrorKind::TypeError, "bounds need a constant model");
    }
    lang::BuildOptions options;
    options.state_cap = state_cap;
    lang::BuiltModel built = lang::build_explicit(rp, target_label, options);
    Bounds bounds;
    bounds.lower = unroll_program(rp, target_label, h).evaluate();
    std::vector<StateValues> bad_values;
    for (StateId s : bad_states(built.chain)) bad_values.push_back(built.values[s]);
    if (bad_values.empty()) {
        bounds.upper = Rational(1);
    } else {
        auto it = rp.labels.find(target_label);
        lang::ExprPtr avoid = it == rp.labels.end() ? nullptr : it->second;
        bounds.upper =
            Rational(1) - unroll_program_reach_avoid(rp, bad_values, avoid, h).evaluate();
    }
    return bounds;
}

} // namespace pmc::wmc
