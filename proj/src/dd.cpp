#include "pmc/dd.hpp"

#include "pmc/errors.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <unordered_set>

namespace pmc::dd {

DdManager::DdManager() {
    // ids 0 and 1 are the boolean terminals
    nodes_.push_back({kTerminalVar, 0, 0});
    nodes_.push_back({kTerminalVar, 1, 1});
    algebraic_.push_back(false);
    algebraic_.push_back(false);
}

VarId DdManager::add_variable(std::string name) {
    require_unfrozen();
    variable_names_.push_back(std::move(name));
    return static_cast<VarId>(variable_names_.size() - 1);
}

void DdManager::require_unfrozen() const {
    if (frozen_) {
        throw Error(ErrorKind::Internal, "manager is frozen");
    }
}

NodeId DdManager::make(VarId var, NodeId lo, NodeId hi) {
    if (lo == hi) return lo;
    assert(var < variable_names_.size());
    assert(is_terminal(lo) || nodes_[lo].var > var);
    assert(is_terminal(hi) || nodes_[hi].var > var);
    UniqueKey key{var, lo, hi};
    auto it = unique_table_.find(key);
    if (it != unique_table_.end()) return it->second;
    require_unfrozen();
    NodeId id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back({var, lo, hi});
    algebraic_.push_back(algebraic_[lo] || algebraic_[hi]);
    unique_table_.emplace(key, id);
    return id;
}

NodeId DdManager::bdd_var(VarId v) {
    if (v >= variable_names_.size()) {
        throw Error(ErrorKind::UnknownVariable, "unknown dd variable id " + std::to_string(v));
    }
    return make(v, bdd_false(), bdd_true());
}

NodeId DdManager::bdd_nvar(VarId v) {
    if (v >= variable_names_.size()) {
        throw Error(ErrorKind::UnknownVariable, "unknown dd variable id " + std::to_string(v));
    }
    return make(v, bdd_true(), bdd_false());
}

NodeId DdManager::constant(Polynomial value) {
    auto it = constant_table_.find(value);
    if (it != constant_table_.end()) return it->second;
    require_unfrozen();
    NodeId id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back({kTerminalVar, id, id});
    algebraic_.push_back(true);
    payload_index_.emplace(id, terminal_payloads_.size());
    terminal_payloads_.push_back(value);
    constant_table_.emplace(std::move(value), id);
    return id;
}

bool DdManager::bool_value(NodeId terminal) const {
    if (terminal > 1) {
        throw Error(ErrorKind::MixedTerminalKinds, "node is not a boolean terminal");
    }
    return terminal == 1;
}

const Polynomial& DdManager::value(NodeId terminal) const {
    auto it = payload_index_.find(terminal);
    if (it == payload_index_.end()) {
        throw Error(ErrorKind::MixedTerminalKinds, "node is not an algebraic terminal");
    }
    return terminal_payloads_[it->second];
}

void DdManager::require_boolean(NodeId n, const char* context) const {
    if (algebraic_[n]) {
        throw Error(ErrorKind::MixedTerminalKinds,
                    std::string(context) + " expects a boolean diagram");
    }
}

void DdManager::require_algebraic(NodeId n, const char* context) const {
    if (!algebraic_[n] && n > 1) {
        throw Error(ErrorKind::MixedTerminalKinds,
                    std::string(context) + " expects an algebraic diagram");
    }
    if (n <= 1) {
        throw Error(ErrorKind::MixedTerminalKinds,
                    std::string(context) + " got a boolean terminal");
    }
}

VarId DdManager::top_var(NodeId a, NodeId b) const {
    return std::min(nodes_[a].var, nodes_[b].var);
}

NodeId DdManager::apply_bool(Op op, NodeId a, NodeId b) {
    switch (op) {
        case Op::And:
            if (a == bdd_false() || b == bdd_false()) return bdd_false();
            if (a == bdd_true()) return b;
            if (b == bdd_true()) return a;
            if (a == b) return a;
            break;
        case Op::Or:
            if (a == bdd_true() || b == bdd_true()) return bdd_true();
            if (a == bdd_false()) return b;
            if (b == bdd_false()) return a;
            if (a == b) return a;
            break;
        case Op::Xor:
            if (a == bdd_false()) return b;
            if (b == bdd_false()) return a;
            if (a == b) return bdd_false();
            break;
        default:
            throw Error(ErrorKind::Internal, "bad boolean op");
    }
    if ((op == Op::And || op == Op::Or || op == Op::Xor) && a > b) std::swap(a, b);
    CacheKey key{op, a, b, 0};
    auto it = op_cache_.find(key);
    if (it != op_cache_.end()) return it->second;
    VarId v = top_var(a, b);
    NodeId a0 = nodes_[a].var == v ? nodes_[a].lo : a;
    NodeId a1 = nodes_[a].var == v ? nodes_[a].hi : a;
    NodeId b0 = nodes_[b].var == v ? nodes_[b].lo : b;
    NodeId b1 = nodes_[b].var == v ? nodes_[b].hi : b;
    NodeId r = make(v, apply_bool(op, a0, b0), apply_bool(op, a1, b1));
    op_cache_.emplace(key, r);
    return r;
}

NodeId DdManager::bdd_not(NodeId a) {
    require_boolean(a, "not");
    if (a == bdd_false()) return bdd_true();
    if (a == bdd_true()) return bdd_false();
    CacheKey key{Op::Not, a, 0, 0};
    auto it = op_cache_.find(key);
    if (it != op_cache_.end()) return it->second;
    NodeId r = make(nodes_[a].var, bdd_not(nodes_[a].lo), bdd_not(nodes_[a].hi));
    op_cache_.emplace(key, r);
    return r;
}

NodeId DdManager::bdd_and(NodeId a, NodeId b) {
    require_boolean(a, "and");
    require_boolean(b, "and");
    return apply_bool(Op::And, a, b);
}

NodeId DdManager::bdd_or(NodeId a, NodeId b) {
    require_boolean(a, "or");
    require_boolean(b, "or");
    return apply_bool(Op::Or, a, b);
}

NodeId DdManager::bdd_xor(NodeId a, NodeId b) {
    require_boolean(a, "xor");
    require_boolean(b, "xor");
    return apply_bool(Op::Xor, a, b);
}

NodeId DdManager::bdd_ite(NodeId c, NodeId t, NodeId e) {
    require_boolean(c, "ite");
    require_boolean(t, "ite");
    require_boolean(e, "ite");
    if (c == bdd_true()) return t;
    if (c == bdd_false()) return e;
    if (t == e) return t;
    if (t == bdd_true() && e == bdd_false()) return c;
    CacheKey key{Op::Ite, c, t, e};
    auto it = op_cache_.find(key);
    if (it != op_cache_.end()) return it->second;
    VarId v = std::min(nodes_[c].var, std::min(nodes_[t].var, nodes_[e].var));
    auto cof = [&](NodeId n, bool hi) {
        return nodes_[n].var == v ? (hi ? nodes_[n].hi : nodes_[n].lo) : n;
    };
    NodeId r = make(v, bdd_ite(cof(c, false), cof(t, false), cof(e, false)),
                    bdd_ite(cof(c, true), cof(t, true), cof(e, true)));
    op_cache_.emplace(key, r);
    return r;
}

NodeId DdManager::apply_add(Op op, NodeId a, NodeId b) {
    if (is_terminal(a) && is_terminal(b)) {
        const Polynomial& pa = value(a);
        const Polynomial& pb = value(b);
        return constant(op == Op::Plus ? pa + pb : pa * pb);
    }
    if (op == Op::Plus) {
        if (is_terminal(a) && value(a).is_zero()) return b;
        if (is_terminal(b) && value(b).is_zero()) return a;
    } else {
        if (is_terminal(a) && value(a).is_zero()) return a;
        if (is_terminal(b) && value(b).is_zero()) return b;
        if (is_terminal(a) && value(a) == Polynomial(Rational(1))) return b;
        if (is_terminal(b) && value(b) == Polynomial(Rational(1))) return a;
    }
    if (a > b) std::swap(a, b); // both ops commute
    CacheKey key{op, a, b, 0};
    auto it = op_cache_.find(key);
    if (it != op_cache_.end()) return it->second;
    VarId v = top_var(a, b);
    NodeId a0 = nodes_[a].var == v ? nodes_[a].lo : a;
    NodeId a1 = nodes_[a].var == v ? nodes_[a].hi : a;
    NodeId b0 = nodes_[b].var == v ? nodes_[b].lo : b;
    NodeId b1 = nodes_[b].var == v ? nodes_[b].hi : b;
    NodeId r = make(v, apply_add(op, a0, b0), apply_add(op, a1, b1));
    op_cache_.emplace(key, r);
    return r;
}

NodeId DdManager::add_plus(NodeId a, NodeId b) {
    require_algebraic(a, "add-plus");
    require_algebraic(b, "add-plus");
    return apply_add(Op::Plus, a, b);
}

NodeId DdManager::add_times(NodeId a, NodeId b) {
    require_algebraic(a, "add-times");
    require_algebraic(b, "add-times");
    return apply_add(Op::Times, a, b);
}

NodeId DdManager::add_ite(NodeId cond, NodeId t, NodeId e) {
    require_boolean(cond, "add-ite");
    require_algebraic(t, "add-ite");
    require_algebraic(e, "add-ite");
    if (cond == bdd_true()) return t;
    if (cond == bdd_false()) return e;
    if (t == e) return t;
    CacheKey key{Op::AddIte, cond, t, e};
    auto it = op_cache_.find(key);
    if (it != op_cache_.end()) return it->second;
    VarId v = std::min(nodes_[cond].var, std::min(nodes_[t].var, nodes_[e].var));
    auto cof = [&](NodeId n, bool hi) {
        return nodes_[n].var == v ? (hi ? nodes_[n].hi : nodes_[n].lo) : n;
    };
    NodeId r = make(v, add_ite(cof(cond, false), cof(t, false), cof(e, false)),
                    add_ite(cof(cond, true), cof(t, true), cof(e, true)));
    op_cache_.emplace(key, r);
    return r;
}

NodeId DdManager::add_from_bdd(NodeId a) {
    require_boolean(a, "add-from-bdd");
    if (a == bdd_false()) return constant(Rational(0));
    if (a == bdd_true()) return constant(Rational(1));
    CacheKey key{Op::FromBdd, a, 0, 0};
    auto it = op_cache_.find(key);
    if (it != op_cache_.end()) return it->second;
    NodeId r = make(nodes_[a].var, add_from_bdd(nodes_[a].lo), add_from_bdd(nodes_[a].hi));
    op_cache_.emplace(key, r);
    return r;
}

NodeId DdManager::restrict_var(NodeId f, VarId v, bool val) {
    if (is_terminal(f) || nodes_[f].var > v) return f;
    if (nodes_[f].var == v) return val ? nodes_[f].hi : nodes_[f].lo;
    CacheKey key{val ? Op::Restrict1 : Op::Restrict0, f, v, 0};
    auto it = op_cache_.find(key);
    if (it != op_cache_.end()) return it->second;
    NodeId r = make(nodes_[f].var, restrict_var(nodes_[f].lo, v, val),
                    restrict_var(nodes_[f].hi, v, val));
    op_cache_.emplace(key, r);
    return r;
}

NodeId DdManager::rename(NodeId f, const std::map<VarId, VarId>& var_map) {
    // monotonicity check so the rebuild preserves the order
    VarId prev_from = 0, prev_to = 0;
    bool first = true;
    for (const auto& [from, to] : var_map) {
        if (!first && !(from > prev_from && to > prev_to)) {
            throw Error(ErrorKind::VariableClash, "rename map is not order-monotone");
        }
        first = false;
        prev_from = from;
        prev_to = to;
    }
    std::unordered_map<NodeId, NodeId> memo;
    auto rec = [&](auto&& self, NodeId n) -> NodeId {
        if (is_terminal(n)) return n;
        auto it = memo.find(n);
        if (it != memo.end()) return it->second;
        VarId v = nodes_[n].var;
        auto mapped = var_map.find(v);
        if (mapped != var_map.end()) v = mapped->second;
        NodeId r = make(v, self(self, nodes_[n].lo), self(self, nodes_[n].hi));
        memo.emplace(n, r);
        return r;
    };
    return rec(rec, f);
}

bool DdManager::eval_bdd(NodeId f, const std::vector<bool>& assignment) const {
    while (!is_terminal(f)) {
        f = assignment.at(nodes_[f].var) ? nodes_[f].hi : nodes_[f].lo;
    }
    return bool_value(f);
}

const Polynomial& DdManager::eval_add(NodeId f, const std::vector<bool>& assignment) const {
    while (!is_terminal(f)) {
        f = assignment.at(nodes_[f].var) ? nodes_[f].hi : nodes_[f].lo;
    }
    return value(f);
}

std::vector<NodeId> DdManager::reachable(NodeId root) const {
    std::vector<NodeId> out;
    std::unordered_set<NodeId> seen;
    std::vector<NodeId> stack{root};
    while (!stack.empty()) {
        NodeId n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) continue;
        out.push_back(n);
        if (!is_terminal(n)) {
            stack.push_back(nodes_[n].lo);
            stack.push_back(nodes_[n].hi);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Polynomial> DdManager::terminal_values(NodeId root) const {
    std::vector<Polynomial> out;
    for (NodeId n : reachable(root)) {
        if (is_terminal(n) && n > 1) out.push_back(value(n));
    }
    std::sort(out.begin(), out.end());
    return out;
}

unsigned long long DdManager::bdd_model_count(NodeId root) const {
    std::unordered_map<NodeId, unsigned long long> memo;
    unsigned long long total_vars = variable_names_.size();
    auto level = [&](NodeId n) {
        return is_terminal(n) ? total_vars : static_cast<unsigned long long>(nodes_[n].var);
    };
    auto rec = [&](auto&& self, NodeId n) -> unsigned long long {
        if (n == bdd_false()) return 0;
        if (n == bdd_true()) return 1;
        auto it = memo.find(n);
        if (it != memo.end()) return it->second;
        unsigned long long lo = self(self, nodes_[n].lo) << (level(nodes_[n].lo) - nodes_[n].var - 1);
        unsigned long long hi = self(self, nodes_[n].hi) << (level(nodes_[n].hi) - nodes_[n].var - 1);
        unsigned long long r = lo + hi;
        memo.emplace(n, r);
        return r;
    };
    return rec(rec, root) << level(root);
}

void DdManager::clear_cache() {
    op_cache_.clear();
}

void DdManager::audit() const {
    for (NodeId n = 0; n < nodes_.size(); ++n) {
        if (is_terminal(n)) continue;
        const Node& node = nodes_[n];
        if (node.lo == node.hi) {
            throw Error(ErrorKind::Internal, "redundant node survived reduction");
        }
        if (node.var >= variable_names_.size()) {
            throw Error(ErrorKind::Internal, "node references unknown variable");
        }
        for (NodeId child : {node.lo, node.hi}) {
            if (!is_terminal(child) && nodes_[child].var <= node.var) {
                throw Error(ErrorKind::Internal, "variable order violated");
            }
        }
        auto it = unique_table_.find({node.var, node.lo, node.hi});
        if (it == unique_table_.end() || it->second != n) {
            throw Error(ErrorKind::Internal, "unique table inconsistent");
        }
    }
    if (unique_table_.size() + 2 + terminal_payloads_.size() != nodes_.size()) {
        throw Error(ErrorKind::Internal, "unique table size mismatch");
    }
}

std::string DdManager::to_dot(NodeId root, const std::string& graph_name) const {
    std::ostringstream os;
    os << "digraph " << graph_name << " {\n";
    for (NodeId n : reachable(root)) {
        if (is_terminal(n)) {
            std::string label = n == 0 ? "F" : n == 1 ? "T" : value(n).str();
            os << "  n" << n << " [shape=box,label=\"" << label << "\"];\n";
        } else {
            os << "  n" << n << " [shape=circle,label=\"" << variable_names_[nodes_[n].var]
               << "\"];\n";
            os << "  n" << n << " -> n" << nodes_[n].lo << " [style=dashed];\n";
            os << "  n" << n << " -> n" << nodes_[n].hi << ";\n";
        }
    }
    os << "}\n";
    return os.str();
}

} // namespace pmc::dd
