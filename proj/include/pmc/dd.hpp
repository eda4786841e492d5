#pragma once

#include "pmc/polynomial.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace pmc::dd {

using NodeId = std::uint32_t;
using VarId = std::uint32_t;

// Hash-consed reduced ordered decision diagrams. One manager serves plain
// BDDs (boolean terminals) and ADDs (polynomial terminals; rationals are
// constant polynomials). The variable order is the creation order and never
// changes. Nodes live for the lifetime of the manager.
//
// A manager is single-writer; after freeze() the structure is read-only and
// safe to share across threads.
class DdManager {
public:
    static constexpr VarId kTerminalVar = std::numeric_limits<VarId>::max();

    DdManager();

    VarId add_variable(std::string name);
    std::size_t num_variables() const { return variable_names_.size(); }
    const std::string& variable_name(VarId v) const { return variable_names_.at(v); }

    NodeId bdd_false() const { return 0; }
    NodeId bdd_true() const { return 1; }
    NodeId bdd_var(VarId v);
    NodeId bdd_nvar(VarId v);

    NodeId constant(Polynomial value);
    NodeId constant(const Rational& value) { return constant(Polynomial(value)); }

    bool is_terminal(NodeId n) const { return nodes_[n].var == kTerminalVar; }
    bool is_algebraic(NodeId n) const { return algebraic_[n]; }
    VarId var_of(NodeId n) const { return nodes_[n].var; }
    NodeId low(NodeId n) const { return nodes_[n].lo; }
    NodeId high(NodeId n) const { return nodes_[n].hi; }
    bool bool_value(NodeId terminal) const;
    const Polynomial& value(NodeId terminal) const;

    NodeId bdd_not(NodeId a);
    NodeId bdd_and(NodeId a, NodeId b);
    NodeId bdd_or(NodeId a, NodeId b);
    NodeId bdd_xor(NodeId a, NodeId b);
    NodeId bdd_ite(NodeId c, NodeId t, NodeId e);

    NodeId add_plus(NodeId a, NodeId b);
    NodeId add_times(NodeId a, NodeId b);
    // cond is boolean, branches are algebraic.
    NodeId add_ite(NodeId cond, NodeId t, NodeId e);
    NodeId add_from_bdd(NodeId a);

    // Cofactor w.r.t. one variable; works for both kinds.
    NodeId restrict_var(NodeId f, VarId v, bool value);
    // Rebuilds f with variables substituted per map (must be monotone in the
    // order); variables not in the map are kept.
    NodeId rename(NodeId f, const std::map<VarId, VarId>& var_map);

    bool eval_bdd(NodeId f, const std::vector<bool>& assignment) const;
    const Polynomial& eval_add(NodeId f, const std::vector<bool>& assignment) const;

    std::vector<NodeId> reachable(NodeId root) const;
    std::size_t node_count(NodeId root) const { return reachable(root).size(); }
    std::vector<Polynomial> terminal_values(NodeId root) const;
    unsigned long long bdd_model_count(NodeId root) const;

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }
    void clear_cache();
    std::size_t size() const { return nodes_.size(); }

    // Structural invariant walk over the whole arena: reducedness,
    // uniqueness, strictly increasing variable levels.
    void audit() const;

    std::string to_dot(NodeId root, const std::string& graph_name = "dd") const;

private:
    struct Node {
        VarId var;
        NodeId lo;
        NodeId hi;
    };

    enum class Op : std::uint8_t { And, Or, Xor, Not, Ite, Plus, Times, AddIte, Restrict0, Restrict1, FromBdd };

    struct CacheKey {
        Op op;
        NodeId a, b, c;
        bool operator==(const CacheKey&) const = default;
    };
    struct CacheKeyHash {
        std::size_t operator()(const CacheKey& k) const {
            std::size_t h = static_cast<std::size_t>(k.op);
            h = h * 0x100000001b3ULL ^ k.a;
            h = h * 0x100000001b3ULL ^ k.b;
            h = h * 0x100000001b3ULL ^ k.c;
            return h;
        }
    };
    struct UniqueKey {
        VarId var;
        NodeId lo, hi;
        bool operator==(const UniqueKey&) const = default;
    };
    struct UniqueKeyHash {
        std::size_t operator()(const UniqueKey& k) const {
            std::size_t h = k.var;
            h = h * 0x100000001b3ULL ^ k.lo;
            h = h * 0x100000001b3ULL ^ k.hi;
            return h;
        }
    };

    NodeId make(VarId var, NodeId lo, NodeId hi);
    NodeId apply_bool(Op op, NodeId a, NodeId b);
    NodeId apply_add(Op op, NodeId a, NodeId b);
    void require_boolean(NodeId n, const char* context) const;
    void require_algebraic(NodeId n, const char* context) const;
    void require_unfrozen() const;
    VarId top_var(NodeId a, NodeId b) const;

    std::vector<Node> nodes_;
    std::vector<bool> algebraic_;
    std::vector<Polynomial> terminal_payloads_; // parallel to ADD terminal nodes
    std::unordered_map<NodeId, std::size_t> payload_index_;
    std::unordered_map<Polynomial, NodeId> constant_table_;
    std::unordered_map<UniqueKey, NodeId, UniqueKeyHash> unique_table_;
    std::unordered_map<CacheKey, NodeId, CacheKeyHash> op_cache_;
    std::vector<std::string> variable_names_;
    bool frozen_ = false;
};

} // namespace pmc::dd
