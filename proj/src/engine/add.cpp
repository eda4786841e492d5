#include "pmc/engine/add.hpp"

#include "pmc/errors.hpp"

#include <algorithm>
#include <map>

namespace pmc::engine {

namespace {

unsigned bits_for(std::size_t n) {
    unsigned b = 1;
    while ((std::size_t{1} << b) < n) ++b;
    return b;
}

} // namespace

AddEngine::AddEngine(const MarkovChain& mc) : mc_(mc), bits_(bits_for(mc.num_states())) {
    if ((std::size_t{1} << bits_) < mc.num_states()) {
        throw Error(ErrorKind::EncodingTooSmall, "state space does not fit the encoding");
    }
    manager_ = std::make_unique<dd::DdManager>();
    for (unsigned bit = 0; bit < bits_; ++bit) {
        std::string name(1, static_cast<char>('x' + (bit % 3)));
        if (bit >= 3) name += std::to_string(bit / 3);
        manager_->add_variable(name);
        manager_->add_variable(name + "'");
    }
    rows_.resize(mc.num_states());
    for (StateId s = 0; s < mc.num_states(); ++s) {
        for (const auto& b : mc.row(s).branches()) {
            rows_[s].emplace_back(b.target, b.weight);
        }
        std::sort(rows_[s].begin(), rows_[s].end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }
}

dd::NodeId AddEngine::build_matrix_rec(bool absorbing, unsigned var_index, StateId row_acc,
                                       StateId col_acc) {
    if (var_index == 2 * bits_) {
        if (absorbing && mc_.is_target(row_acc)) {
            return manager_->constant(Rational(row_acc == col_acc ? 1 : 0));
        }
        const auto& row = rows_[row_acc];
        auto it = std::lower_bound(row.begin(), row.end(), col_acc,
                                   [](const auto& a, StateId t) { return a.first < t; });
        if (it != row.end() && it->first == col_acc) return manager_->constant(it->second);
        return manager_->constant(Rational(0));
    }
    unsigned bit = var_index / 2;
    bool row_side = (var_index % 2) == 0;
    StateId acc = row_side ? row_acc : col_acc;
    StateId with_bit = acc | (StateId{1} << bit);
    dd::NodeId lo = build_matrix_rec(absorbing, var_index + 1, row_acc, col_acc);
    dd::NodeId hi;
    if (with_bit >= mc_.num_states()) {
        hi = manager_->constant(Rational(0)); // unencoded combination
    } else if (row_side) {
        hi = build_matrix_rec(absorbing, var_index + 1, with_bit, col_acc);
    } else {
        hi = build_matrix_rec(absorbing, var_index + 1, row_acc, with_bit);
    }
    if (lo == hi) return lo;
    // children of var_index are built before the node itself; reuse via the
    // unique table happens inside the manager
    return manager_->add_ite(manager_->bdd_var(var_index), hi, lo);
}

dd::NodeId AddEngine::build_matrix(bool absorbing) {
    return build_matrix_rec(absorbing, 0, 0, 0);
}

dd::NodeId AddEngine::transition_add() {
    if (!transition_built_) {
        transition_cache_ = build_matrix(false);
        transition_built_ = true;
    }
    return transition_cache_;
}

dd::NodeId AddEngine::transition_add_absorbing() {
    if (!absorbing_built_) {
        absorbing_cache_ = build_matrix(true);
        absorbing_built_ = true;
    }
    return absorbing_cache_;
}

dd::NodeId AddEngine::build_indicator_rec(const std::vector<bool>& member, unsigned bit,
                                          StateId acc, bool row_side) {
    if (bit == bits_) {
        return manager_->constant(Rational(acc < mc_.num_states() && member[acc] ? 1 : 0));
    }
    StateId with_bit = acc | (StateId{1} << bit);
    dd::NodeId lo = build_indicator_rec(member, bit + 1, acc, row_side);
    dd::NodeId hi = with_bit < mc_.num_states()
                        ? build_indicator_rec(member, bit + 1, with_bit, row_side)
                        : manager_->constant(Rational(0));
    if (lo == hi) return lo;
    dd::VarId var = row_side ? row_var(bit) : col_var(bit);
    return manager_->add_ite(manager_->bdd_var(var), hi, lo);
}

dd::NodeId AddEngine::indicator_row(const std::vector<StateId>& states) {
    std::vector<bool> member(mc_.num_states(), false);
    for (StateId s : states) member[s] = true;
    return build_indicator_rec(member, 0, 0, true);
}

dd::NodeId AddEngine::matvec(dd::NodeId matrix, dd::NodeId vector_col) {
    for (dd::NodeId n : manager_->reachable(vector_col)) {
        if (!manager_->is_terminal(n) && manager_->var_of(n) % 2 == 0) {
            throw Error(ErrorKind::VariableClash, "vector argument uses row variables");
        }
    }
    dd::NodeId product = manager_->add_times(matrix, vector_col);
    for (unsigned bit = 0; bit < bits_; ++bit) {
        dd::VarId v = col_var(bit);
        product = manager_->add_plus(manager_->restrict_var(product, v, false),
                                     manager_->restrict_var(product, v, true));
    }
    return product;
}

dd::NodeId AddEngine::rename_rows_to_cols(dd::NodeId f) {
    std::map<dd::VarId, dd::VarId> map;
    for (unsigned bit = 0; bit < bits_; ++bit) map[row_var(bit)] = col_var(bit);
    return manager_->rename(f, map);
}

AddEngine::ReachResult AddEngine::bounded_reach(unsigned h) {
    ReachResult result;
    dd::NodeId a = transition_add_absorbing();
    dd::NodeId x_row = indicator_row(mc_.targets());
    result.stats.push_back({0, manager_->node_count(x_row), manager_->terminal_values(x_row).size()});
    for (unsigned i = 1; i <= h; ++i) {
        dd::NodeId x_col = rename_rows_to_cols(x_row);
        x_row = matvec(a, x_col);
        result.stats.push_back(
            {i, manager_->node_count(x_row), manager_->terminal_values(x_row).size()});
    }
    result.vector_row = x_row;
    result.value_at_initial = value_at(x_row, mc_.initial());
    return result;
}

Polynomial AddEngine::value_at(dd::NodeId vector_row, StateId s) const {
    std::vector<bool> assignment(manager_->num_variables(), false);
    for (unsigned bit = 0; bit < bits_; ++bit) {
        assignment[2 * bit] = (s >> bit) & 1u;
    }
    return manager_->eval_add(vector_row, assignment);
}

} // namespace pmc::engine
