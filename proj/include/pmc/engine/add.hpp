#pragma once

#include "pmc/chain.hpp"
#include "pmc/dd.hpp"

#include <memory>
#include <vector>

namespace pmc::engine {

// Symbolic engine: transition matrix and probability vector as ADDs over an
// interleaved row/column bit encoding of state ids (x, x', y, y', ...).
class AddEngine {
public:
    explicit AddEngine(const MarkovChain& mc);

    dd::DdManager& manager() { return *manager_; }
    unsigned bits() const { return bits_; }
    dd::VarId row_var(unsigned bit) const { return 2 * bit; }
    dd::VarId col_var(unsigned bit) const { return 2 * bit + 1; }

    // P as an ADD: eval at (row(s), col(s')) = P(s,s'); unencoded
    // combinations map to 0.
    dd::NodeId transition_add();
    // A: target rows replaced by identity.
    dd::NodeId transition_add_absorbing();

    // Indicator vector over row bits.
    dd::NodeId indicator_row(const std::vector<StateId>& states);

    // Sum over column bits of A(row,col)*x(col); result is over row bits.
    dd::NodeId matvec(dd::NodeId matrix, dd::NodeId vector_col);

    dd::NodeId rename_rows_to_cols(dd::NodeId f);

    struct IterationStats {
        unsigned h;
        std::size_t vector_nodes;
        std::size_t vector_leaves;
    };

    struct ReachResult {
        dd::NodeId vector_row; // over row bits, after h steps
        Polynomial value_at_initial;
        std::vector<IterationStats> stats;
    };

    // h matrix-vector products from the target indicator.
    ReachResult bounded_reach(unsigned h);

    // Evaluates a row-bit vector ADD at a state.
    Polynomial value_at(dd::NodeId vector_row, StateId s) const;

private:
    const MarkovChain& mc_;
    std::unique_ptr<dd::DdManager> manager_;
    unsigned bits_;
    std::vector<std::vector<std::pair<StateId, Polynomial>>> rows_; // per-state successor map
    dd::NodeId transition_cache_ = 0;
    dd::NodeId absorbing_cache_ = 0;
    bool transition_built_ = false;
    bool absorbing_built_ = false;

    dd::NodeId build_matrix(bool absorbing);
    dd::NodeId build_matrix_rec(bool absorbing, unsigned var_index, StateId row_acc,
                                StateId col_acc);
    dd::NodeId build_indicator_rec(const std::vector<bool>& member, unsigned bit, StateId acc,
                                   bool row_side);
};

} // namespace pmc::engine
