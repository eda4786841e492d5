#include "pmc/engine/explicit.hpp"

#include "pmc/errors.hpp"

#include <ostream>

namespace pmc::engine {

namespace {

void require_constant(const MarkovChain& mc) {
    if (mc.is_parametric()) {
        throw Error(ErrorKind::TypeError, "engine needs a constant chain; instantiate first");
    }
}

std::vector<Rational> step(const MarkovChain& mc, const std::vector<Rational>& x) {
    std::vector<Rational> next(mc.num_states(), Rational(0));
    for (StateId s = 0; s < mc.num_states(); ++s) {
        if (mc.is_target(s)) {
            next[s] = Rational(1);
            continue;
        }
        Rational sum(0);
        for (const auto& b : mc.row(s).branches()) {
            sum += b.weight.constant_value() * x[b.target];
        }
        next[s] = std::move(sum);
    }
    return next;
}

} // namespace

std::vector<Rational> bounded_reach_explicit(const MarkovChain& mc, unsigned h) {
    require_constant(mc);
    std::vector<Rational> x(mc.num_states(), Rational(0));
    for (StateId t : mc.targets()) x[t] = Rational(1);
    for (unsigned i = 0; i < h; ++i) x = step(mc, x);
    return x;
}

std::vector<std::vector<Rational>> bounded_reach_table(const MarkovChain& mc, unsigned h) {
    require_constant(mc);
    std::vector<std::vector<Rational>> table;
    std::vector<Rational> x(mc.num_states(), Rational(0));
    for (StateId t : mc.targets()) x[t] = Rational(1);
    table.push_back(x);
    for (unsigned i = 0; i < h; ++i) {
        x = step(mc, x);
        table.push_back(x);
    }
    return table;
}

std::vector<double> bounded_reach_explicit_float(const MarkovChain& mc, unsigned h) {
    require_constant(mc);
    std::vector<double> x(mc.num_states(), 0.0);
    std::vector<double> weights;
    for (StateId t : mc.targets()) x[t] = 1.0;
    for (unsigned i = 0; i < h; ++i) {
        std::vector<double> next(mc.num_states(), 0.0);
        for (StateId s = 0; s < mc.num_states(); ++s) {
            if (mc.is_target(s)) {
                next[s] = 1.0;
                continue;
            }
            double sum = 0;
            for (const auto& b : mc.row(s).branches()) {
                sum += b.weight.constant_value().to_double() * x[b.target];
            }
            next[s] = sum;
        }
        x = std::move(next);
    }
    return x;
}

std::vector<Rational> unbounded_reach(const MarkovChain& mc, std::size_t size_cap) {
    require_constant(mc);
    if (mc.num_states() > size_cap) {
        throw Error(ErrorKind::SizeCap, "unbounded reachability capped at " +
                                            std::to_string(size_cap) + " states");
    }
    std::vector<StateId> bad = bad_states(mc);
    std::vector<bool> is_bad(mc.num_states(), false);
    for (StateId b : bad) is_bad[b] = true;

    // unknowns: states that can reach T but are not in T
    std::vector<long long> index(mc.num_states(), -1);
    std::vector<StateId> maybe;
    for (StateId s = 0; s < mc.num_states(); ++s) {
        if (!mc.is_target(s) && !is_bad[s]) {
            index[s] = static_cast<long long>(maybe.size());
            maybe.push_back(s);
        }
    }
    std::size_t n = maybe.size();
    // (I - P|maybe) x = P * [T]
    std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n + 1, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) {
        m[i][i] = Rational(1);
        for (const auto& b : mc.row(maybe[i]).branches()) {
            Rational w = b.weight.constant_value();
            if (mc.is_target(b.target)) {
                m[i][n] += w;
            } else if (index[b.target] >= 0) {
                m[i][static_cast<std::size_t>(index[b.target])] -= w;
            }
        }
    }
    // Gaussian elimination, exact
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && m[pivot][col].is_zero()) ++pivot;
        if (pivot == n) {
            throw Error(ErrorKind::Internal, "singular reachability system");
        }
        std::swap(m[col], m[pivot]);
        Rational inv = Rational(1) / m[col][col];
        for (std::size_t j = col; j <= n; ++j) m[col][j] *= inv;
        for (std::size_t row = 0; row < n; ++row) {
            if (row == col || m[row][col].is_zero()) continue;
            Rational factor = m[row][col];
            for (std::size_t j = col; j <= n; ++j) m[row][j] -= factor * m[col][j];
        }
    }
    std::vector<Rational> x(mc.num_states(), Rational(0));
    for (StateId t : mc.targets()) x[t] = Rational(1);
    for (std::size_t i = 0; i < n; ++i) x[maybe[i]] = m[i][n];
    return x;
}

void write_reach_csv(std::ostream& os, const MarkovChain& mc, unsigned h) {
    auto table = bounded_reach_table(mc, h);
    os << "state,h,probability\n";
    for (StateId s = 0; s < mc.num_states(); ++s) {
        for (unsigned i = 0; i <= h; ++i) {
            os << s << "," << i << "," << table[i][s].str() << "\n";
        }
    }
}

} // namespace pmc::engine
