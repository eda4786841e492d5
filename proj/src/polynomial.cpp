#include "pmc/polynomial.hpp"

#include "pmc/errors.hpp"

#include <algorithm>
#include <sstream>

namespace pmc {

const Rational& Valuation::at(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) {
        throw Error(ErrorKind::UnknownVariable, "valuation does not assign parameter '" + name + "'");
    }
    return it->second;
}

Polynomial::Polynomial(Rational constant) {
    if (!constant.is_zero()) {
        terms_.emplace(Monomial{}, std::move(constant));
    }
}

Polynomial Polynomial::variable(const std::string& name) {
    Polynomial p;
    p.terms_.emplace(Monomial{{name, 1}}, Rational(1));
    return p;
}

bool Polynomial::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

Rational Polynomial::constant_value() const {
    if (terms_.empty()) return Rational(0);
    if (!is_constant()) {
        throw Error(ErrorKind::TypeError, "polynomial " + str() + " is not constant");
    }
    return terms_.begin()->second;
}

void Polynomial::add_term(const Monomial& m, const Rational& coeff) {
    if (coeff.is_zero()) return;
    auto [it, inserted] = terms_.emplace(m, coeff);
    if (!inserted) {
        it->second += coeff;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

Polynomial Polynomial::operator-() const {
    Polynomial r;
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
    return r;
}

Polynomial Polynomial::operator+(const Polynomial& rhs) const {
    Polynomial r = *this;
    for (const auto& [m, c] : rhs.terms_) r.add_term(m, c);
    return r;
}

Polynomial Polynomial::operator-(const Polynomial& rhs) const {
    Polynomial r = *this;
    for (const auto& [m, c] : rhs.terms_) r.add_term(m, -c);
    return r;
}

Polynomial Polynomial::operator*(const Polynomial& rhs) const {
    Polynomial r;
    for (const auto& [ma, ca] : terms_) {
        for (const auto& [mb, cb] : rhs.terms_) {
            Monomial m = ma;
            for (const auto& [name, exp] : mb) m[name] += exp;
            r.add_term(m, ca * cb);
        }
    }
    return r;
}

Polynomial Polynomial::scaled(const Rational& factor) const {
    Polynomial r;
    if (factor.is_zero()) return r;
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, c * factor);
    return r;
}

namespace {

// Graded-lex representation used for exact division.
struct DivTerm {
    std::vector<int> exps;
    Rational coeff;
};

bool grlex_less(const std::vector<int>& a, const std::vector<int>& b) {
    int da = 0, db = 0;
    for (int e : a) da += e;
    for (int e : b) db += e;
    if (da != db) return da < db;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

} // namespace

std::optional<Polynomial> Polynomial::divide_exact(const Polynomial& rhs) const {
    if (rhs.is_zero()) return std::nullopt;
    if (rhs.is_constant()) {
        return scaled(Rational(1) / rhs.constant_value());
    }
    std::vector<std::string> vars;
    for (const auto& name : parameters()) vars.push_back(name);
    for (const auto& name : rhs.parameters())
        if (std::find(vars.begin(), vars.end(), name) == vars.end()) vars.push_back(name);
    std::sort(vars.begin(), vars.end());

    auto to_terms = [&](const Polynomial& p) {
        std::vector<DivTerm> out;
        for (const auto& [m, c] : p.terms()) {
            std::vector<int> e(vars.size(), 0);
            for (const auto& [name, exp] : m) {
                auto idx = std::lower_bound(vars.begin(), vars.end(), name) - vars.begin();
                e[static_cast<std::size_t>(idx)] = exp;
            }
            out.push_back({std::move(e), c});
        }
        std::sort(out.begin(), out.end(),
                  [](const DivTerm& a, const DivTerm& b) { return grlex_less(b.exps, a.exps); });
        return out;
    };

    std::vector<DivTerm> divisor = to_terms(rhs);
    const DivTerm& lead = divisor.front();

    std::map<Monomial, Rational> rem;
    for (const auto& [m, c] : terms_) rem.emplace(m, c);
    auto rem_poly = [&]() {
        Polynomial p;
        for (const auto& [m, c] : rem)
            if (!c.is_zero()) p.terms_.emplace(m, c);
        return p;
    };

    // Leading-term reduction; the leading term strictly decreases, and a
    // non-divisible leading term can never cancel later, so that case means
    // the division is inexact.
    Polynomial quotient;
    while (true) {
        Polynomial current = rem_poly();
        if (current.is_zero()) return quotient;
        std::vector<DivTerm> cur = to_terms(current);
        const DivTerm& top = cur.front();
        std::vector<int> diff(vars.size());
        for (std::size_t i = 0; i < vars.size(); ++i) {
            diff[i] = top.exps[i] - lead.exps[i];
            if (diff[i] < 0) return std::nullopt;
        }
        Monomial factor_m;
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (diff[i] > 0) factor_m[vars[i]] = diff[i];
        Polynomial factor;
        factor.terms_.emplace(factor_m, top.coeff / lead.coeff);
        quotient += factor;
        Polynomial reduced = current - factor * rhs;
        rem.clear();
        for (const auto& [m, c] : reduced.terms_) rem.emplace(m, c);
    }
}

Rational Polynomial::evaluate(const Valuation& u) const {
    Rational result(0);
    for (const auto& [m, c] : terms_) {
        Rational term = c;
        for (const auto& [name, exp] : m) {
            term *= u.at(name).pow(static_cast<unsigned>(exp));
        }
        result += term;
    }
    return result;
}

std::set<std::string> Polynomial::parameters() const {
    std::set<std::string> out;
    for (const auto& [m, c] : terms_) {
        for (const auto& [name, exp] : m) out.insert(name);
    }
    return out;
}

std::string Polynomial::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first_term = true;
    for (const auto& [m, c] : terms_) {
        if (!first_term) os << " + ";
        first_term = false;
        bool printed = false;
        if (m.empty() || !c.is_one()) {
            os << c.str();
            printed = true;
        }
        for (const auto& [name, exp] : m) {
            if (printed) os << "*";
            printed = true;
            os << name;
            if (exp > 1) os << "^" << exp;
        }
    }
    return os.str();
}

std::size_t Polynomial::hash() const {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (const auto& [m, c] : terms_) {
        for (const auto& [name, exp] : m) {
            h ^= std::hash<std::string>{}(name) + 0x9e3779b9 + (h << 6) + (h >> 2);
            h ^= static_cast<std::size_t>(exp) + 0x9e3779b9 + (h << 6) + (h >> 2);
        }
        h ^= c.hash() + 0x9e3779b9 + (h << 6) + (h >> 2);
    }
    return h;
}

} // namespace pmc
