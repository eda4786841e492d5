#pragma once

#include "pmc/rational.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pmc {

// Parameter name -> exponent; exponents are always >= 1.
using Monomial = std::map<std::string, int>;

// Assignment of rational values to parameter names.
struct Valuation {
    std::map<std::string, Rational> values;

    bool has(const std::string& name) const { return values.count(name) > 0; }
    const Rational& at(const std::string& name) const;
    void set(const std::string& name, Rational value) { values[name] = std::move(value); }
};

// Sparse multivariate polynomial with exact rational coefficients.
// Canonical: no zero-coefficient terms, so structural equality is
// semantic equality.
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(Rational constant); // NOLINT(google-explicit-constructor)
    Polynomial(long long constant) : Polynomial(Rational(constant)) {}

    static Polynomial variable(const std::string& name);

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    // Requires is_constant().
    Rational constant_value() const;

    Polynomial operator-() const;
    Polynomial operator+(const Polynomial& rhs) const;
    Polynomial operator-(const Polynomial& rhs) const;
    Polynomial operator*(const Polynomial& rhs) const;
    Polynomial& operator+=(const Polynomial& rhs) { return *this = *this + rhs; }
    Polynomial& operator-=(const Polynomial& rhs) { return *this = *this - rhs; }
    Polynomial& operator*=(const Polynomial& rhs) { return *this = *this * rhs; }

    Polynomial scaled(const Rational& factor) const;
    // Exact multivariate division: returns quotient iff rhs divides *this
    // with zero remainder (graded-lex reduction).
    std::optional<Polynomial> divide_exact(const Polynomial& rhs) const;

    bool operator==(const Polynomial& rhs) const { return terms_ == rhs.terms_; }
    bool operator!=(const Polynomial& rhs) const { return !(*this == rhs); }
    bool operator<(const Polynomial& rhs) const { return terms_ < rhs.terms_; }

    Rational evaluate(const Valuation& u) const; // throws UnknownVariable on missing parameter

    std::set<std::string> parameters() const;

    const std::map<Monomial, Rational>& terms() const { return terms_; }

    std::string str() const;

    std::size_t hash() const;

private:
    void add_term(const Monomial& m, const Rational& coeff);

    std::map<Monomial, Rational> terms_;
};

inline Polynomial operator+(const Rational& lhs, const Polynomial& rhs) { return Polynomial(lhs) + rhs; }
inline Polynomial operator-(const Rational& lhs, const Polynomial& rhs) { return Polynomial(lhs) - rhs; }
inline Polynomial operator*(const Rational& lhs, const Polynomial& rhs) { return Polynomial(lhs) * rhs; }

} // namespace pmc

template <>
struct std::hash<pmc::Polynomial> {
    std::size_t operator()(const pmc::Polynomial& p) const { return p.hash(); }
};
