#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace pmc {

using BigInt = boost::multiprecision::cpp_int;

// Exact rational number, always reduced, denominator > 0.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(long long value) : num_(value), den_(1) {} // NOLINT(google-explicit-constructor)
    Rational(BigInt numerator, BigInt denominator);

    static Rational from_int(long long n, long long d) { return Rational(BigInt(n), BigInt(d)); }

    // Parses "3", "-7/2" or "0.125" (decimals are exact powers of ten).
    static std::optional<Rational> parse(std::string_view text);

    const BigInt& numerator() const { return num_; }
    const BigInt& denominator() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_one() const { return num_ == 1 && den_ == 1; }
    bool is_integer() const { return den_ == 1; }
    bool in_unit_interval() const { return num_ >= 0 && num_ <= den_; }

    Rational operator-() const;
    Rational operator+(const Rational& rhs) const;
    Rational operator-(const Rational& rhs) const;
    Rational operator*(const Rational& rhs) const;
    Rational operator/(const Rational& rhs) const; // throws DivisionByZero
    Rational& operator+=(const Rational& rhs) { return *this = *this + rhs; }
    Rational& operator-=(const Rational& rhs) { return *this = *this - rhs; }
    Rational& operator*=(const Rational& rhs) { return *this = *this * rhs; }
    Rational& operator/=(const Rational& rhs) { return *this = *this / rhs; }

    bool operator==(const Rational& rhs) const { return num_ == rhs.num_ && den_ == rhs.den_; }
    bool operator!=(const Rational& rhs) const { return !(*this == rhs); }
    bool operator<(const Rational& rhs) const { return num_ * rhs.den_ < rhs.num_ * den_; }
    bool operator<=(const Rational& rhs) const { return num_ * rhs.den_ <= rhs.num_ * den_; }
    bool operator>(const Rational& rhs) const { return rhs < *this; }
    bool operator>=(const Rational& rhs) const { return rhs <= *this; }

    Rational pow(unsigned exponent) const;

    double to_double() const;

    // "num/den", or just "num" for integers.
    std::string str() const;
    // Fixed-point decimal rendering with the given number of fractional digits.
    std::string decimal_str(int digits = 12) const;

    std::size_t hash() const;

private:
    void normalize();

    BigInt num_;
    BigInt den_;
};

inline Rational operator*(long long lhs, const Rational& rhs) { return Rational(lhs) * rhs; }

} // namespace pmc

template <>
struct std::hash<pmc::Rational> {
    std::size_t operator()(const pmc::Rational& q) const { return q.hash(); }
};
