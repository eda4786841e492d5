#include "pmc/rational.hpp"

#include "pmc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pmc {

Rational::Rational(BigInt numerator, BigInt denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
    if (den_ == 0) {
        throw Error(ErrorKind::DivisionByZero, "rational with zero denominator");
    }
    normalize();
}

void Rational::normalize() {
    if (den_ < 0) {
        num_ = -num_;
        den_ = -den_;
    }
    if (num_ == 0) {
        den_ = 1;
        return;
    }
    BigInt g = gcd(num_, den_);
    if (g > 1) {
        num_ /= g;
        den_ /= g;
    }
}

std::optional<Rational> Rational::parse(std::string_view text) {
    if (text.empty()) return std::nullopt;
    auto is_int = [](std::string_view s) {
        if (!s.empty() && (s[0] == '-' || s[0] == '+')) s.remove_prefix(1);
        if (s.empty()) return false;
        for (char c : s)
            if (c < '0' || c > '9') return false;
        return true;
    };
    auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        auto lhs = text.substr(0, slash);
        auto rhs = text.substr(slash + 1);
        if (!is_int(lhs) || !is_int(rhs)) return std::nullopt;
        BigInt d{std::string(rhs)};
        if (d == 0) return std::nullopt;
        return Rational(BigInt{std::string(lhs)}, std::move(d));
    }
    auto dot = text.find('.');
    if (dot != std::string_view::npos) {
        auto whole = text.substr(0, dot);
        auto frac = text.substr(dot + 1);
        if (frac.empty() || !is_int(frac) || frac[0] == '-' || frac[0] == '+') return std::nullopt;
        if (!whole.empty() && !is_int(whole)) return std::nullopt;
        bool negative = !whole.empty() && whole[0] == '-';
        BigInt scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        BigInt w = whole.empty() || whole == "-" || whole == "+" ? BigInt(0) : BigInt{std::string(whole)};
        BigInt n = w * scale + (negative ? -BigInt(std::string(frac)) : BigInt(std::string(frac)));
        return Rational(std::move(n), std::move(scale));
    }
    if (!is_int(text)) return std::nullopt;
    return Rational(BigInt{std::string(text)}, BigInt(1));
}

Rational Rational::operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
}

Rational Rational::operator+(const Rational& rhs) const {
    return Rational(num_ * rhs.den_ + rhs.num_ * den_, den_ * rhs.den_);
}

Rational Rational::operator-(const Rational& rhs) const {
    return Rational(num_ * rhs.den_ - rhs.num_ * den_, den_ * rhs.den_);
}

Rational Rational::operator*(const Rational& rhs) const {
    return Rational(num_ * rhs.num_, den_ * rhs.den_);
}

Rational Rational::operator/(const Rational& rhs) const {
    if (rhs.num_ == 0) {
        throw Error(ErrorKind::DivisionByZero, "rational division by zero");
    }
    return Rational(num_ * rhs.den_, den_ * rhs.num_);
}

Rational Rational::pow(unsigned exponent) const {
    Rational result(1);
    Rational base = *this;
    while (exponent > 0) {
        if (exponent & 1u) result *= base;
        base *= base;
        exponent >>= 1u;
    }
    return result;
}

double Rational::to_double() const {
    double n = num_.convert_to<double>();
    double d = den_.convert_to<double>();
    if (std::isfinite(n) && std::isfinite(d)) return n / d;
    // operands beyond double range: drop a common power of two first
    if (num_ == 0) return 0.0;
    BigInt mag = num_ < 0 ? BigInt(-num_) : num_;
    unsigned num_bits = boost::multiprecision::msb(mag);
    unsigned den_bits = boost::multiprecision::msb(den_);
    unsigned shift = std::max(num_bits, den_bits);
    shift = shift > 900 ? shift - 900 : 0;
    double n2 = BigInt(mag >> shift).convert_to<double>();
    double d2 = BigInt(den_ >> shift).convert_to<double>();
    return (num_ < 0 ? -n2 : n2) / d2;
}

std::string Rational::str() const {
    if (den_ == 1) return num_.str();
    return num_.str() + "/" + den_.str();
}

std::string Rational::decimal_str(int digits) const {
    BigInt scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    BigInt n = num_ < 0 ? -num_ : num_;
    BigInt scaled = n * scale;
    BigInt q = scaled / den_;
    // round half up
    if ((scaled % den_) * 2 >= den_) q += 1;
    std::string body = q.str();
    if (static_cast<int>(body.size()) <= digits) {
        body.insert(0, digits + 1 - body.size(), '0');
    }
    body.insert(body.size() - digits, ".");
    if (num_ < 0) body.insert(0, "-");
    return body;
}

std::size_t Rational::hash() const {
    std::size_t h = std::hash<std::string>{}(num_.str());
    h ^= std::hash<std::string>{}(den_.str()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

} // namespace pmc
