#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sbpwave {

/// Exact rational number backed by 128-bit integers.
///
/// Always stored in lowest terms with a positive denominator. Every
/// arithmetic operation is exact; an operation whose result does not fit in
/// 128 bits throws std::overflow_error instead of wrapping.
class Rational {
public:
    using Int = __int128;

    constexpr Rational() = default;
    constexpr Rational(long long value) : num_(value), den_(1) {}  // NOLINT(implicit)
    Rational(Int num, Int den) : num_(num), den_(den) { normalize(); }

    Int num() const { return num_; }
    Int den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    /// "p/q", or "p" when the denominator is 1.
    std::string str() const {
        std::string s = int_to_string(num_);
        if (den_ != 1) s += "/" + int_to_string(den_);
        return s;
    }

    /// Accepts "p", "-p", "p/q".
    static Rational parse(std::string_view text) {
        auto slash = text.find('/');
        if (slash == std::string_view::npos) return Rational(parse_int(text), 1);
        return Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        Int g = gcd(a.den_, b.den_);
        Int lhs = mul(a.num_, b.den_ / g);
        Int rhs = mul(b.num_, a.den_ / g);
        return Rational(add(lhs, rhs), mul(a.den_ / g, b.den_));
    }
    friend Rational operator-(const Rational& a) {
        Rational r;
        r.num_ = -a.num_;
        r.den_ = a.den_;
        return r;
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        Int g1 = gcd(a.num_, b.den_);
        Int g2 = gcd(b.num_, a.den_);
        return Rational(mul(a.num_ / g1, b.num_ / g2), mul(a.den_ / g2, b.den_ / g1));
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
        return a * Rational(b.den_, b.num_);
    }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        Int lhs = mul(a.num_, b.den_);
        Int rhs = mul(b.num_, a.den_);
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

    static std::string int_to_string(Int v) {
        if (v == 0) return "0";
        bool neg = v < 0;
        std::string digits;
        while (v != 0) {
            int d = static_cast<int>(v % 10);
            digits.insert(digits.begin(), static_cast<char>('0' + (d < 0 ? -d : d)));
            v /= 10;
        }
        return neg ? "-" + digits : digits;
    }

private:
    Int num_ = 0;
    Int den_ = 1;

    static Int abs(Int v) { return v < 0 ? -v : v; }

    static Int gcd(Int a, Int b) {
        a = abs(a);
        b = abs(b);
        while (b != 0) {
            Int t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }

    static Int mul(Int a, Int b) {
        Int out;
        if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("Rational: overflow");
        return out;
    }
    static Int add(Int a, Int b) {
        Int out;
        if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("Rational: overflow");
        return out;
    }

    static Int parse_int(std::string_view s) {
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        bool neg = false;
        if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
            neg = s.front() == '-';
            s.remove_prefix(1);
        }
        if (s.empty()) throw std::invalid_argument("Rational: empty integer");
        Int v = 0;
        for (char c : s) {
            if (c < '0' || c > '9') throw std::invalid_argument("Rational: bad digit");
            v = add(mul(v, 10), c - '0');
        }
        return neg ? -v : v;
    }

    void normalize() {
        if (den_ == 0) throw std::domain_error("Rational: zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        Int g = gcd(num_, den_);
        num_ /= g;
        den_ /= g;
    }
};

inline Rational abs(const Rational& r) { return r.num() < 0 ? -r : r; }

}  // namespace sbpwave
