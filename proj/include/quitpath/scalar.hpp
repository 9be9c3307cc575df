#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace quitpath {

/// Exact rational scalar used whenever the input data is rational.
using Rational = boost::multiprecision::cpp_rational;

template <class S>
using Vec = std::vector<S>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return static_cast<double>(x); }

inline double abs_value(double x) { return std::fabs(x); }
inline Rational abs_value(const Rational& x) { return x < 0 ? Rational(-x) : x; }

/// Parses "3", "-1/2" or "0.25" into an exact rational.
inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        boost::multiprecision::cpp_int num(s.substr(0, slash));
        boost::multiprecision::cpp_int den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("rational with zero denominator: " + s);
        return Rational(num, den);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::string head = s.substr(0, dot);
        std::string frac = s.substr(dot + 1);
        bool neg = !head.empty() && head[0] == '-';
        if (neg) head = head.substr(1);
        boost::multiprecision::cpp_int num(head.empty() ? "0" : head);
        boost::multiprecision::cpp_int den = 1;
        for (char c : frac) {
            if (c < '0' || c > '9') throw std::invalid_argument("bad decimal: " + s);
            num = num * 10 + (c - '0');
            den *= 10;
        }
        Rational r(num, den);
        return neg ? Rational(-r) : r;
    }
    return Rational(boost::multiprecision::cpp_int(s));
}

inline std::string rational_to_string(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<double> {
    static constexpr bool exact = false;
    static double from_int(long long v) { return static_cast<double>(v); }
    static double from_ratio(long long num, long long den) {
        return static_cast<double>(num) / static_cast<double>(den);
    }
    static double from_double(double v) { return v; }
};

template <>
struct scalar_traits<Rational> {
    static constexpr bool exact = true;
    static Rational from_int(long long v) { return Rational(v); }
    static Rational from_ratio(long long num, long long den) { return Rational(num, den); }
    // Doubles are binary rationals, so this conversion is exact.
    static Rational from_double(double v) { return Rational(v); }
};

template <class S>
Vec<double> to_double_vec(const Vec<S>& v) {
    Vec<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
    return out;
}

template <class S>
S max_abs(const Vec<S>& v) {
    S m = S(0);
    for (const S& x : v)
        if (abs_value(x) > m) m = abs_value(x);
    return m;
}

}  // namespace quitpath
