#include "bigprob/scalar.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bigprob {

namespace {

using i128 = __int128;

constexpr i128 kMax = std::numeric_limits<std::int64_t>::max();

i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

std::optional<Rational> reduce(i128 num, i128 den) {
    if (den == 0) return std::nullopt;
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 g = gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    if (num > kMax || num < -kMax || den > kMax) return std::nullopt;
    return Rational::make(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

}  // namespace

Rational Rational::make(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    Rational r;
    r.num_ = g > 1 ? num / g : num;
    r.den_ = g > 1 ? den / g : den;
    return r;
}

std::optional<Rational> Rational::from_decimal(std::string_view text) {
    // digits [ '.' digits ] [ (e|E) [sign] digits ]
    std::size_t i = 0;
    bool negative = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
        negative = text[i] == '-';
        ++i;
    }
    i128 mantissa = 0;
    int scale = 0;
    bool any_digit = false;
    bool seen_point = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.' && !seen_point) {
            seen_point = true;
            continue;
        }
        if (c < '0' || c > '9') break;
        any_digit = true;
        mantissa = mantissa * 10 + (c - '0');
        if (mantissa > kMax) return std::nullopt;
        if (seen_point) --scale;
    }
    if (!any_digit) return std::nullopt;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        int exp = 0;
        auto res = std::from_chars(text.data() + i, text.data() + text.size(), exp);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
        scale += exp;
        i = text.size();
    }
    if (i != text.size()) return std::nullopt;
    i128 num = negative ? -mantissa : mantissa;
    i128 den = 1;
    while (scale > 0) {
        num *= 10;
        if (num > kMax || num < -kMax) return std::nullopt;
        --scale;
    }
    while (scale < 0) {
        den *= 10;
        if (den > kMax) return std::nullopt;
        ++scale;
    }
    return reduce(num, den);
}

double Rational::to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string Rational::str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

std::optional<Rational> add(const Rational& a, const Rational& b) {
    return reduce(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                  static_cast<i128>(a.den_) * b.den_);
}

std::optional<Rational> sub(const Rational& a, const Rational& b) {
    return reduce(static_cast<i128>(a.num_) * b.den_ - static_cast<i128>(b.num_) * a.den_,
                  static_cast<i128>(a.den_) * b.den_);
}

std::optional<Rational> mul(const Rational& a, const Rational& b) {
    return reduce(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
}

std::optional<Rational> div(const Rational& a, const Rational& b) {
    if (b.num_ == 0) return std::nullopt;
    return reduce(static_cast<i128>(a.num_) * b.den_, static_cast<i128>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    i128 l = static_cast<i128>(a.num_) * b.den_;
    i128 r = static_cast<i128>(b.num_) * a.den_;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

Scalar Scalar::parse(std::string_view text) {
    if (auto r = Rational::from_decimal(text)) return Scalar(*r);
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc()) throw std::invalid_argument("bad number: " + std::string(text));
    return Scalar(v);
}

namespace {

template <typename ExactOp, typename FloatOp>
Scalar combine(const Scalar& a, const Scalar& b, ExactOp exact_op, FloatOp float_op) {
    if (a.is_exact() && b.is_exact()) {
        if (auto r = exact_op(*a.exact(), *b.exact())) return Scalar(*r);
    }
    return Scalar(float_op(a.value(), b.value()));
}

}  // namespace

Scalar operator+(const Scalar& a, const Scalar& b) {
    return combine(a, b, [](auto& x, auto& y) { return add(x, y); },
                   [](double x, double y) { return x + y; });
}

Scalar operator-(const Scalar& a, const Scalar& b) {
    return combine(a, b, [](auto& x, auto& y) { return sub(x, y); },
                   [](double x, double y) { return x - y; });
}

Scalar operator*(const Scalar& a, const Scalar& b) {
    return combine(a, b, [](auto& x, auto& y) { return mul(x, y); },
                   [](double x, double y) { return x * y; });
}

Scalar operator/(const Scalar& a, const Scalar& b) {
    return combine(a, b, [](auto& x, auto& y) { return div(x, y); },
                   [](double x, double y) { return x / y; });
}

Scalar Scalar::operator-() const { return Scalar(0) - *this; }

bool operator==(const Scalar& a, const Scalar& b) {
    if (a.is_exact() && b.is_exact()) return *a.exact() == *b.exact();
    return a.value() == b.value();
}

std::string format_shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_17g(double v) {
    char buf[64];
    int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace bigprob
