#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bigprob {

/// Reduced fraction over 64-bit integers. Arithmetic is checked: any
/// operation whose exact result does not fit returns std::nullopt.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(google-explicit-constructor)

    /// Throws std::invalid_argument on a zero denominator.
    static Rational make(std::int64_t num, std::int64_t den);

    /// Parses a decimal literal such as "5", "0.25", "1e-3" exactly.
    static std::optional<Rational> from_decimal(std::string_view text);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    double to_double() const noexcept;
    std::string str() const;

    friend std::optional<Rational> add(const Rational& a, const Rational& b);
    friend std::optional<Rational> sub(const Rational& a, const Rational& b);
    friend std::optional<Rational> mul(const Rational& a, const Rational& b);
    friend std::optional<Rational> div(const Rational& a, const Rational& b);

    friend bool operator==(const Rational&, const Rational&) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// A real number carried in floating point, plus its exact rational value
/// while one is known. Weights, rates and probabilities are Scalars so that
/// small models are reproduced exactly and large ones degrade gracefully.
class Scalar {
public:
    Scalar() = default;
    Scalar(double v) : value_(v), exact_(std::nullopt) {}  // NOLINT(google-explicit-constructor)
    Scalar(const Rational& r) : value_(r.to_double()), exact_(r) {}  // NOLINT(google-explicit-constructor)
    Scalar(std::int64_t v) : Scalar(Rational(v)) {}  // NOLINT(google-explicit-constructor)
    Scalar(int v) : Scalar(Rational(v)) {}  // NOLINT(google-explicit-constructor)

    /// Decimal literal; exact when representable.
    static Scalar parse(std::string_view text);

    double value() const noexcept { return value_; }
    const std::optional<Rational>& exact() const noexcept { return exact_; }
    bool is_exact() const noexcept { return exact_.has_value(); }
    bool is_zero() const noexcept { return exact_ ? exact_->num() == 0 : value_ == 0.0; }

    friend Scalar operator+(const Scalar& a, const Scalar& b);
    friend Scalar operator-(const Scalar& a, const Scalar& b);
    friend Scalar operator*(const Scalar& a, const Scalar& b);
    friend Scalar operator/(const Scalar& a, const Scalar& b);
    Scalar operator-() const;
    Scalar& operator+=(const Scalar& o) { return *this = *this + o; }

    /// Same value; exactness is not compared when either side is inexact.
    friend bool operator==(const Scalar& a, const Scalar& b);

private:
    double value_ = 0.0;
    std::optional<Rational> exact_ = Rational(0);
};

/// Shortest decimal text that round-trips to the same double.
std::string format_shortest(double v);

/// Fixed 17-significant-digit rendering used by the PRISM exporter.
std::string format_17g(double v);

}  // namespace bigprob
