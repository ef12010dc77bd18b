#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "bigprob/scalar.hpp"

using namespace bigprob;

TEST(Rational, ReducesAndNormalisesSign) {
    auto r = Rational::make(6, -8);
    EXPECT_EQ(r.num(), -3);
    EXPECT_EQ(r.den(), 4);
    EXPECT_EQ(r.str(), "-3/4");
    EXPECT_THROW(Rational::make(1, 0), std::invalid_argument);
}

TEST(Rational, ParsesDecimalsExactly) {
    EXPECT_EQ(*Rational::from_decimal("0.25"), Rational::make(1, 4));
    EXPECT_EQ(*Rational::from_decimal("5"), Rational(5));
    EXPECT_EQ(*Rational::from_decimal("1e-3"), Rational::make(1, 1000));
    EXPECT_EQ(*Rational::from_decimal("2.5E2"), Rational(250));
    EXPECT_FALSE(Rational::from_decimal("abc"));
}

TEST(Rational, ArithmeticReportsOverflow) {
    Rational big(std::numeric_limits<std::int64_t>::max());
    EXPECT_FALSE(add(big, Rational(1)));
    EXPECT_FALSE(mul(big, Rational(2)));
    EXPECT_EQ(*add(Rational::make(1, 3), Rational::make(1, 6)), Rational::make(1, 2));
    EXPECT_EQ(*div(Rational(2), Rational::make(2, 5)), Rational(5));
    EXPECT_FALSE(div(Rational(1), Rational(0)));
}

TEST(Scalar, StaysExactUntilInexactInput) {
    Scalar a = Scalar::parse("2.0"), b = Scalar::parse("1.0");
    Scalar p = a * Scalar(2) / (a * Scalar(2) + b);
    ASSERT_TRUE(p.is_exact());
    EXPECT_EQ(*p.exact(), Rational::make(4, 5));
    Scalar q = p * Scalar(std::sqrt(2.0));
    EXPECT_FALSE(q.is_exact());
    EXPECT_NEAR(q.value(), 0.8 * std::sqrt(2.0), 1e-15);
}

TEST(Scalar, FallsBackToFloatOnOverflow) {
    Scalar big(Rational(std::numeric_limits<std::int64_t>::max() / 2));
    Scalar sum = big + big + big;
    EXPECT_FALSE(sum.is_exact());
    EXPECT_GT(sum.value(), 1e18);
}

TEST(Format, ShortestRoundTrips) {
    for (double v : {0.1, 0.8, 1.0 / 3.0, 5.0 / 6.0, 1e-300, 123456.789, 0.0}) {
        EXPECT_EQ(std::stod(format_shortest(v)), v);
        EXPECT_EQ(std::stod(format_17g(v)), v);
    }
    EXPECT_EQ(format_shortest(0.4), "0.4");
    EXPECT_EQ(format_shortest(1.0), "1");
    EXPECT_EQ(format_17g(0.2), "0.20000000000000001");
}
