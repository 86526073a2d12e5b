#include <gtest/gtest.h>

#include <sstream>

#include "sbpwave/rational.hpp"

using sbpwave::Rational;

TEST(Rational, NormalizesSignAndTerms) {
    Rational r(6, -8);
    EXPECT_EQ(r.num(), -3);
    EXPECT_EQ(r.den(), 4);
    EXPECT_EQ(Rational(0, -5), Rational(0));
    EXPECT_EQ(Rational(0, -5).den(), 1);
}

TEST(Rational, ArithmeticIsExact) {
    EXPECT_EQ(Rational(1, 3) + Rational(1, 6), Rational(1, 2));
    EXPECT_EQ(Rational(1, 24) - Rational(9, 8), Rational(-13, 12));
    EXPECT_EQ(Rational(-9, 8) * Rational(8, 9), Rational(-1));
    EXPECT_EQ(Rational(7, 18) / Rational(7, 9), Rational(1, 2));
    Rational sum(0);
    for (int i = 0; i < 10; ++i) sum += Rational(1, 10);
    EXPECT_EQ(sum, Rational(1));
}

TEST(Rational, Ordering) {
    EXPECT_LT(Rational(-49, 9), Rational(-169, 72));
    EXPECT_GT(Rational(6, 7), Rational(857, 1000));
    EXPECT_EQ(abs(Rational(-3, 4)), Rational(3, 4));
}

TEST(Rational, ParseAndPrint) {
    EXPECT_EQ(Rational::parse("-15/8"), Rational(-15, 8));
    EXPECT_EQ(Rational::parse("42"), Rational(42));
    EXPECT_EQ(Rational(79, 28).str(), "79/28");
    EXPECT_EQ(Rational(-3).str(), "-3");
    std::ostringstream os;
    os << Rational(5, -4);
    EXPECT_EQ(os.str(), "-5/4");
    EXPECT_THROW(Rational::parse("1/x"), std::invalid_argument);
}

TEST(Rational, Errors) {
    EXPECT_THROW(Rational(1, 0), std::domain_error);
    EXPECT_THROW(Rational(1) / Rational(0), std::domain_error);
    Rational big(static_cast<Rational::Int>(1) << 100, 1);
    EXPECT_THROW(big * big, std::overflow_error);
}

TEST(Rational, ToDouble) {
    EXPECT_DOUBLE_EQ(Rational(6, 7).to_double(), 6.0 / 7.0);
    EXPECT_DOUBLE_EQ(Rational(-71, 72).to_double(), -71.0 / 72.0);
}
