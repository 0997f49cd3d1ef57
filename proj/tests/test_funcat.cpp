#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "frobenius/funcat.hpp"
#include "support.hpp"

using namespace frobenius;

TEST(Funcat, PolynomialFirstDerivative) {
  EXPECT_DOUBLE_EQ(TimeFunction::polynomial({0, 0, 1}).eval(2.0, 1), 4.0);
}

TEST(Funcat, TrigonometricSecondDerivativeAtZero) {
  EXPECT_DOUBLE_EQ(TimeFunction::trigonometric(2, 1, 1, 0).eval(0.0, 2), -1.0);
}

TEST(Funcat, ExponentialThirdDerivative) {
  EXPECT_NEAR(TimeFunction::exponential(1, 0.5).eval(2.0, 3), 0.125 * std::exp(1.0), 1e-15);
}

TEST(Funcat, ConstantHasVanishingDerivatives) {
  const auto c = TimeFunction::constant(3.5);
  EXPECT_EQ(c.eval(1.0, 0), 3.5);
  for (int n = 1; n <= 3; ++n) EXPECT_EQ(c.eval(1.0, n), 0.0);
  EXPECT_TRUE(c.is_constant());
  EXPECT_TRUE(TimeFunction::polynomial({2}).is_constant());
  EXPECT_FALSE(TimeFunction::polynomial({2, 1}).is_constant());
}

TEST(Funcat, PolynomialBeyondDegreeIsZero) {
  EXPECT_EQ(TimeFunction::polynomial({1, 2}).eval(3.0, 2), 0.0);
}

TEST(Funcat, OrderOutOfRangeIsContractViolation) {
  EXPECT_THROW(TimeFunction::constant(1).eval(0.0, 4), ContractError);
  EXPECT_THROW(TimeFunction::constant(1).eval(0.0, -1), ContractError);
  EXPECT_THROW(SpaceProfile::polynomial({0, 1}).eval(0.0, 3), ContractError);
  EXPECT_NO_THROW(SpaceProfile::polynomial({0, 1}).eval(0.0, 2));
}

TEST(Funcat, MalformedParametersRejected) {
  EXPECT_THROW(TimeFunction::make(FunctionKind::trigonometric, {1, 2}), ContractError);
  EXPECT_THROW(TimeFunction::make(FunctionKind::polynomial, {}), ContractError);
  EXPECT_THROW(TimeFunction::make(FunctionKind::constant, {1, 2}), ContractError);
}

TEST(Funcat, KindNamesRoundTrip) {
  for (auto k : {FunctionKind::constant, FunctionKind::polynomial, FunctionKind::trigonometric,
                 FunctionKind::exponential}) {
    EXPECT_EQ(parse_function_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_function_kind("spline"), ContractError);
}

TEST(Funcat, JetsCarryExactDerivatives) {
  const auto f = TimeFunction::trigonometric(0.3, 1.7, 1.3, 0.4);
  const Jet1 x = Jet1::variable(0.9, kSlotT);
  const Jet1 y = f.eval(x, 1);
  EXPECT_NEAR(y.v, f.eval(0.9, 1), 1e-15);
  EXPECT_NEAR(y.d[kSlotT], f.eval(0.9, 2), 1e-14);
}

TEST(Funcat, NonzeroGuardSamplesWindow) {
  const auto cos_t = TimeFunction::trigonometric(0, 1, 1, 0);
  EXPECT_NO_THROW(require_nonzero(cos_t, {0.0, 1.0}, "rho"));
  EXPECT_THROW(require_nonzero(cos_t, {0.0, 2.0}, "rho"), ConstructionError);
  EXPECT_NEAR(min_abs_on_window(TimeFunction::polynomial({-1, 1}), {0.0, 2.0}, 3), 0.0, 0.0);
}

namespace {

std::vector<TimeFunction> catalog() {
  return {TimeFunction::constant(-0.7),
          TimeFunction::polynomial({0.5, -1.0, 0.25, 0.1}),
          TimeFunction::polynomial({1, 0, 0, 0, 0.01}),
          TimeFunction::trigonometric(2, 1, 1, 0),
          TimeFunction::trigonometric(-0.3, 0.8, 1.7, 0.9),
          TimeFunction::exponential(1, 0.5),
          TimeFunction::exponential(-2, -0.3)};
}

}  // namespace

// Central differences of each order agree with the next exact order.
TEST(FuncatProperty, FiniteDifferencesMatchNextOrder) {
  test::Rng rng(42);
  for (const auto& f : catalog()) {
    for (int order = 0; order < 3; ++order) {
      for (int i = 0; i < 100; ++i) {
        const double x = rng.uniform(-5, 5);
        const double fd = test::central([&](double s) { return f.eval(s, order); }, x);
        const double exact = f.eval(x, order + 1);
        EXPECT_LT(test::rel_err(fd, exact), 1e-7)
            << to_string(f.kind()) << " order " << order << " at " << x;
      }
    }
  }
}

TEST(FuncatProperty, SpaceProfileMatchesTimeFunction) {
  test::Rng rng(7);
  const auto s = SpaceProfile::trigonometric(1, 2, 0.5, 0.1);
  const auto t = TimeFunction::trigonometric(1, 2, 0.5, 0.1);
  for (int i = 0; i < 50; ++i) {
    const double x = rng.uniform(-5, 5);
    for (int n = 0; n <= 2; ++n) EXPECT_EQ(s.eval(x, n), t.eval(x, n));
  }
}
