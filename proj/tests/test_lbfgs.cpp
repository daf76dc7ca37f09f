#include <gtest/gtest.h>

#include "wgs/errors.hpp"
#include "wgs/lbfgs.hpp"

using namespace wgs;

TEST(Lbfgs, QuadraticConverges) {
    RMatrix a(3, 3);
    a << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
    const RVector b = RVector::LinSpaced(3, -1.0, 1.0);
    auto f = [&](const RVector& x) { return 0.5 * x.dot(a * x) - b.dot(x); };
    auto g = [&](const RVector& x) -> RVector { return a * x - b; };
    const auto r = lbfgs_minimize(f, g, RVector::Zero(3));
    EXPECT_EQ(r.status, LbfgsStatus::converged);
    EXPECT_LT((r.x - a.ldlt().solve(b)).norm(), 1e-6);
}

TEST(Lbfgs, Rosenbrock) {
    auto f = [](const RVector& x) { return std::pow(1 - x[0], 2) + 100 * std::pow(x[1] - x[0] * x[0], 2); };
    auto g = [](const RVector& x) -> RVector {
        RVector out(2);
        out[0] = -2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] * x[0]);
        out[1] = 200 * (x[1] - x[0] * x[0]);
        return out;
    };
    LbfgsOptions opt;
    opt.max_iterations = 500;
    const auto r = lbfgs_minimize(f, g, RVector{{-1.2, 1.0}}, opt);
    EXPECT_NEAR(r.x[0], 1.0, 1e-5);
    EXPECT_NEAR(r.x[1], 1.0, 1e-5);
}

TEST(Lbfgs, AcceptedValuesNeverIncrease) {
    auto f = [](const RVector& x) { return std::cos(3 * x[0]) + x.squaredNorm(); };
    auto g = [](const RVector& x) -> RVector {
        RVector out = 2 * x;
        out[0] -= 3 * std::sin(3 * x[0]);
        return out;
    };
    double last = f(RVector{{1.3, -0.7}});
    bool monotone = true;
    lbfgs_minimize(f, g, RVector{{1.3, -0.7}}, {}, [&](int, double value, double) {
        monotone = monotone && value < last;
        last = value;
    });
    EXPECT_TRUE(monotone);
}

TEST(Lbfgs, NonFiniteRegionsAreAvoided) {
    // log barrier: any step past x = 0 is rejected as +infinity.
    auto f = [](const RVector& x) {
        if (x[0] <= 0.0) throw NumericRangeError("outside domain");
        return x[0] - std::log(x[0]);
    };
    auto g = [](const RVector& x) -> RVector { return RVector::Constant(1, 1.0 - 1.0 / x[0]); };
    const auto r = lbfgs_minimize(f, g, RVector::Constant(1, 5.0));
    EXPECT_NEAR(r.x[0], 1.0, 1e-6);
}

TEST(Lbfgs, ReportsLineSearchFailure) {
    // The gradient points the wrong way, so no descent step exists.
    auto f = [](const RVector& x) { return x.squaredNorm(); };
    auto g = [](const RVector& x) -> RVector { return -2 * x; };
    const auto r = lbfgs_minimize(f, g, RVector::Constant(2, 1.0));
    EXPECT_EQ(r.status, LbfgsStatus::line_search_failed);
    EXPECT_DOUBLE_EQ(r.value, 2.0);
    EXPECT_STREQ(to_string(r.status), "line_search_failed");
}
