#include "overcrit/errors.hpp"
#include "overcrit/switching.hpp"

#include <doctest.h>

#include <cmath>

using namespace overcrit;

namespace {

// plain reimplementation of the smooth step for cross-checking
double reference_step(double x)
{
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

} // namespace

TEST_CASE("plateau, tail and midpoint values")
{
    const BumpProfile p;
    CHECK(phi(p, 0.5) == 1.0);
    CHECK(phi(p, -0.5) == 1.0);
    CHECK(phi(p, 1.0) == 1.0);
    CHECK(phi(p, 3.0) == 0.0);
    CHECK(phi(p, -2.0) == 0.0);
    CHECK(phi(p, 1.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(phi(p, -1.5) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("profile matches the smooth-step formula")
{
    const BumpProfile p;
    for (double s = -2.5; s <= 2.5; s += 0.01)
        CHECK(phi(p, s) == doctest::Approx(reference_step(2.0 - std::abs(s))).epsilon(1e-13));
}

TEST_CASE("profile is even, bounded and strictly decreasing on (1,2)")
{
    for (double a : { 0.5, 1.0, 3.0 }) {
        const BumpProfile p { a };
        double last = 1.0;
        for (int j = 1; j < 1000; ++j) {
            const double s = 1.0 + j / 1000.0;
            const double v = phi(p, s);
            CHECK(v <= last);
            // strict away from the flat ends, where the profile rounds to 1 or 0
            if (last < 1.0 - 1e-12 && v > 0.0)
                CHECK(v < last);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            CHECK(v == phi(p, -s));
            last = v;
        }
    }
}

TEST_CASE("analytic derivative agrees with finite differences")
{
    const BumpProfile p;
    const double h = 1e-6;
    for (double s = -2.2; s <= 2.2; s += 0.037) {
        const double fd = (phi(p, s + h) - phi(p, s - h)) / (2 * h);
        CHECK(phi_derivative(p, s) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
    CHECK(p.max_slope() == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("derivatives of orders 1-3 vanish numerically at the joins")
{
    const BumpProfile p;
    const double h = 1e-3;
    for (double s0 : { 1.0, 2.0 })
        for (double s : { s0 - 1e-3, s0 + 1e-3 }) {
            const double f0 = phi(p, s);
            const double fp = phi(p, s + h), fm = phi(p, s - h);
            const double fpp = phi(p, s + 2 * h), fmm = phi(p, s - 2 * h);
            const double d1 = (fp - fm) / (2 * h);
            const double d2 = (fp - 2 * f0 + fm) / (h * h);
            const double d3 = (fpp - 2 * fp + 2 * fm - fmm) / (2 * h * h * h);
            // only the one-sided point inside the transition can be non-zero, and it is tiny
            CHECK(std::abs(d1) <= 1e-4);
            CHECK(std::abs(d2) <= 1e-4);
            CHECK(std::abs(d3) <= 1e-4);
        }
}

TEST_CASE("finite-difference derivatives stay bounded on [0,3]")
{
    const BumpProfile p;
    const double h = 1e-3;
    double worst = 0.0;
    for (double s = 0.0; s <= 3.0; s += 0.001) {
        const double d3 = (phi(p, s + 2 * h) - 2 * phi(p, s + h) + 2 * phi(p, s - h) - phi(p, s - 2 * h)) / (2 * h * h * h);
        worst = std::max(worst, std::abs(d3));
    }
    CHECK(worst < 200.0);
}

TEST_CASE("two-sided dilation")
{
    const SwitchingSchedule sch { 0.25, 0.5, {} };
    CHECK(phi_eps(sch, -1.0 / (2 * sch.eps1)) == 1.0);
    CHECK(phi_eps(sch, 2.0 / sch.eps2) == 0.0);
    CHECK(phi_eps(sch, 0.0) == 1.0);
    CHECK(phi_eps(sch, -1e-12) == 1.0);
    CHECK(sch.support_begin() == -8.0);
    CHECK(sch.support_end() == 4.0);
    for (double t = -12.0; t <= 12.0; t += 0.05) {
        const double v = phi_eps(sch, t);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        if (t <= sch.support_begin() || t >= sch.support_end())
            CHECK(v == 0.0);
    }
    CHECK(phi_eps(sch, sch.support_begin() + 0.1) > 0.0);
    CHECK(phi_eps(sch, sch.support_end() - 0.1) > 0.0);
}

TEST_CASE("switch-on profile in scaled time is rate independent")
{
    const BumpProfile p;
    for (double s = 0.0; s <= 2.5; s += 0.01) {
        const double ref = phi(p, -s);
        for (double e : { 1.0 / 4, 1.0 / 8, 1.0 / 16 })
            CHECK(phi_eps({ e, 0.3, p }, -s / e) == ref);
    }
}

TEST_CASE("generator rate is the chain-rule derivative")
{
    const SwitchingSchedule sch { 0.25, 0.125, {} };
    const double h = 1e-5;
    for (double t : { -7.0, -5.3, -4.1, 9.0, 11.7, 15.2 }) {
        const double fd = (phi_eps(sch, t + h) - phi_eps(sch, t - h)) / (2 * h);
        CHECK(phi_eps_rate(sch, t) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("s0 solver")
{
    const BumpProfile p;
    CHECK(find_s0(p, 2.0, 1.0) == doctest::Approx(1.5).epsilon(1e-10));
    const double s = find_s0(p, 1.2, 1.0);
    CHECK(phi(p, -s) == doctest::Approx(1.0 / 1.2).epsilon(1e-10));
    CHECK(s > 1.0);
    CHECK(s < 2.0);
    CHECK(find_s0(p, 1.0 + 1e-9, 1.0) < 1.2);
    CHECK(find_s0(p, 1.0 + 1e-9, 1.0) > 1.0);
    try {
        find_s0(p, 1.0, 1.0);
        FAIL("expected OverUnderCritical");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::over_under_critical);
    }
}

TEST_CASE("schedule validation")
{
    CHECK_THROWS_AS((SwitchingSchedule { 0.0, 0.1, {} }.validate()), Error);
    CHECK_THROWS_AS((SwitchingSchedule { 0.1, -1.0, {} }.validate()), Error);
    CHECK_THROWS_AS((BumpProfile { 0.0 }.validate()), Error);
}
