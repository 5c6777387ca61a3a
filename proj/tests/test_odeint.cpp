#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "devmap/odeint.hpp"

#include <algorithm>
#include <cmath>

using namespace devmap;

namespace {

OdeSystem decay()
{
    return {1, [](double, const Eigen::VectorXd& y) { return Eigen::VectorXd(-y); }};
}

OdeSystem oscillator()
{
    return {2, [](double, const Eigen::VectorXd& y) {
                Eigen::VectorXd f(2);
                f << y[1], -y[0];
                return f;
            }};
}

// y' = cos(t) y, y(0) = 1, exact solution exp(sin(t)).
OdeSystem modulated()
{
    return {1, [](double t, const Eigen::VectorXd& y) {
                return Eigen::VectorXd(std::cos(t) * y);
            }};
}

Eigen::VectorXd one(double v)
{
    Eigen::VectorXd y(1);
    y << v;
    return y;
}

} // namespace

TEST_CASE("fixed-step integration of exponential decay")
{
    IntegrateOptions opt;
    opt.step = 1e-3;
    auto traj = rk4_integrate(decay(), 0.0, 2.0, one(1.0), opt);
    CHECK(traj.t0() == 0.0);
    CHECK(traj.t1() == 2.0);
    CHECK(std::abs(traj.eval(2.0)[0] - std::exp(-2.0)) < 1e-11);
}

TEST_CASE("adaptive integration of exponential decay")
{
    AdaptiveOptions opt;
    opt.abs_tol = 1e-12;
    opt.rel_tol = 1e-12;
    auto traj = dp45_integrate(decay(), 0.0, 2.0, one(1.0), opt);
    CHECK(std::abs(traj.eval(2.0)[0] - std::exp(-2.0)) < 1e-10);
    // Adaptivity pays off: far fewer knots than the fixed grid would need.
    CHECK(traj.knot_count() < 400);
}

TEST_CASE("oscillator returns to its start after a full period")
{
    Eigen::VectorXd y0(2);
    y0 << 1.0, 0.0;
    IntegrateOptions opt;
    opt.step = 1e-3;
    const double period = 2.0 * std::acos(-1.0);
    auto traj = rk4_integrate(oscillator(), 0.0, period, y0, opt);
    CHECK((traj.eval(period) - y0).norm() < 1e-9);
    // Quarter period: (cos, -sin) = (0, -1).
    const auto quarter = traj.eval(period / 4.0);
    CHECK(std::abs(quarter[0]) < 1e-8);
    CHECK(quarter[1] == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("fixed-step integrator converges at fourth order")
{
    auto run = [&](double step) {
        IntegrateOptions opt;
        opt.step = step;
        auto traj = rk4_integrate(modulated(), 0.0, 2.0, one(1.0), opt);
        return std::abs(traj.eval(2.0)[0] - std::exp(std::sin(2.0)));
    };
    const double e1 = run(0.02);
    const double e2 = run(0.01);
    const double order = std::log2(e1 / e2);
    CHECK(order > 3.8);
    CHECK(order < 4.3);
}

TEST_CASE("dense output is exact at knots and accurate between them")
{
    IntegrateOptions opt;
    opt.step = 0.01;
    auto traj = rk4_integrate(decay(), 0.0, 1.0, one(1.0), opt);
    for (int i = 0; i < traj.knot_count(); ++i)
        CHECK((traj.eval(traj.times()[static_cast<std::size_t>(i)]) - traj.state(i)).norm()
              == 0.0);
    for (double t : {0.005, 0.1234, 0.55501, 0.995}) {
        CHECK(std::abs(traj.eval(t)[0] - std::exp(-t)) < 1e-9);
        CHECK(std::abs(traj.derivative(t)[0] + std::exp(-t)) < 1e-7);
    }
}

TEST_CASE("breakpoints appear as exact knot times")
{
    IntegrateOptions opt;
    opt.step = 0.25;
    opt.breakpoints = {0.7, 0.3};
    auto traj = rk4_integrate(decay(), 0.0, 1.0, one(1.0), opt);
    const auto& times = traj.times();
    CHECK(std::find(times.begin(), times.end(), 0.3) != times.end());
    CHECK(std::find(times.begin(), times.end(), 0.7) != times.end());

    AdaptiveOptions aopt;
    aopt.breakpoints = {0.3, 0.7};
    auto atraj = dp45_integrate(decay(), 0.0, 1.0, one(1.0), aopt);
    const auto& atimes = atraj.times();
    CHECK(std::find(atimes.begin(), atimes.end(), 0.3) != atimes.end());
    CHECK(std::find(atimes.begin(), atimes.end(), 0.7) != atimes.end());
}

TEST_CASE("integration is deterministic")
{
    Eigen::VectorXd y0(2);
    y0 << 0.3, -1.1;
    AdaptiveOptions opt;
    auto a = dp45_integrate(oscillator(), 0.0, 3.0, y0, opt);
    auto b = dp45_integrate(oscillator(), 0.0, 3.0, y0, opt);
    REQUIRE(a.knot_count() == b.knot_count());
    for (int i = 0; i < a.knot_count(); ++i) {
        CHECK(a.times()[static_cast<std::size_t>(i)] == b.times()[static_cast<std::size_t>(i)]);
        CHECK((a.state(i) - b.state(i)).norm() == 0.0);
    }
}

TEST_CASE("finite-time blow-up is reported, not silently propagated")
{
    OdeSystem riccati{1, [](double, const Eigen::VectorXd& y) {
                          return Eigen::VectorXd(y.cwiseProduct(y));
                      }};
    IntegrateOptions fixed;
    fixed.step = 1e-3;
    CHECK_THROWS_AS(rk4_integrate(riccati, 0.0, 2.0, one(1.0), fixed), NumericError);
    CHECK_THROWS_AS(dp45_integrate(riccati, 0.0, 2.0, one(1.0), {}), NumericError);
}

TEST_CASE("post-step projection is applied and differentiated")
{
    Eigen::VectorXd y0(2);
    y0 << 1.0, 0.0;
    IntegrateOptions opt;
    opt.step = 0.01;
    opt.post_step = [](double, Eigen::VectorXd& y) { y /= y.norm(); };
    auto traj = rk4_integrate(oscillator(), 0.0, 5.0, y0, opt);
    for (int i = 0; i < traj.knot_count(); ++i)
        CHECK(std::abs(traj.state(i).norm() - 1.0) < 1e-14);
    CHECK(traj.eval(5.0)[0] == doctest::Approx(std::cos(5.0)).epsilon(1e-6));
}

TEST_CASE("invalid integration setups are rejected")
{
    CHECK_THROWS_AS(rk4_integrate(decay(), 1.0, 0.0, one(1.0), {}), ValidationError);
    CHECK_THROWS_AS(rk4_integrate(decay(), 0.0, 1.0, Eigen::VectorXd::Zero(2), {}),
                    ValidationError);
    IntegrateOptions bad;
    bad.step = 0.0;
    CHECK_THROWS_AS(rk4_integrate(decay(), 0.0, 1.0, one(1.0), bad), ValidationError);

    OdeSystem mis{2, [](double, const Eigen::VectorXd&) { return one(0.0); }};
    CHECK_THROWS_AS(rk4_integrate(mis, 0.0, 1.0, Eigen::VectorXd::Zero(2), {}), NumericError);
}

TEST_CASE("evaluation outside the integrated range fails")
{
    auto traj = rk4_integrate(decay(), 0.0, 1.0, one(1.0), {});
    CHECK_THROWS_AS(traj.eval(1.5), EvalError);
    CHECK_THROWS_AS(traj.eval(-0.5), EvalError);
}

TEST_CASE("maximum step size is honored")
{
    AdaptiveOptions opt;
    opt.abs_tol = 1e-6;
    opt.rel_tol = 1e-6;
    opt.max_step = 0.01;
    auto traj = dp45_integrate(decay(), 0.0, 1.0, one(1.0), opt);
    for (int i = 0; i + 1 < traj.knot_count(); ++i)
        CHECK(traj.times()[static_cast<std::size_t>(i) + 1]
                  - traj.times()[static_cast<std::size_t>(i)]
              <= 0.01 + 1e-12);
}
