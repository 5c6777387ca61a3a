#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "devmap/transport.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

using namespace devmap;

namespace {

MetricField make_metric(int dim, const std::vector<std::string>& upper)
{
    std::vector<ScalarField> comps;
    comps.reserve(upper.size());
    for (const auto& s : upper) comps.push_back(parse_scalar_field(s, dim));
    return MetricField(dim, std::move(comps));
}

MetricField sphere_metric() { return make_metric(2, {"1", "0", "sin(x1)^2"}); }

MetricField sphere3_metric()
{
    return make_metric(3, {"1", "0", "0", "sin(x1)^2", "0", "sin(x1)^2*sin(x2)^2"});
}

// Second fundamental form of the unit sphere in its inward-normal convention:
// h^1_{ab} = g_{ab}.
SecondFundamentalField sphere_h()
{
    std::vector<std::vector<ScalarField>> comps{{parse_scalar_field("1", 2),
                                                 parse_scalar_field("0", 2),
                                                 parse_scalar_field("sin(x1)^2", 2)}};
    return SecondFundamentalField(2, 1, std::move(comps));
}

Curve curve_expr(const std::vector<std::string>& comps, double t0, double t1)
{
    std::vector<ScalarField> fields;
    fields.reserve(comps.size());
    for (const auto& s : comps) fields.push_back(parse_scalar_field(s, 1));
    return Curve::from_expressions(std::move(fields), t0, t1);
}

const Eigen::MatrixXd kI2 = Eigen::MatrixXd::Identity(2, 2);
const Eigen::MatrixXd kI1 = Eigen::MatrixXd::Identity(1, 1);
const Eigen::MatrixXd kEmpty = Eigen::MatrixXd(0, 0);

} // namespace

TEST_CASE("gram schmidt completes orthonormal frames")
{
    const MetricField sphere = sphere_metric();
    Eigen::Vector2d x(0.8, 0.3);
    const Eigen::MatrixXd g = sphere.eval(x);

    const Eigen::MatrixXd f = gram_schmidt_frame(g, Eigen::MatrixXd(2, 0));
    CHECK((f.transpose() * g * f - kI2).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK_NOTHROW(check_orthonormal(g, f, "frame", 1e-12));

    Eigen::MatrixXd seed(2, 1);
    seed << 1.0, 1.0;
    const Eigen::MatrixXd f2 = gram_schmidt_frame(g, seed);
    CHECK((f2.transpose() * g * f2 - kI2).cwiseAbs().maxCoeff() <= 1e-14);
    // First column stays parallel to the seed direction.
    CHECK(f2(1, 0) * seed(0, 0) == doctest::Approx(f2(0, 0) * seed(1, 0)).epsilon(1e-12));
    CHECK(f2(0, 0) > 0.0);

    Eigen::MatrixXd dependent(2, 2);
    dependent << 1.0, 2.0, 1.0, 2.0;
    CHECK_THROWS_AS((void)gram_schmidt_frame(g, dependent), ValidationError);

    Eigen::MatrixXd bad = f;
    bad.col(0) *= 1.01;
    CHECK_THROWS_AS(check_orthonormal(g, bad, "frame", 1e-8), ValidationError);
}

TEST_CASE("parallel transport along a flat line is the identity")
{
    const MetricField flat = MetricField::euclidean(3);
    Eigen::Vector3d a(0.0, 0.0, 0.0), b(1.0, 2.0, -0.5);
    const Curve line = Curve::line(a, b);
    Eigen::Vector3d v0(0.3, -1.0, 2.0);

    const Trajectory traj = parallel_transport(flat, line, v0);
    CHECK((traj.eval(1.0) - v0).norm() == 0.0);
    CHECK((traj.eval(0.5) - v0).norm() == 0.0);
}

TEST_CASE("holonomy around a latitude circle rotates by pi")
{
    const MetricField sphere = sphere_metric();
    // Colatitude pi/3 loop: holonomy angle 2*pi*cos(pi/3) = pi, so v maps to -v.
    const Curve lat = curve_expr({"pi/3", "2*pi*x1"}, 0.0, 1.0);
    Eigen::Vector2d v0(1.0, 0.0);

    const Trajectory traj = parallel_transport(sphere, lat, v0);
    const Eigen::VectorXd v1 = traj.eval(1.0);
    CHECK((v1 + v0).norm() <= 1e-6);

    // The metric norm is preserved along the way.
    const Eigen::VectorXd vm = traj.eval(0.37);
    const Eigen::VectorXd xm = lat.position(0.37);
    CHECK(vm.dot(sphere.eval(xm) * vm) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("parallel transport reverses cleanly")
{
    const MetricField sphere = sphere_metric();
    const Curve gamma = curve_expr({"pi/3 + 0.2*x1", "0.5*x1 + 0.3*x1^2"}, 0.0, 1.0);
    Eigen::Vector2d v0(0.7, -0.4);

    const Trajectory fwd = parallel_transport(sphere, gamma, v0);
    const Eigen::VectorXd v1 = fwd.eval(1.0);
    const Trajectory back = parallel_transport(sphere, gamma.reversed(), v1);
    CHECK((back.eval(1.0) - v0).norm() <= 1e-9);
}

TEST_CASE("bundle transport matches the rotation closed form")
{
    // W_1 = x2 * J with J the rotation generator, W_2 = 0; along (t, c) the
    // fiber vector obeys xi' = -c J xi, a rotation at rate c.
    std::vector<ScalarField> frak{parse_scalar_field("1", 2), parse_scalar_field("0", 2),
                                  parse_scalar_field("1", 2)};
    std::vector<std::vector<ScalarField>> omega{
        {parse_scalar_field("0", 2), parse_scalar_field("-x2", 2), parse_scalar_field("x2", 2),
         parse_scalar_field("0", 2)},
        {parse_scalar_field("0", 2), parse_scalar_field("0", 2), parse_scalar_field("0", 2),
         parse_scalar_field("0", 2)}};
    const BundleSpec bundle(2, 2, std::move(frak), std::move(omega));

    const double c = 0.5;
    const Curve path = curve_expr({"x1", "0.5"}, 0.0, 1.0);
    Eigen::Vector2d xi0(1.0, 0.0);
    const Trajectory traj = bundle_transport(bundle, path, xi0);

    for (double t : {0.4, 1.0}) {
        Eigen::Vector2d expected(std::cos(c * t), -std::sin(c * t));
        CHECK((traj.eval(t) - expected).norm() <= 1e-10);
    }
}

TEST_CASE("base transport along an equator geodesic is constant")
{
    const MetricField sphere = sphere_metric();
    const BundleSpec bundle = BundleSpec::trivial(2, 1);
    const SecondFundamentalField h = sphere_h();
    const Curve eq = curve_expr({"pi/2", "x1"}, 0.0, 1.5);

    const BaseTransport base(sphere, bundle, h, eq, FrameSeed{kI2, kI1});
    CHECK((base.tangent_frame(1.2) - kI2).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((base.bundle_frame(0.7) - kI1).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((base.coefficients(0.9) - Eigen::Vector2d(0.0, 1.0)).norm() <= 1e-12);
    CHECK(base.coefficient_derivative(0.5).norm() <= 1e-12);
    CHECK((base.h_in_frame(0.5)[0] - kI2).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(base.h_in_frame_derivative(0.5)[0].cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(base.gram_drift() <= 1e-12);
    CHECK(base.breakpoints().empty());
}

TEST_CASE("base transport derivatives match finite differences")
{
    const MetricField sphere = sphere_metric();
    const Curve gamma = curve_expr({"pi/3 + 0.2*x1", "0.5*x1 + 0.3*x1^2"}, 0.0, 1.0);

    // Rank 2 bundle with a conformal fiber metric and a nonflat connection so
    // the bundle frame and its inverse genuinely evolve.
    std::vector<ScalarField> frak{parse_scalar_field("exp(2*x1*x2)", 2),
                                  parse_scalar_field("0", 2),
                                  parse_scalar_field("exp(2*x1*x2)", 2)};
    std::vector<std::vector<ScalarField>> omega{
        {parse_scalar_field("x2", 2), parse_scalar_field("-x2", 2), parse_scalar_field("x2", 2),
         parse_scalar_field("x2", 2)},
        {parse_scalar_field("x1", 2), parse_scalar_field("0", 2), parse_scalar_field("0", 2),
         parse_scalar_field("x1", 2)}};
    const BundleSpec bundle(2, 2, std::move(frak), std::move(omega));

    std::vector<std::vector<ScalarField>> hcomps{
        {parse_scalar_field("1", 2), parse_scalar_field("0", 2),
         parse_scalar_field("sin(x1)^2", 2)},
        {parse_scalar_field("0.3", 2), parse_scalar_field("0.1*x2", 2),
         parse_scalar_field("0.2 + x1", 2)}};
    const SecondFundamentalField h(2, 2, std::move(hcomps));

    FrameSeed seed;
    seed.tangent = gram_schmidt_frame(sphere.eval(gamma.position(0.0)), Eigen::MatrixXd(2, 0));
    seed.bundle = Eigen::MatrixXd::Identity(2, 2); // frak is the identity at gamma(0)
    const BaseTransport base(sphere, bundle, h, gamma, seed);

    const double delta = 1e-5;
    for (double t : {0.25, 0.6}) {
        const Eigen::VectorXd fd_v =
            (base.coefficients(t + delta) - base.coefficients(t - delta)) / (2.0 * delta);
        CHECK((base.coefficient_derivative(t) - fd_v).cwiseAbs().maxCoeff() <= 1e-6);

        const auto hp = base.h_in_frame(t + delta);
        const auto hm = base.h_in_frame(t - delta);
        const auto dh = base.h_in_frame_derivative(t);
        for (int alpha = 0; alpha < 2; ++alpha) {
            const Eigen::MatrixXd fd_h =
                (hp[static_cast<std::size_t>(alpha)] - hm[static_cast<std::size_t>(alpha)])
                / (2.0 * delta);
            CHECK((dh[static_cast<std::size_t>(alpha)] - fd_h).cwiseAbs().maxCoeff() <= 1e-6);
        }
    }
    CHECK(base.gram_drift() <= 1e-10);
}

TEST_CASE("classical development of a straight line is a geodesic")
{
    const MetricField flat = MetricField::euclidean(2);
    Eigen::Vector2d a(0.0, 0.0), b(0.6, 0.3);
    const Curve line = Curve::line(a, b);
    const auto base = std::make_shared<const BaseTransport>(
        flat, BundleSpec::trivial(2, 0), SecondFundamentalField::zero(2, 0), line,
        FrameSeed{kI2, kEmpty});
    const DevelopmentCoefficients coef = coefficients_closure(base);

    const MetricField sphere = sphere_metric();
    Eigen::Vector2d pt(0.9, 0.2);
    const Eigen::MatrixXd sf = gram_schmidt_frame(sphere.eval(pt), Eigen::MatrixXd(2, 0));
    const DevelopmentResult res = develop(sphere, coef, pt, sf);

    // Independent oracle: the geodesic equation integrated directly.
    const Eigen::Vector2d u0 = sf * Eigen::Vector2d(0.6, 0.3);
    OdeSystem geo{4, [&sphere](double, const Eigen::VectorXd& y) {
                      const Eigen::Vector2d x = y.head(2);
                      const Eigen::Vector2d u = y.tail(2);
                      const auto gm = christoffel(sphere, x);
                      Eigen::VectorXd dy(4);
                      dy.head(2) = u;
                      for (int c = 0; c < 2; ++c)
                          dy[2 + c] = -u.dot(gm[static_cast<std::size_t>(c)] * u);
                      return dy;
                  }};
    Eigen::VectorXd y0(4);
    y0 << pt, u0;
    const Trajectory oracle = rk4_integrate(geo, 0.0, 1.0, y0, {});

    CHECK((res.point() - oracle.eval(1.0).head(2)).norm() <= 1e-9);
    CHECK((res.point_at(0.37) - oracle.eval(0.37).head(2)).norm() <= 1e-8);
    CHECK(res.gram_drift <= 1e-10);
    CHECK_NOTHROW(check_orthonormal(sphere.eval(res.point()), res.frame(), "frame", 1e-9));
}

TEST_CASE("developing a chart geodesic onto its own space reproduces it")
{
    const MetricField sphere = sphere_metric();
    const Curve eq = curve_expr({"pi/2", "x1"}, 0.0, 1.2);
    const auto base = std::make_shared<const BaseTransport>(
        sphere, BundleSpec::trivial(2, 0), SecondFundamentalField::zero(2, 0), eq,
        FrameSeed{kI2, kEmpty});
    const DevelopmentResult res =
        develop(sphere, coefficients_closure(base), Eigen::Vector2d(M_PI / 2, 0.0), kI2);

    CHECK((res.point_at(0.8) - Eigen::Vector2d(M_PI / 2, 0.8)).norm() <= 1e-9);
    CHECK((res.point() - Eigen::Vector2d(M_PI / 2, 1.2)).norm() <= 1e-9);
    CHECK((res.frame() - kI2).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("development along a sampled curve respects its knots")
{
    const MetricField flat = MetricField::euclidean(2);
    std::vector<double> times{0.0, 0.3, 0.7, 1.1, 1.6};
    std::vector<Eigen::VectorXd> pts;
    pts.push_back(Eigen::Vector2d(0.0, 0.0));
    pts.push_back(Eigen::Vector2d(0.2, -0.1));
    pts.push_back(Eigen::Vector2d(0.5, 0.4));
    pts.push_back(Eigen::Vector2d(0.3, 0.9));
    pts.push_back(Eigen::Vector2d(-0.2, 1.2));
    const Curve gamma = Curve::from_samples(times, pts);

    const auto base = std::make_shared<const BaseTransport>(
        flat, BundleSpec::trivial(2, 0), SecondFundamentalField::zero(2, 0), gamma,
        FrameSeed{kI2, kEmpty});
    const DevelopmentCoefficients coef = coefficients_closure(base);
    CHECK(coef.breakpoints == gamma.knots());

    Eigen::Vector2d start(10.0, -5.0);
    const DevelopmentResult res = develop(flat, coef, start, kI2);

    // In flat space the development is a rigid copy of the curve itself; the
    // quadrature is exact because the velocity is piecewise cubic.
    const Eigen::Vector2d expected =
        start + (gamma.position(1.6) - gamma.position(0.0)).head<2>();
    CHECK((res.point() - expected).norm() <= 1e-12);

    // Knot times of the curve appear exactly in the development grid.
    const auto& grid = res.trajectory.times();
    for (double knot : gamma.knots())
        CHECK(std::find(grid.begin(), grid.end(), knot) != grid.end());
}

TEST_CASE("generalized development reproduces the round sphere")
{
    const MetricField sphere = sphere_metric();
    const BundleSpec bundle = BundleSpec::trivial(2, 1);
    const SecondFundamentalField h = sphere_h();
    const MetricField flat3 = MetricField::euclidean(3);

    SUBCASE("equator arc")
    {
        const Curve eq = curve_expr({"pi/2", "x1"}, 0.0, 1.5);
        const auto base =
            std::make_shared<const BaseTransport>(sphere, bundle, h, eq, FrameSeed{kI2, kI1});
        const DevelopmentCoefficients coef = coefficients_closure(base);

        Eigen::Vector3d ptilde(1.0, 0.0, 0.0);
        Eigen::MatrixXd sf(3, 3);
        sf.col(0) = Eigen::Vector3d(0.0, 0.0, -1.0); // theta direction
        sf.col(1) = Eigen::Vector3d(0.0, 1.0, 0.0);  // phi direction
        sf.col(2) = Eigen::Vector3d(-1.0, 0.0, 0.0); // inward normal
        const DevelopmentResult res = generalized_develop(flat3, coef, ptilde, sf);

        for (double t : {0.4, 1.5}) {
            Eigen::Vector3d expected(std::cos(t), std::sin(t), 0.0);
            CHECK((res.point_at(t) - expected).norm() <= 1e-9);
        }
        const Eigen::MatrixXd fr = res.frame_at(1.5);
        CHECK((fr.col(0) - Eigen::Vector3d(0.0, 0.0, -1.0)).norm() <= 1e-9);
        CHECK((fr.col(1) - Eigen::Vector3d(-std::sin(1.5), std::cos(1.5), 0.0)).norm() <= 1e-9);
        CHECK((fr.col(2) - Eigen::Vector3d(-std::cos(1.5), -std::sin(1.5), 0.0)).norm() <= 1e-9);
        CHECK(res.gram_drift <= 1e-10);
    }

    SUBCASE("meridian arc")
    {
        const double t0 = M_PI / 6, t1 = 1.9;
        const Curve mer = curve_expr({"x1", "0"}, t0, t1);
        Eigen::MatrixXd seed_e(2, 2);
        seed_e << 1.0, 0.0, 0.0, 1.0 / std::sin(t0);
        const auto base =
            std::make_shared<const BaseTransport>(sphere, bundle, h, mer, FrameSeed{seed_e, kI1});
        const DevelopmentCoefficients coef = coefficients_closure(base);

        Eigen::Vector3d ptilde(std::sin(t0), 0.0, std::cos(t0));
        Eigen::MatrixXd sf(3, 3);
        sf.col(0) = Eigen::Vector3d(std::cos(t0), 0.0, -std::sin(t0));
        sf.col(1) = Eigen::Vector3d(0.0, 1.0, 0.0);
        sf.col(2) = Eigen::Vector3d(-std::sin(t0), 0.0, -std::cos(t0));
        const DevelopmentResult res = generalized_develop(flat3, coef, ptilde, sf);

        for (double t : {1.0, t1}) {
            Eigen::Vector3d expected(std::sin(t), 0.0, std::cos(t));
            CHECK((res.point_at(t) - expected).norm() <= 1e-9);
        }
        const Eigen::MatrixXd fr = res.frame_at(t1);
        CHECK((fr.col(0) - Eigen::Vector3d(std::cos(t1), 0.0, -std::sin(t1))).norm() <= 1e-9);
        CHECK((fr.col(1) - Eigen::Vector3d(0.0, 1.0, 0.0)).norm() <= 1e-9);
        CHECK((fr.col(2) - Eigen::Vector3d(-std::sin(t1), 0.0, -std::cos(t1))).norm() <= 1e-9);
    }
}

TEST_CASE("vanishing h reduces generalized development to the classical one")
{
    const MetricField sphere = sphere_metric();
    const Curve gamma = curve_expr({"pi/3 + 0.2*x1", "0.7*x1"}, 0.0, 1.0);
    const Eigen::MatrixXd seed_e =
        gram_schmidt_frame(sphere.eval(gamma.position(0.0)), Eigen::MatrixXd(2, 0));

    const auto base_g = std::make_shared<const BaseTransport>(
        sphere, BundleSpec::trivial(2, 1), SecondFundamentalField::zero(2, 1), gamma,
        FrameSeed{seed_e, kI1});
    const auto base_c = std::make_shared<const BaseTransport>(
        sphere, BundleSpec::trivial(2, 0), SecondFundamentalField::zero(2, 0), gamma,
        FrameSeed{seed_e, kEmpty});

    const MetricField s3 = sphere3_metric();
    Eigen::Vector3d ptilde(1.1, 0.8, 0.4);
    const Eigen::MatrixXd frame3 = gram_schmidt_frame(s3.eval(ptilde), Eigen::MatrixXd(3, 0));

    const DevelopmentResult res_g =
        generalized_develop(s3, coefficients_closure(base_g), ptilde, frame3);
    const DevelopmentResult res_c =
        develop(s3, coefficients_closure(base_c), ptilde, frame3.leftCols(2));

    CHECK((res_g.point() - res_c.point()).norm() <= 1e-10);
    CHECK((res_g.frame().leftCols(2) - res_c.frame()).cwiseAbs().maxCoeff() <= 1e-10);

    // The classical integrator refuses bundle-bearing coefficient data.
    CHECK_THROWS_AS((void)develop(s3, coefficients_closure(base_g), ptilde, frame3.leftCols(2)),
                    ValidationError);
}

TEST_CASE("development frames stay orthonormal and push isometrically")
{
    const MetricField sphere = sphere_metric();
    const BundleSpec bundle = BundleSpec::trivial(2, 1);
    const SecondFundamentalField h = sphere_h();
    const MetricField flat3 = MetricField::euclidean(3);

    const double span = 4.0 * M_PI; // two full wraps of the equator
    const Curve eq = curve_expr({"pi/2", "x1"}, 0.0, span);
    const auto base =
        std::make_shared<const BaseTransport>(sphere, bundle, h, eq, FrameSeed{kI2, kI1});
    const DevelopmentCoefficients coef = coefficients_closure(base);

    Eigen::Vector3d ptilde(1.0, 0.0, 0.0);
    Eigen::MatrixXd sf(3, 3);
    sf.col(0) = Eigen::Vector3d(0.0, 0.0, -1.0);
    sf.col(1) = Eigen::Vector3d(0.0, 1.0, 0.0);
    sf.col(2) = Eigen::Vector3d(-1.0, 0.0, 0.0);

    const DevelopmentResult res = generalized_develop(flat3, coef, ptilde, sf);
    CHECK((res.point() - ptilde).norm() <= 1e-8); // closed curve closes
    CHECK(res.gram_drift <= 1e-8);

    Eigen::Vector3d c(0.3, -1.2, 0.4);
    const Eigen::VectorXd pushed = res.push(2.0, c);
    CHECK(pushed.squaredNorm() == doctest::Approx(c.squaredNorm()).epsilon(1e-8));

    DevelopOptions opts;
    opts.reorthonormalize = true;
    const DevelopmentResult res2 = generalized_develop(flat3, coef, ptilde, sf, opts);
    CHECK(res2.gram_drift <= 1e-12);
    CHECK((res2.point() - ptilde).norm() <= 1e-8);
}

TEST_CASE("constant curvature coupling draws a circle")
{
    // Base R^1, rank 1 bundle, h(e1,e1) = e2: the development in flat R^2 is
    // the unit circle gamma(t) = p + (sin t, 1 - cos t).
    const MetricField line_metric = MetricField::euclidean(1);
    const Curve path = curve_expr({"x1"}, 0.0, 2.5);
    std::vector<std::vector<ScalarField>> hcomps{{parse_scalar_field("1", 1)}};
    const SecondFundamentalField h(1, 1, std::move(hcomps));

    const auto base = std::make_shared<const BaseTransport>(
        line_metric, BundleSpec::trivial(1, 1), h, path,
        FrameSeed{Eigen::MatrixXd::Identity(1, 1), kI1});
    const MetricField flat2 = MetricField::euclidean(2);
    const DevelopmentResult res =
        generalized_develop(flat2, coefficients_closure(base), Eigen::Vector2d(0.0, 0.0), kI2);

    for (double t : {1.0, 2.5}) {
        Eigen::Vector2d expected(std::sin(t), 1.0 - std::cos(t));
        CHECK((res.point_at(t) - expected).norm() <= 1e-9);
    }
}

TEST_CASE("point to point transports work in both directions")
{
    const MetricField sphere = sphere_metric();
    const Curve gamma = curve_expr({"pi/3 + 0.2*x1", "0.5*x1 + 0.3*x1^2"}, 0.0, 1.0);
    Eigen::Vector2d v0(0.7, -0.4);

    const Trajectory traj = parallel_transport(sphere, gamma, v0);
    const Eigen::VectorXd fwd = parallel_transport(sphere, gamma, v0, 0.0, 1.0, 1e-3);
    CHECK((fwd - traj.eval(1.0)).norm() <= 1e-12);

    const Eigen::VectorXd back = parallel_transport(sphere, gamma, fwd, 1.0, 0.0, 1e-3);
    CHECK((back - v0).norm() <= 1e-9);

    // Partial range, still reversible.
    const Eigen::VectorXd mid = parallel_transport(sphere, gamma, v0, 0.2, 0.7, 1e-3);
    CHECK((parallel_transport(sphere, gamma, mid, 0.7, 0.2, 1e-3) - v0.eval()).norm() <= 1e-9);

    std::vector<ScalarField> frak{parse_scalar_field("1", 2), parse_scalar_field("0", 2),
                                  parse_scalar_field("1", 2)};
    std::vector<std::vector<ScalarField>> omega{
        {parse_scalar_field("0", 2), parse_scalar_field("-x2", 2), parse_scalar_field("x2", 2),
         parse_scalar_field("0", 2)},
        {parse_scalar_field("0", 2), parse_scalar_field("0", 2), parse_scalar_field("0", 2),
         parse_scalar_field("0", 2)}};
    const BundleSpec bundle(2, 2, std::move(frak), std::move(omega));
    const Curve path = curve_expr({"x1", "0.5"}, 0.0, 1.0);
    Eigen::Vector2d xi0(1.0, 0.0);
    const Eigen::VectorXd xi1 = bundle_transport(bundle, path, xi0, 0.0, 1.0, 1e-3);
    CHECK((xi1 - Eigen::Vector2d(std::cos(0.5), -std::sin(0.5))).norm() <= 1e-10);
    CHECK((bundle_transport(bundle, path, xi1, 1.0, 0.0, 1e-3) - xi0.eval()).norm() <= 1e-10);
}

TEST_CASE("d map preserves coefficients and the metric")
{
    const MetricField sphere = sphere_metric();
    const Curve gamma = curve_expr({"pi/3 + 0.2*x1", "0.7*x1"}, 0.0, 1.0);
    const Eigen::MatrixXd seed_e =
        gram_schmidt_frame(sphere.eval(gamma.position(0.0)), Eigen::MatrixXd(2, 0));
    const auto base = std::make_shared<const BaseTransport>(
        sphere, BundleSpec::trivial(2, 1), SecondFundamentalField::zero(2, 1), gamma,
        FrameSeed{seed_e, kI1});

    const MetricField s3 = sphere3_metric();
    Eigen::Vector3d ptilde(1.1, 0.8, 0.4);
    const Eigen::MatrixXd frame3 = gram_schmidt_frame(s3.eval(ptilde), Eigen::MatrixXd(3, 0));
    const DevelopmentResult dev =
        generalized_develop(s3, coefficients_closure(base), ptilde, frame3);

    Eigen::Vector3d w(0.4, -0.2, 0.9);
    CHECK((d_map(dev, 0.3, 0.3, w) - w).norm() <= 1e-12);

    // Composition through an intermediate time is the direct map.
    const Eigen::VectorXd two_leg = d_map(dev, 0.5, 1.0, d_map(dev, 0.0, 0.5, w));
    CHECK((two_leg - d_map(dev, 0.0, 1.0, w)).norm() <= 1e-12);

    // Metric norm is preserved.
    const Eigen::VectorXd w1 = d_map(dev, 0.0, 1.0, w);
    const double n0 = w.dot(s3.eval(dev.point_at(0.0)) * w);
    const double n1 = w1.dot(s3.eval(dev.point_at(1.0)) * w1);
    CHECK(n1 == doctest::Approx(n0).epsilon(1e-9));

    // With h = 0 the d map is parallel transport along the developed curve.
    const Curve developed = Curve::from_trajectory(dev.trajectory, 0, 3);
    const Eigen::VectorXd par = parallel_transport(s3, developed, w, 0.0, 1.0, 1e-3);
    CHECK((w1 - par).norm() <= 1e-7);
}

TEST_CASE("transport and development validation")
{
    const MetricField sphere = sphere_metric();
    const Curve eq = curve_expr({"pi/2", "x1"}, 0.0, 1.0);

    Eigen::Vector3d a3(0.0, 0.0, 0.0), b3(1.0, 0.0, 0.0);
    CHECK_THROWS_AS((void)parallel_transport(sphere, Curve::line(a3, b3), Eigen::Vector2d(1, 0)),
                    ValidationError);
    CHECK_THROWS_AS((void)parallel_transport(sphere, eq, Eigen::Vector3d(1, 0, 0)),
                    ValidationError);

    CHECK_THROWS_AS(BaseTransport(sphere, BundleSpec::trivial(2, 0),
                                  SecondFundamentalField::zero(2, 0), eq,
                                  FrameSeed{2.0 * kI2, kEmpty}),
                    ValidationError);
    CHECK_THROWS_AS(BaseTransport(sphere, BundleSpec::trivial(3, 1),
                                  SecondFundamentalField::zero(2, 1), eq, FrameSeed{kI2, kI1}),
                    ValidationError);
    CHECK_THROWS_AS(BaseTransport(sphere, BundleSpec::trivial(2, 1),
                                  SecondFundamentalField::zero(2, 2), eq, FrameSeed{kI2, kI1}),
                    ValidationError);

    const auto base = std::make_shared<const BaseTransport>(
        sphere, BundleSpec::trivial(2, 0), SecondFundamentalField::zero(2, 0), eq,
        FrameSeed{kI2, kEmpty});
    const DevelopmentCoefficients coef = coefficients_closure(base);

    // Start point dimension, seed frame shape, seed frame orthonormality.
    CHECK_THROWS_AS((void)develop(sphere, coef, Eigen::Vector3d(0, 0, 0), kI2), ValidationError);
    CHECK_THROWS_AS((void)develop(sphere, coef, Eigen::Vector2d(M_PI / 2, 0),
                                  Eigen::MatrixXd::Identity(2, 1)),
                    ValidationError);
    CHECK_THROWS_AS((void)develop(sphere, coef, Eigen::Vector2d(M_PI / 2, 0), 1.5 * kI2),
                    ValidationError);

    // More frame vectors than ambient dimensions cannot work.
    DevelopmentCoefficients wide;
    wide.n = 3;
    wide.s = 0;
    wide.t0 = 0.0;
    wide.t1 = 1.0;
    wide.v = [](double) { return Eigen::Vector3d(1.0, 0.0, 0.0); };
    CHECK_THROWS_AS((void)develop(MetricField::euclidean(2), wide, Eigen::Vector2d(0, 0),
                                  Eigen::MatrixXd::Identity(2, 3)),
                    ValidationError);

    // Missing velocity closure.
    DevelopmentCoefficients hollow;
    hollow.n = 2;
    CHECK_THROWS_AS((void)develop(sphere, hollow, Eigen::Vector2d(M_PI / 2, 0), kI2),
                    ValidationError);

    CHECK_THROWS_AS((void)coefficients_closure(nullptr), ValidationError);

    const DevelopmentResult res = develop(sphere, coef, Eigen::Vector2d(M_PI / 2, 0), kI2);
    CHECK_THROWS_AS((void)res.push(0.5, Eigen::Vector3d(1, 2, 3)), ValidationError);
}
