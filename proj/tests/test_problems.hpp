#pragma once

// Shared model problems with known closed forms, used across the test
// binaries: the round sphere seen from its chart data, a cylinder, flat
// space, and seed submanifolds on the sphere.

#include "devmap/problem.hpp"

#include <string>
#include <utility>
#include <vector>

namespace tp {

inline devmap::MetricField make_metric(int dim, const std::vector<std::string>& upper)
{
    std::vector<devmap::ScalarField> comps;
    comps.reserve(upper.size());
    for (const auto& s : upper) comps.push_back(devmap::parse_scalar_field(s, dim));
    return devmap::MetricField(dim, std::move(comps));
}

inline devmap::Curve curve_expr(const std::vector<std::string>& comps, double t0, double t1)
{
    std::vector<devmap::ScalarField> fields;
    fields.reserve(comps.size());
    for (const auto& s : comps) fields.push_back(devmap::parse_scalar_field(s, 1));
    return devmap::Curve::from_expressions(std::move(fields), t0, t1);
}

// Parse a list of one-parameter fields (for psi and sigma entries).
inline std::vector<devmap::ScalarField> fields1(const std::vector<std::string>& src)
{
    std::vector<devmap::ScalarField> out;
    out.reserve(src.size());
    for (const auto& s : src) out.push_back(devmap::parse_scalar_field(s, 1));
    return out;
}

inline devmap::MetricField sphere_metric() { return make_metric(2, {"1", "0", "sin(x1)^2"}); }

inline devmap::MetricField sphere3_metric()
{
    return make_metric(3, {"1", "0", "0", "sin(x1)^2", "0", "sin(x1)^2*sin(x2)^2"});
}

// Unit sphere second fundamental form toward the inward normal, h^1_{ab} =
// g_{ab}, optionally rescaled by a constant expression.
inline devmap::SecondFundamentalField sphere_h(const std::string& factor = "1")
{
    std::vector<std::vector<devmap::ScalarField>> comps{
        {devmap::parse_scalar_field(factor, 2), devmap::parse_scalar_field("0", 2),
         devmap::parse_scalar_field("(" + factor + ")*sin(x1)^2", 2)}};
    return devmap::SecondFundamentalField(2, 1, std::move(comps));
}

// Chart data of the unit sphere in flat 3-space, seeded at the equator point
// (pi/2, 0) -> (1, 0, 0) with the inward normal as the fiber image.
inline devmap::Problem sphere_point_problem(const std::string& h_factor = "1")
{
    devmap::PointSeed seed;
    seed.p = Eigen::Vector2d(1.5707963267948966, 0.0);
    seed.p_tilde = Eigen::Vector3d(1.0, 0.0, 0.0);
    seed.phi = Eigen::MatrixXd(3, 3);
    seed.phi << 0, 0, -1,
                0, 1, 0,
               -1, 0, 0;
    return devmap::Problem(sphere_metric(), devmap::BundleSpec::trivial(2, 1),
                           sphere_h(h_factor), devmap::MetricField::euclidean(3),
                           std::move(seed));
}

// Sphere chart data with the metric scaled by a constant factor lambda^2
// while h keeps the unit-sphere values. For lambda != 1 the data is not
// realizable: the curvature of the scaled metric no longer matches h.
inline devmap::Problem scaled_sphere_problem(const std::string& lam)
{
    const devmap::MetricField g =
        make_metric(2, {"(" + lam + ")^2", "0", "(" + lam + ")^2*sin(x1)^2"});
    const double l = devmap::parse_scalar_field(lam, 1).constant_value();
    devmap::PointSeed seed;
    seed.p = Eigen::Vector2d(1.5707963267948966, 0.0);
    seed.p_tilde = Eigen::Vector3d(1.0, 0.0, 0.0);
    seed.phi = Eigen::MatrixXd(3, 3);
    seed.phi << 0, 0, -1,
                0, l, 0,
               -l, 0, 0;
    return devmap::Problem(g, devmap::BundleSpec::trivial(2, 1), sphere_h(),
                           devmap::MetricField::euclidean(3), std::move(seed));
}

// Cylinder of radius r in flat 3-space: flat base metric, h^1_{11} = 1/r
// toward the inward normal, seeded at (0,0) -> (r, 0, 0).
inline devmap::Problem cylinder_point_problem(const std::string& radius = "0.75")
{
    std::vector<std::vector<devmap::ScalarField>> comps{
        {devmap::parse_scalar_field("1/(" + radius + ")", 2),
         devmap::parse_scalar_field("0", 2), devmap::parse_scalar_field("0", 2)}};
    devmap::SecondFundamentalField h(2, 1, std::move(comps));

    const double r = devmap::parse_scalar_field(radius, 1).constant_value();
    devmap::PointSeed seed;
    seed.p = Eigen::Vector2d(0.0, 0.0);
    seed.p_tilde = Eigen::Vector3d(r, 0.0, 0.0);
    seed.phi = Eigen::MatrixXd(3, 3);
    seed.phi << 0, 0, -1,
                1, 0, 0,
                0, 1, 0;
    return devmap::Problem(devmap::MetricField::euclidean(2),
                           devmap::BundleSpec::trivial(2, 1), std::move(h),
                           devmap::MetricField::euclidean(3), std::move(seed));
}

// Equator circle on the sphere with its round image in flat 3-space. The
// frame map sends (tangent theta, tangent phi, fiber) to the embedded
// theta-direction, the embedded velocity, and the inward normal.
inline devmap::SubmanifoldSeed sphere_equator_seed(double u0 = 0.0, double u1 = 1.5)
{
    devmap::SubmanifoldSeed seed;
    seed.embedding = curve_expr({"pi/2", "x1"}, u0, u1);
    seed.ambient_embedding = curve_expr({"cos(x1)", "sin(x1)", "0"}, u0, u1);
    seed.psi = fields1({"0", "-sin(x1)", "-cos(x1)",
                        "0", "cos(x1)", "-sin(x1)",
                        "-1", "0", "0"});
    return seed;
}

inline devmap::Problem sphere_equator_problem(const std::string& h_factor = "1")
{
    return devmap::Problem(sphere_metric(), devmap::BundleSpec::trivial(2, 1),
                           sphere_h(h_factor), devmap::MetricField::euclidean(3),
                           sphere_equator_seed());
}

// Latitude circle x1 = theta0 on the sphere; not a base geodesic, so the
// derived curvature term sigma is nonzero (-cot(theta0) toward the pole).
inline devmap::SubmanifoldSeed sphere_latitude_seed(const std::string& theta0,
                                                    double u0 = 0.0, double u1 = 2.0)
{
    const std::string c = "cos(" + theta0 + ")";
    const std::string s = "sin(" + theta0 + ")";
    devmap::SubmanifoldSeed seed;
    seed.embedding = curve_expr({theta0, "x1"}, u0, u1);
    seed.ambient_embedding =
        curve_expr({s + "*cos(x1)", s + "*sin(x1)", c}, u0, u1);
    seed.psi = fields1({c + "*cos(x1)", "-" + s + "*sin(x1)", "-" + s + "*cos(x1)",
                        c + "*sin(x1)", s + "*cos(x1)", "-" + s + "*sin(x1)",
                        "-" + s, "0", "-" + c});
    return seed;
}

inline devmap::Problem sphere_latitude_problem(const std::string& theta0 = "pi/3")
{
    return devmap::Problem(sphere_metric(), devmap::BundleSpec::trivial(2, 1),
                           sphere_h(), devmap::MetricField::euclidean(3),
                           sphere_latitude_seed(theta0));
}

// Graph z = (x^2 + y^2)/2 in flat 3-space: g = delta + grad f grad f^T,
// h^1_ab = f_ab / W with W = sqrt(1 + |grad f|^2), seeded at the origin with
// the upward unit normal.
inline devmap::Problem paraboloid_point_problem()
{
    const devmap::MetricField g =
        make_metric(2, {"1+x1^2", "x1*x2", "1+x2^2"});
    const std::string w = "sqrt(1+x1^2+x2^2)";
    std::vector<std::vector<devmap::ScalarField>> comps{
        {devmap::parse_scalar_field("1/" + w, 2), devmap::parse_scalar_field("0", 2),
         devmap::parse_scalar_field("1/" + w, 2)}};
    devmap::SecondFundamentalField h(2, 1, std::move(comps));

    devmap::PointSeed seed;
    seed.p = Eigen::Vector2d(0.0, 0.0);
    seed.p_tilde = Eigen::Vector3d(0.0, 0.0, 0.0);
    seed.phi = Eigen::MatrixXd::Identity(3, 3);
    return devmap::Problem(g, devmap::BundleSpec::trivial(2, 1), std::move(h),
                           devmap::MetricField::euclidean(3), std::move(seed));
}

// Product of two circles of radii r1, r2 in flat 4-space: flat base metric,
// rank-2 normal bundle with flat connection, h^1_{11} = 1/r1 and
// h^2_{22} = 1/r2 toward the inward normals of the two circle factors.
inline devmap::Problem torus_point_problem(const std::string& r1 = "0.8",
                                           const std::string& r2 = "0.6")
{
    std::vector<std::vector<devmap::ScalarField>> comps{
        {devmap::parse_scalar_field("1/(" + r1 + ")", 2),
         devmap::parse_scalar_field("0", 2), devmap::parse_scalar_field("0", 2)},
        {devmap::parse_scalar_field("0", 2), devmap::parse_scalar_field("0", 2),
         devmap::parse_scalar_field("1/(" + r2 + ")", 2)}};
    devmap::SecondFundamentalField h(2, 2, std::move(comps));

    devmap::PointSeed seed;
    seed.p = Eigen::Vector2d(0.0, 0.0);
    seed.p_tilde = Eigen::Vector4d(
        devmap::parse_scalar_field(r1, 1).constant_value(), 0.0,
        devmap::parse_scalar_field(r2, 1).constant_value(), 0.0);
    seed.phi = Eigen::MatrixXd(4, 4);
    seed.phi << 0, 0, -1, 0,
                1, 0, 0, 0,
                0, 0, 0, -1,
                0, 1, 0, 0;
    return devmap::Problem(devmap::MetricField::euclidean(2),
                           devmap::BundleSpec::trivial(2, 2), std::move(h),
                           devmap::MetricField::euclidean(4), std::move(seed));
}

// Totally geodesic round 2-sphere inside the round 3-sphere (polar charts):
// h = 0 but the ambient curvature is nonzero, so the pulled-back ambient
// term carries the whole Gauss identity.
inline devmap::Problem sphere_in_sphere3_problem()
{
    devmap::PointSeed seed;
    seed.p = Eigen::Vector2d(1.5707963267948966, 0.0);
    seed.p_tilde = Eigen::Vector3d(1.5707963267948966, 1.5707963267948966, 0.0);
    seed.phi = Eigen::MatrixXd(3, 3);
    seed.phi << 1, 0, 0,
                0, 0, 1,
                0, 1, 0;
    return devmap::Problem(sphere_metric(), devmap::BundleSpec::trivial(2, 1),
                           devmap::SecondFundamentalField::zero(2, 1),
                           sphere3_metric(), std::move(seed));
}

// Flat plane mapped by the identity, with no bundle block.
inline devmap::Problem flat_point_problem()
{
    devmap::PointSeed seed;
    seed.p = Eigen::Vector2d(0.2, 0.3);
    seed.p_tilde = Eigen::Vector2d(0.5, 0.6);
    seed.phi = Eigen::MatrixXd::Identity(2, 2);
    return devmap::Problem(devmap::MetricField::euclidean(2),
                           devmap::BundleSpec::trivial(2, 0),
                           devmap::SecondFundamentalField::zero(2, 0),
                           devmap::MetricField::euclidean(2), std::move(seed));
}

} // namespace tp
