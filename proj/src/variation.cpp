#include "devmap/variation.hpp"

#include "devmap/errors.hpp"
#include "devmap/odeint.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace devmap {

namespace {

constexpr double kStartTol = 1e-8;

Eigen::MatrixXd unpack_rows(const Eigen::VectorXd& y, int offset, int rows, int cols)
{
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = y(offset + r * cols + c);
    return m;
}

void pack_rows(const Eigen::MatrixXd& m, int offset, Eigen::VectorXd& y)
{
    const int cols = static_cast<int>(m.cols());
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < cols; ++c) y(offset + r * cols + c) = m(r, c);
}

double max_abs(const Eigen::MatrixXd& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Transports of one family member, with its frames checked against the seed.
struct FamilySetup {
    std::shared_ptr<const BaseTransport> center, up, um, upm, umm;
    SeedFrames frames;      // of the center curve
    double theta = 0.0;     // start velocity coefficient on the seed tangent
    Eigen::VectorXd sigma;  // seed curvature data at the center start
    bool on_submanifold = false;
};

std::shared_ptr<const BaseTransport> family_transport(const Problem& prob,
                                                      const CurveFamily& family, double u,
                                                      const Curve& center, double step,
                                                      SeedFrames* frames_out)
{
    const Curve gamma = family.curve(u);
    if (!gamma.valid())
        throw ValidationError("the curve family returned an invalid curve at u="
                              + std::to_string(u));
    if (gamma.dim() != prob.n())
        throw ValidationError("family curve dimension does not match the base");
    if (center.valid() && (gamma.t0() != center.t0() || gamma.t1() != center.t1()))
        throw ValidationError("family curves must share one parameter range");

    SeedFrames frames = prob.point_seeded() ? prob.seed_frames()
                                            : prob.seed_frames_at(family.start(u));
    const double offset = (gamma.position(gamma.t0()) - frames.p).lpNorm<Eigen::Infinity>();
    if (offset > kStartTol)
        throw ValidationError("family curve does not start at its seed point at u="
                              + std::to_string(u) + ": offset " + std::to_string(offset));
    auto transport = std::make_shared<const BaseTransport>(
        prob.base(), prob.bundle(), prob.h(), gamma,
        FrameSeed{frames.base_tangent, frames.base_bundle}, step);
    if (frames_out) *frames_out = std::move(frames);
    return transport;
}

FamilySetup make_setup(const Problem& prob, const CurveFamily& family, double u,
                       const VariationOptions& opt)
{
    if (!family.curve) throw ValidationError("the curve family has no curve map");
    if (prob.point_seeded() && family.start)
        throw ValidationError("point-seeded problems take no family start map");
    if (!prob.point_seeded() && !family.start)
        throw ValidationError("submanifold-seeded problems need a family start map");
    if (!(opt.step > 0.0) || !(opt.du > 0.0) || !(opt.du_mixed > 0.0))
        throw ValidationError("variation step and difference widths must be positive");

    FamilySetup setup;
    setup.on_submanifold = !prob.point_seeded();
    setup.center = family_transport(prob, family, u, Curve(), opt.step, &setup.frames);
    const Curve& c = setup.center->curve();
    setup.up = family_transport(prob, family, u + opt.du, c, opt.step, nullptr);
    setup.um = family_transport(prob, family, u - opt.du, c, opt.step, nullptr);
    setup.upm = family_transport(prob, family, u + opt.du_mixed, c, opt.step, nullptr);
    setup.umm = family_transport(prob, family, u - opt.du_mixed, c, opt.step, nullptr);

    if (setup.on_submanifold) {
        const double c0 = family.start(u);
        const double cprime =
            (family.start(u + opt.du) - family.start(u - opt.du)) / (2.0 * opt.du);
        setup.theta = prob.submanifold_speed(c0) * cprime;
        setup.sigma = prob.submanifold_sigma(c0);
    }
    return setup;
}

// Centered differences across the family in u; derivatives in t are exact.
Eigen::VectorXd du_coefficients(const FamilySetup& setup, double t, double du)
{
    return (setup.up->coefficients(t) - setup.um->coefficients(t)) / (2.0 * du);
}

Eigen::VectorXd dudt_coefficients(const FamilySetup& setup, double t, double du_mixed)
{
    return (setup.upm->coefficient_derivative(t) - setup.umm->coefficient_derivative(t))
           / (2.0 * du_mixed);
}

// P(t): column alpha = h^alpha(t) v(t) in the moving frames.
Eigen::MatrixXd p_matrix(const BaseTransport& bt, double t)
{
    const Eigen::VectorXd v = bt.coefficients(t);
    const std::vector<Eigen::MatrixXd> hf = bt.h_in_frame(t);
    Eigen::MatrixXd p(bt.n(), bt.s());
    for (int al = 0; al < bt.s(); ++al) p.col(al) = hf[static_cast<std::size_t>(al)] * v;
    return p;
}

Eigen::MatrixXd pt_matrix(const BaseTransport& bt, double t)
{
    const Eigen::VectorXd v = bt.coefficients(t);
    const Eigen::VectorXd vt = bt.coefficient_derivative(t);
    const std::vector<Eigen::MatrixXd> hf = bt.h_in_frame(t);
    const std::vector<Eigen::MatrixXd> hft = bt.h_in_frame_derivative(t);
    Eigen::MatrixXd p(bt.n(), bt.s());
    for (int al = 0; al < bt.s(); ++al) {
        const auto k = static_cast<std::size_t>(al);
        p.col(al) = hft[k] * v + hf[k] * vt;
    }
    return p;
}

// Frame rotation rate of a development: the tangent block turns into the
// bundle block at rate P and back at -P^T.
Eigen::MatrixXd omega_of(const Eigen::MatrixXd& p)
{
    const int n = static_cast<int>(p.rows());
    const int s = static_cast<int>(p.cols());
    Eigen::MatrixXd om = Eigen::MatrixXd::Zero(n + s, n + s);
    om.topRightCorner(n, s) = p;
    om.bottomLeftCorner(s, n) = -p.transpose();
    return om;
}

// Bundle curvature in the moving frames: out(al,be,a,b) = the pairing of
// R(E_a, E_b) B_al with B_be, from chart components rv.
CurvatureValue frame_bundle_curvature(const CurvatureValue& rv, const Eigen::MatrixXd& bf,
                                      const Eigen::MatrixXd& ef)
{
    const int s = static_cast<int>(bf.cols());
    const int n = static_cast<int>(ef.cols());
    CurvatureValue out(s, s, n, n);
    for (int al = 0; al < s; ++al)
        for (int be = 0; be < s; ++be)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    double sum = 0.0;
                    for (int i = 0; i < s; ++i)
                        for (int j = 0; j < s; ++j)
                            for (int k = 0; k < n; ++k)
                                for (int l = 0; l < n; ++l)
                                    sum += rv.at(i, j, k, l) * bf(i, al) * bf(j, be)
                                           * ef(k, a) * ef(l, b);
                    out.at(al, be, a, b) = sum;
                }
    return out;
}

// Rotation blocks at t = t0. Point seeds start with no rotation; submanifold
// seeds rotate the adapted frame through the seed curvature data sigma and
// the mixed block through h applied to the start velocity.
Eigen::MatrixXd base_rotation_init(const FamilySetup& setup, int n)
{
    Eigen::MatrixXd xt = Eigen::MatrixXd::Zero(n, n);
    if (setup.on_submanifold) {
        for (int mu = 1; mu < n; ++mu) {
            xt(0, mu) = setup.sigma(mu - 1) * setup.theta;
            xt(mu, 0) = -xt(0, mu);
        }
    }
    return xt;
}

Eigen::MatrixXd dev_rotation_init(const FamilySetup& setup, int n, int s)
{
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n + s, n + s);
    x.topLeftCorner(n, n) = base_rotation_init(setup, n);
    if (setup.on_submanifold && s > 0) {
        const std::vector<Eigen::MatrixXd> hf = setup.center->h_in_frame(setup.center->t0());
        for (int a = 0; a < n; ++a)
            for (int al = 0; al < s; ++al) {
                x(a, n + al) = hf[static_cast<std::size_t>(al)](a, 0) * setup.theta;
                x(n + al, a) = -x(a, n + al);
            }
    }
    return x;
}

} // namespace

Eigen::VectorXd BaseVariationResult::u_at(double t) const
{
    return trajectory.eval(t).head(n);
}

Eigen::VectorXd BaseVariationResult::u_prime_at(double t) const
{
    return trajectory.eval(t).segment(n, n);
}

Eigen::MatrixXd BaseVariationResult::tangent_rotation_at(double t) const
{
    return unpack_rows(trajectory.eval(t), 2 * n, n, n);
}

Eigen::MatrixXd BaseVariationResult::bundle_rotation_at(double t) const
{
    return unpack_rows(trajectory.eval(t), 2 * n + n * n, s, s);
}

Eigen::VectorXd BaseVariationResult::chart_variation_at(double t) const
{
    return center->tangent_frame(t) * u_at(t);
}

Eigen::VectorXd GVariationResult::u_at(double t) const
{
    return trajectory.eval(t).head(n + s);
}

Eigen::VectorXd GVariationResult::u_prime_at(double t) const
{
    return trajectory.eval(t).segment(n + s, n + s);
}

Eigen::MatrixXd GVariationResult::frame_rotation_at(double t) const
{
    const int m = n + s;
    return unpack_rows(trajectory.eval(t), 2 * m, m, m);
}

Eigen::VectorXd GVariationResult::chart_variation_at(double t) const
{
    return center.development.frame_at(t) * u_at(t);
}

BaseVariationResult integrate_base_variation(const Problem& prob, const CurveFamily& family,
                                             double u, const VariationOptions& options)
{
    const int n = prob.n();
    const int s = prob.s();
    FamilySetup setup = make_setup(prob, family, u, options);
    const MetricField base = prob.base();
    const BundleSpec bundle = prob.bundle();
    const VariationOptions opt = options;

    OdeSystem sys;
    sys.dim = 2 * n + n * n + s * s;
    sys.rhs = [n, s, setup, base, bundle, opt](double t, const Eigen::VectorXd& y) {
        const Eigen::VectorXd uvec = y.head(n);
        const Eigen::VectorXd uprime = y.segment(n, n);
        const Eigen::MatrixXd xt = unpack_rows(y, 2 * n, n, n);

        const Eigen::VectorXd v = setup.center->coefficients(t);
        const Eigen::VectorXd vt = setup.center->coefficient_derivative(t);
        const Eigen::VectorXd vut = dudt_coefficients(setup, t, opt.du_mixed);
        const Eigen::VectorXd x = setup.center->curve().position(t);
        const Eigen::MatrixXd ef = setup.center->tangent_frame(t);
        const CurvatureValue rf = pull_back_curvature(riemann_curvature(base, x), ef);

        // U''_a = R(c,a,d,b) v_c v_d U_b + the mixed coefficient derivative
        // + dv_b/dt X_{ba}; the rotation blocks integrate the curvature
        // pairings of the velocity with the variation.
        Eigen::MatrixXd jac(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double sum = 0.0;
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d) sum += rf.at(c, a, d, b) * v(c) * v(d);
                jac(a, b) = sum;
            }
        const Eigen::VectorXd udd = jac * uvec + vut + xt.transpose() * vt;

        Eigen::MatrixXd xtdot(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double sum = 0.0;
                for (int d = 0; d < n; ++d)
                    for (int c = 0; c < n; ++c) sum += rf.at(a, b, d, c) * v(d) * uvec(c);
                xtdot(a, b) = sum;
            }

        Eigen::MatrixXd xbdot = Eigen::MatrixXd::Zero(s, s);
        if (s > 0) {
            const CurvatureValue rvf = frame_bundle_curvature(
                bundle_curvature(bundle, x), setup.center->bundle_frame(t), ef);
            for (int al = 0; al < s; ++al)
                for (int be = 0; be < s; ++be) {
                    double sum = 0.0;
                    for (int a = 0; a < n; ++a)
                        for (int b = 0; b < n; ++b)
                            sum += rvf.at(al, be, a, b) * v(a) * uvec(b);
                    xbdot(al, be) = sum;
                }
        }

        Eigen::VectorXd dy(2 * n + n * n + s * s);
        dy.head(n) = uprime;
        dy.segment(n, n) = udd;
        pack_rows(xtdot, 2 * n, dy);
        pack_rows(xbdot, 2 * n + n * n, dy);
        return dy;
    };

    const double t0 = setup.center->t0();
    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(sys.dim);
    const Eigen::MatrixXd xt0 = base_rotation_init(setup, n);
    if (setup.on_submanifold) y0(0) = setup.theta;
    y0.segment(n, n) = du_coefficients(setup, t0, opt.du) - xt0 * setup.center->coefficients(t0);
    pack_rows(xt0, 2 * n, y0);

    IntegrateOptions io;
    io.step = opt.step;
    io.breakpoints = setup.center->breakpoints();
    BaseVariationResult result;
    result.n = n;
    result.s = s;
    result.center = setup.center;
    result.trajectory = rk4_integrate(sys, t0, setup.center->t1(), std::move(y0), io);
    for (int i = 0; i < result.trajectory.knot_count(); ++i) {
        const Eigen::VectorXd& y = result.trajectory.state(i);
        const Eigen::MatrixXd a = unpack_rows(y, 2 * n, n, n);
        const Eigen::MatrixXd b = unpack_rows(y, 2 * n + n * n, s, s);
        result.antisymmetry_defect = std::max(
            {result.antisymmetry_defect, max_abs(a + a.transpose()), max_abs(b + b.transpose())});
    }
    return result;
}

GVariationResult integrate_gvariation(const Problem& prob, const CurveFamily& family, double u,
                                      const VariationOptions& options)
{
    const int n = prob.n();
    const int s = prob.s();
    const int m = n + s;
    FamilySetup setup = make_setup(prob, family, u, options);
    CurveDevelopment center = develop_curve(prob, setup.center->curve(), setup.frames, options.step);
    setup.center = center.transport; // one transport drives both integrations
    const MetricField ambient = prob.ambient();
    const DevelopmentResult dev = center.development;
    const VariationOptions opt = options;

    OdeSystem sys;
    sys.dim = 2 * m + m * m;
    sys.rhs = [n, s, m, setup, ambient, dev, opt](double t, const Eigen::VectorXd& y) {
        const Eigen::VectorXd uvec = y.head(m);
        const Eigen::VectorXd uprime = y.segment(m, m);
        const Eigen::MatrixXd xrot = unpack_rows(y, 2 * m, m, m);

        const Eigen::VectorXd v = setup.center->coefficients(t);
        const Eigen::VectorXd vt = setup.center->coefficient_derivative(t);
        const Eigen::MatrixXd p = p_matrix(*setup.center, t);
        const Eigen::MatrixXd pt = pt_matrix(*setup.center, t);
        const Eigen::MatrixXd pp = p_matrix(*setup.up, t);
        const Eigen::MatrixXd pm = p_matrix(*setup.um, t);
        const Eigen::MatrixXd pu = (pp - pm) / (2.0 * opt.du);
        const Eigen::VectorXd q = p.transpose() * v;
        const Eigen::VectorXd qu = (pp.transpose() * setup.up->coefficients(t)
                                    - pm.transpose() * setup.um->coefficients(t))
                                   / (2.0 * opt.du);

        Eigen::VectorXd vtext = Eigen::VectorXd::Zero(m);
        vtext.head(n) = vt;
        Eigen::VectorXd vutext = Eigen::VectorXd::Zero(m);
        vutext.head(n) = dudt_coefficients(setup, t, opt.du_mixed);
        Eigen::VectorXd qext = Eigen::VectorXd::Zero(m);
        qext.tail(s) = q;

        const Eigen::MatrixXd om = omega_of(p);
        const Eigen::VectorXd x = dev.point_at(t);
        const Eigen::MatrixXd frame = dev.frame_at(t);
        const CurvatureValue rf = pull_back_curvature(riemann_curvature(ambient, x), frame);

        // Jacobi operator rows: K(A0, A) = R(b, A0, c, A) v_b v_c.
        Eigen::MatrixXd jac(m, m);
        for (int r = 0; r < m; ++r)
            for (int a = 0; a < m; ++a) {
                double sum = 0.0;
                for (int b = 0; b < n; ++b)
                    for (int c = 0; c < n; ++c) sum += rf.at(b, r, c, a) * v(b) * v(c);
                jac(r, a) = sum;
            }

        // Rotation forcing: R(c, D, A, B) v_c U_D on top of the commutator.
        Eigen::MatrixXd rot(m, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                double sum = 0.0;
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < m; ++d) sum += rf.at(c, d, a, b) * v(c) * uvec(d);
                rot(a, b) = sum;
            }

        Eigen::VectorXd udd = 2.0 * om * uprime + omega_of(pt) * uvec - om * (om * uvec)
                              + jac * uvec + vutext + xrot.transpose() * vtext;
        udd.head(n) -= (xrot * qext).head(n);
        udd.tail(s) += (xrot.transpose() * qext).tail(s) + qu;

        const Eigen::MatrixXd xdot = omega_of(pu) + om * xrot - xrot * om + rot;

        Eigen::VectorXd dy(2 * m + m * m);
        dy.head(m) = uprime;
        dy.segment(m, m) = udd;
        pack_rows(xdot, 2 * m, dy);
        return dy;
    };

    const double t0 = setup.center->t0();
    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(sys.dim);
    const Eigen::MatrixXd x0 = dev_rotation_init(setup, n, s);
    if (setup.on_submanifold) y0(0) = setup.theta;
    Eigen::VectorXd vext0 = Eigen::VectorXd::Zero(m);
    vext0.head(n) = setup.center->coefficients(t0);
    Eigen::VectorXd vu0 = Eigen::VectorXd::Zero(m);
    vu0.head(n) = du_coefficients(setup, t0, opt.du);
    y0.segment(m, m) = omega_of(p_matrix(*setup.center, t0)) * y0.head(m) + vu0 - x0 * vext0;
    pack_rows(x0, 2 * m, y0);

    IntegrateOptions io;
    io.step = options.step;
    io.breakpoints = setup.center->breakpoints();
    GVariationResult result;
    result.n = n;
    result.s = s;
    result.center = std::move(center);
    result.trajectory = rk4_integrate(sys, t0, setup.center->t1(), std::move(y0), io);
    for (int i = 0; i < result.trajectory.knot_count(); ++i) {
        const Eigen::MatrixXd a = unpack_rows(result.trajectory.state(i), 2 * m, m, m);
        result.antisymmetry_defect =
            std::max(result.antisymmetry_defect, max_abs(a + a.transpose()));
    }
    return result;
}

double AnsatzReport::max_defect() const
{
    return std::max({max_u_alpha, max_u_diff, max_xab_diff, max_xalphabeta_diff, max_xaalpha_diff});
}

AnsatzReport verify_ansatz(const BaseVariationResult& base, const GVariationResult& dev)
{
    const int n = base.n;
    const int s = base.s;
    const int m = n + s;
    if (dev.n != n || dev.s != s)
        throw ValidationError("ansatz comparison needs matching base and development runs");
    if (base.trajectory.t0() != dev.trajectory.t0() || base.trajectory.t1() != dev.trajectory.t1())
        throw ValidationError("ansatz comparison needs runs over one parameter range");

    AnsatzReport rep;
    for (int i = 0; i < dev.trajectory.knot_count(); ++i) {
        const double t = dev.trajectory.times()[static_cast<std::size_t>(i)];
        const Eigen::VectorXd& yg = dev.trajectory.state(i);
        const Eigen::VectorXd ug = yg.head(m);
        const Eigen::MatrixXd xg = unpack_rows(yg, 2 * m, m, m);
        const Eigen::VectorXd ub = base.u_at(t);
        rep.max_u_diff = std::max(rep.max_u_diff, max_abs(ug.head(n) - ub));
        rep.max_xab_diff = std::max(
            rep.max_xab_diff, max_abs(xg.topLeftCorner(n, n) - base.tangent_rotation_at(t)));
        if (s > 0) {
            rep.max_u_alpha = std::max(rep.max_u_alpha, max_abs(ug.tail(s)));
            rep.max_xalphabeta_diff =
                std::max(rep.max_xalphabeta_diff,
                         max_abs(xg.bottomRightCorner(s, s) - base.bundle_rotation_at(t)));
            const std::vector<Eigen::MatrixXd> hf = base.center->h_in_frame(t);
            Eigen::MatrixXd mixed(n, s);
            for (int al = 0; al < s; ++al) mixed.col(al) = hf[static_cast<std::size_t>(al)] * ub;
            rep.max_xaalpha_diff =
                std::max(rep.max_xaalpha_diff, max_abs(xg.topRightCorner(n, s) - mixed));
        }
    }
    return rep;
}

AnsatzReport verify_ansatz(const Problem& prob, const CurveFamily& family, double u,
                           const VariationOptions& options)
{
    const BaseVariationResult base = integrate_base_variation(prob, family, u, options);
    const GVariationResult dev = integrate_gvariation(prob, family, u, options);
    return verify_ansatz(base, dev);
}

} // namespace devmap
