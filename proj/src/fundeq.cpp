#include "devmap/fundeq.hpp"

#include "devmap/io.hpp"

#include <Eigen/LU>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace devmap {

namespace {

constexpr double kStartTol = 1e-8;  // curve start vs seed point
constexpr double kReframeTol = 1e-9; // orthogonality of reframing rotations

Eigen::MatrixXd block_diag(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    if (a.size() > 0) out.topLeftCorner(a.rows(), a.cols()) = a;
    if (b.size() > 0) out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

double orthogonality_defect(const Eigen::MatrixXd& q)
{
    if (q.size() == 0) return 0.0;
    return (q.transpose() * q - Eigen::MatrixXd::Identity(q.cols(), q.cols()))
        .cwiseAbs()
        .maxCoeff();
}

} // namespace

Eigen::MatrixXd weingarten(const MetricField& base, const BundleSpec& bundle,
                           const SecondFundamentalField& h, const Eigen::VectorXd& xi,
                           const Eigen::VectorXd& x)
{
    const int n = base.dim();
    const int s = bundle.rank();
    if (bundle.base_dim() != n || h.base_dim() != n || h.rank() != s)
        throw ValidationError("weingarten inputs have mismatched shapes");
    if (xi.size() != s) throw ValidationError("fiber vector has wrong rank");
    if (x.size() != n) throw ValidationError("base point has wrong dimension");

    Eigen::MatrixXd lowered = Eigen::MatrixXd::Zero(n, n);
    if (s > 0) {
        const Eigen::VectorXd fxi = bundle.fiber_metric(x) * xi;
        const auto hx = h.eval(x);
        for (int alpha = 0; alpha < s; ++alpha)
            lowered += fxi[alpha] * hx[static_cast<std::size_t>(alpha)];
    }
    return base.eval(x).partialPivLu().solve(lowered);
}

Eigen::MatrixXd TauMap::chart_matrix() const
{
    const auto n = frame_tangent.cols();
    const auto s = frame_bundle.cols();
    Eigen::MatrixXd out(map.rows(), n + s);
    if (n > 0) out.leftCols(n) = map.leftCols(n) * frame_tangent.inverse();
    if (s > 0) out.rightCols(s) = map.rightCols(s) * frame_bundle.inverse();
    return out;
}

Eigen::VectorXd TauMap::apply(const Eigen::VectorXd& w) const
{
    if (w.size() != map.cols())
        throw ValidationError("frame map applied to a vector of wrong dimension");
    return chart_matrix() * w;
}

TauMap TauMap::reframed(const Eigen::MatrixXd& qt, const Eigen::MatrixXd& qv) const
{
    if (qt.rows() != frame_tangent.cols() || qt.cols() != qt.rows()
        || qv.rows() != frame_bundle.cols() || qv.cols() != qv.rows())
        throw ValidationError("reframing rotations have wrong shapes");
    if (orthogonality_defect(qt) > kReframeTol || orthogonality_defect(qv) > kReframeTol)
        throw ValidationError("reframing requires orthogonal matrices");

    TauMap out = *this;
    out.frame_tangent = frame_tangent * qt;
    out.frame_bundle = frame_bundle * qv;
    out.map = map * block_diag(qt, qv);
    return out;
}

CurveDevelopment develop_curve(const Problem& prob, const Curve& gamma,
                               const SeedFrames& start, double step)
{
    if (!gamma.valid()) throw ValidationError("development needs a curve");
    if (gamma.dim() != prob.n())
        throw ValidationError("curve dimension does not match the base chart");
    const double defect =
        (gamma.position(gamma.t0()) - start.p).cwiseAbs().maxCoeff();
    if (!(defect <= kStartTol))
        throw ValidationError("curve does not start at the seed point: offset "
                              + std::to_string(defect));

    auto transport = std::make_shared<const BaseTransport>(
        prob.base(), prob.bundle(), prob.h(), gamma,
        FrameSeed{start.base_tangent, start.base_bundle}, step);
    DevelopOptions options;
    options.step = step;
    DevelopmentResult dev =
        generalized_develop(prob.ambient(), coefficients_closure(transport),
                            start.p_tilde, start.ambient_frame, options);
    return CurveDevelopment{std::move(transport), std::move(dev)};
}

CurveDevelopment develop_curve(const Problem& prob, const Curve& gamma, double step)
{
    if (!prob.point_seeded())
        throw ValidationError(
            "problem is seeded on a submanifold; supply explicit start frames");
    return develop_curve(prob, gamma, prob.seed_frames(), step);
}

TauMap tau_at(const Problem& prob, const CurveDevelopment& dev, double t)
{
    const BaseTransport& bt = *dev.transport;
    TauMap tau;
    tau.x = bt.curve().position(t);
    tau.target = dev.development.point_at(t);
    tau.map = dev.development.frame_at(t);
    tau.frame_tangent = bt.tangent_frame(t);
    tau.frame_bundle = bt.bundle_frame(t);

    const Eigen::MatrixXd gram =
        tau.map.transpose() * prob.ambient().eval(tau.target) * tau.map;
    tau.gram_defect =
        (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    return tau;
}

TauMap tau_gamma(const Problem& prob, const Curve& gamma, double step)
{
    const CurveDevelopment dev = develop_curve(prob, gamma, step);
    return tau_at(prob, dev, gamma.t1());
}

CurvatureValue pull_back_curvature(const CurvatureValue& src, const Eigen::MatrixXd& phi)
{
    const int big = static_cast<int>(phi.rows());
    const int m = static_cast<int>(phi.cols());
    for (int slot = 0; slot < 4; ++slot)
        if (src.dims[static_cast<std::size_t>(slot)] != big)
            throw ValidationError("curvature tensor does not match the pull-back map");

    // Contract one slot at a time.
    CurvatureValue t0(m, big, big, big);
    for (int a = 0; a < m; ++a)
        for (int q = 0; q < big; ++q)
            for (int r = 0; r < big; ++r)
                for (int w = 0; w < big; ++w) {
                    double acc = 0.0;
                    for (int p = 0; p < big; ++p) acc += src.at(p, q, r, w) * phi(p, a);
                    t0.at(a, q, r, w) = acc;
                }
    CurvatureValue t1(m, m, big, big);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int r = 0; r < big; ++r)
                for (int w = 0; w < big; ++w) {
                    double acc = 0.0;
                    for (int q = 0; q < big; ++q) acc += t0.at(a, q, r, w) * phi(q, b);
                    t1.at(a, b, r, w) = acc;
                }
    CurvatureValue t2(m, m, m, big);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int w = 0; w < big; ++w) {
                    double acc = 0.0;
                    for (int r = 0; r < big; ++r) acc += t1.at(a, b, r, w) * phi(r, c);
                    t2.at(a, b, c, w) = acc;
                }
    CurvatureValue out(m, m, m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d) {
                    double acc = 0.0;
                    for (int w = 0; w < big; ++w) acc += t2.at(a, b, c, w) * phi(w, d);
                    out.at(a, b, c, d) = acc;
                }
    return out;
}

ResidualReport compatibility_residuals(const Problem& prob, const TauMap& tau)
{
    const int n = prob.n();
    const int s = prob.s();
    if (tau.x.size() != n || tau.target.size() != prob.ambient_dim()
        || tau.map.cols() != n + s)
        throw ValidationError("frame map does not match the problem shapes");

    const Eigen::VectorXd& x = tau.x;
    const Eigen::MatrixXd g = prob.base().eval(x);
    const std::vector<Eigen::MatrixXd> gamma = christoffel(prob.base(), x);
    const CurvatureValue curv = riemann_curvature(prob.base(), x);
    const CurvatureValue pulled = pull_back_curvature(
        riemann_curvature(prob.ambient(), tau.target), tau.chart_matrix());

    const Eigen::MatrixXd frak =
        s > 0 ? prob.bundle().fiber_metric(x) : Eigen::MatrixXd(0, 0);
    const std::vector<Eigen::MatrixXd> hx =
        s > 0 ? prob.h().eval(x) : std::vector<Eigen::MatrixXd>{};

    // hw[alpha] = frak_{alpha beta} h^beta, so that
    // <h(X,Y), h(Z,W)> = sum_alpha hx[alpha](X,Y) hw[alpha](Z,W).
    std::vector<Eigen::MatrixXd> hw(static_cast<std::size_t>(s));
    for (int alpha = 0; alpha < s; ++alpha) {
        hw[static_cast<std::size_t>(alpha)] = Eigen::MatrixXd::Zero(n, n);
        for (int beta = 0; beta < s; ++beta)
            hw[static_cast<std::size_t>(alpha)] +=
                frak(alpha, beta) * hx[static_cast<std::size_t>(beta)];
    }
    const auto hdot = [&](int p, int q, int r, int w) {
        double acc = 0.0;
        for (int alpha = 0; alpha < s; ++alpha)
            acc += hx[static_cast<std::size_t>(alpha)](p, q)
                   * hw[static_cast<std::size_t>(alpha)](r, w);
        return acc;
    };

    ResidualReport report;
    report.point = x;

    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    const double rhs =
                        pulled.at(a, b, c, d) + hdot(a, d, b, c) - hdot(a, c, b, d);
                    report.gauss = std::max(report.gauss,
                                            std::abs(curv.at(a, b, c, d) - rhs));
                }

    if (s == 0) return report;

    // Covariant derivative of h: dh[c][alpha](a,b) = (D_{e_c} h)^alpha_{ab}.
    std::vector<std::vector<Eigen::MatrixXd>> dh(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        const std::vector<Eigen::MatrixXd> hpart = prob.h().partial(c, x);
        const Eigen::MatrixXd wc = prob.bundle().connection(c, x);
        Eigen::MatrixXd gc(n, n); // gc(a,d) = Gamma^d_{ca}
        for (int a = 0; a < n; ++a)
            for (int d = 0; d < n; ++d)
                gc(a, d) = gamma[static_cast<std::size_t>(d)](c, a);
        auto& slot = dh[static_cast<std::size_t>(c)];
        slot.resize(static_cast<std::size_t>(s));
        for (int alpha = 0; alpha < s; ++alpha) {
            Eigen::MatrixXd m = hpart[static_cast<std::size_t>(alpha)];
            for (int beta = 0; beta < s; ++beta)
                m += wc(alpha, beta) * hx[static_cast<std::size_t>(beta)];
            m -= gc * hx[static_cast<std::size_t>(alpha)];
            m -= hx[static_cast<std::size_t>(alpha)] * gc.transpose();
            slot[static_cast<std::size_t>(alpha)] = std::move(m);
        }
    }

    for (int beta = 0; beta < s; ++beta)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    double lhs = 0.0;
                    for (int alpha = 0; alpha < s; ++alpha)
                        lhs += frak(alpha, beta)
                               * (dh[static_cast<std::size_t>(a)]
                                    [static_cast<std::size_t>(alpha)](b, c)
                                  - dh[static_cast<std::size_t>(b)]
                                      [static_cast<std::size_t>(alpha)](a, c));
                    const double rhs = pulled.at(c, n + beta, a, b);
                    report.codazzi = std::max(report.codazzi, std::abs(lhs - rhs));
                }

    const CurvatureValue rv = bundle_curvature(prob.bundle(), x);
    // shape[alpha] = A for the chart fiber basis vector epsilon_alpha;
    // pair(alpha,beta) = shape[alpha]^T g shape[beta], so
    // <A_alpha Y, A_beta X>_g = pair(alpha,beta)(Y index, X index).
    std::vector<Eigen::MatrixXd> shape(static_cast<std::size_t>(s));
    const Eigen::PartialPivLU<Eigen::MatrixXd> glu(g);
    for (int alpha = 0; alpha < s; ++alpha)
        shape[static_cast<std::size_t>(alpha)] =
            glu.solve(hw[static_cast<std::size_t>(alpha)]);
    for (int alpha = 0; alpha < s; ++alpha)
        for (int beta = 0; beta < s; ++beta) {
            const Eigen::MatrixXd pair = shape[static_cast<std::size_t>(alpha)].transpose()
                                         * g * shape[static_cast<std::size_t>(beta)];
            const Eigen::MatrixXd pair_rev = pair.transpose(); // <A_beta Y, A_alpha X>
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    const double rhs =
                        pulled.at(n + alpha, n + beta, a, b) + pair(b, a) - pair_rev(b, a);
                    report.ricci =
                        std::max(report.ricci, std::abs(rv.at(alpha, beta, a, b) - rhs));
                }
        }

    return report;
}

std::string to_json(const ResidualReport& report)
{
    return json_object({{"curve_id", std::to_string(report.curve_id)},
                        {"point", json_vector(report.point)},
                        {"gauss", json_number(report.gauss)},
                        {"codazzi", json_number(report.codazzi)},
                        {"ricci", json_number(report.ricci)}});
}

} // namespace devmap
