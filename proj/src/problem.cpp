#include "devmap/problem.hpp"

#include "devmap/rng.hpp"
#include "devmap/transport.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace devmap {

namespace {

constexpr double kPhiTol = 1e-12;        // point seed isometry defect
constexpr double kPsiMetricTol = 1e-10;  // psi fiberwise isometry defect
constexpr double kPsiVelocityTol = 1e-8; // psi consistency with the embeddings
constexpr double kPsiCompatTol = 1e-8;   // second-fundamental-form compatibility

Eigen::MatrixXd block_diag(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    if (a.size() > 0) out.topLeftCorner(a.rows(), a.cols()) = a;
    if (b.size() > 0) out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

// acc_c += Gamma^c_{ab} v_a v_b
void add_quadratic_connection(const std::vector<Eigen::MatrixXd>& gamma,
                              const Eigen::VectorXd& v, Eigen::VectorXd& acc)
{
    for (int c = 0; c < acc.size(); ++c)
        acc[c] += v.dot(gamma[static_cast<std::size_t>(c)] * v);
}

} // namespace

Problem::Problem(MetricField base, BundleSpec bundle, SecondFundamentalField h,
                 AmbientSpec ambient, PointSeed seed)
    : base_(std::move(base)), bundle_(std::move(bundle)), h_(std::move(h)),
      ambient_(std::move(ambient)), seed_(std::move(seed))
{
    validate_shapes();
    validate_point_seed();
}

Problem::Problem(MetricField base, BundleSpec bundle, SecondFundamentalField h,
                 AmbientSpec ambient, SubmanifoldSeed seed)
    : base_(std::move(base)), bundle_(std::move(bundle)), h_(std::move(h)),
      ambient_(std::move(ambient)), seed_(std::move(seed))
{
    validate_shapes();
    validate_submanifold_seed();
}

const PointSeed& Problem::point_seed() const
{
    if (const auto* ps = std::get_if<PointSeed>(&seed_)) return *ps;
    throw ValidationError("problem is seeded on a submanifold, not at a point");
}

const SubmanifoldSeed& Problem::submanifold_seed() const
{
    if (const auto* ss = std::get_if<SubmanifoldSeed>(&seed_)) return *ss;
    throw ValidationError("problem is seeded at a point, not on a submanifold");
}

void Problem::validate_shapes() const
{
    if (bundle_.base_dim() != n())
        throw ValidationError("bundle base dimension does not match the base metric");
    if (h_.base_dim() != n() || h_.rank() != s())
        throw ValidationError("second fundamental form shape does not match base and bundle");
    if (ambient_dim() < n() + s())
        throw ValidationError("ambient dimension must be at least n + s");
}

void Problem::validate_point_seed() const
{
    const auto& ps = std::get<PointSeed>(seed_);
    if (ps.p.size() != n()) throw ValidationError("seed point has wrong base dimension");
    if (ps.p_tilde.size() != ambient_dim())
        throw ValidationError("seed target point has wrong ambient dimension");
    if (ps.phi.rows() != ambient_dim() || ps.phi.cols() != n() + s())
        throw ValidationError("phi must be ambient_dim x (n+s)");

    try {
        const Eigen::MatrixXd product =
            block_diag(base_.eval(ps.p),
                       s() > 0 ? bundle_.fiber_metric(ps.p) : Eigen::MatrixXd(0, 0));
        const Eigen::MatrixXd gt = ambient_.eval(ps.p_tilde);
        const double defect =
            (ps.phi.transpose() * gt * ps.phi - product).cwiseAbs().maxCoeff();
        if (!(defect <= kPhiTol))
            throw ValidationError("phi is not an isometry: gram defect "
                                  + std::to_string(defect));
    } catch (const EvalError& e) {
        throw ValidationError(std::string("seed data not evaluable: ") + e.what());
    }
}

void Problem::validate_submanifold_seed() const
{
    const auto& ss = std::get<SubmanifoldSeed>(seed_);
    if (!ss.embedding.valid() || !ss.ambient_embedding.valid())
        throw ValidationError("submanifold seed needs both embedding curves");
    if (ss.embedding.dim() != n())
        throw ValidationError("submanifold embedding has wrong base dimension");
    if (ss.ambient_embedding.dim() != ambient_dim())
        throw ValidationError("submanifold image has wrong ambient dimension");
    if (ss.embedding.t0() != ss.ambient_embedding.t0()
        || ss.embedding.t1() != ss.ambient_embedding.t1())
        throw ValidationError("submanifold embeddings must share one parameter range");

    const int cols = n() + s();
    if (static_cast<int>(ss.psi.size()) != ambient_dim() * cols)
        throw ValidationError("psi needs ambient_dim x (n+s) fields");
    for (const auto& f : ss.psi)
        if (!f.valid() || f.dim() != 1)
            throw ValidationError("psi entries must be fields of the single parameter");
    if (!ss.sigma.empty()) {
        if (static_cast<int>(ss.sigma.size()) != n() - 1)
            throw ValidationError("sigma override needs n-1 fields");
        for (const auto& f : ss.sigma)
            if (!f.valid() || f.dim() != 1)
                throw ValidationError("sigma entries must be fields of the single parameter");
    }

    const double u0 = ss.embedding.t0();
    const double u1 = ss.embedding.t1();
    std::vector<double> samples{0.5 * (u0 + u1), u0 + 0.25 * (u1 - u0), u0 + 0.75 * (u1 - u0)};
    Pcg32 rng(0x9e3779b97f4a7c15ULL, 43);
    for (int k = 0; k < 4; ++k) samples.push_back(rng.uniform(u0, u1));

    int evaluated = 0;
    for (double u : samples) {
        try {
            const Eigen::VectorXd x = ss.embedding.position(u);
            const Eigen::VectorXd xt = ss.ambient_embedding.position(u);
            const Eigen::MatrixXd g = base_.eval(x);
            const Eigen::MatrixXd gt = ambient_.eval(xt);
            const Eigen::MatrixXd psi = psi_matrix(u);

            const Eigen::MatrixXd product = block_diag(
                g, s() > 0 ? bundle_.fiber_metric(x) : Eigen::MatrixXd(0, 0));
            const double mdef =
                (psi.transpose() * gt * psi - product).cwiseAbs().maxCoeff();
            if (!(mdef <= kPsiMetricTol))
                throw ValidationError("psi is not a fiberwise isometry at u="
                                      + std::to_string(u) + ": gram defect "
                                      + std::to_string(mdef));

            const Eigen::VectorXd sp = ss.embedding.velocity(u);
            Eigen::VectorXd zeta = Eigen::VectorXd::Zero(cols);
            zeta.head(n()) = sp;
            const double vdef =
                (psi * zeta - ss.ambient_embedding.velocity(u)).cwiseAbs().maxCoeff();
            if (!(vdef <= kPsiVelocityTol))
                throw ValidationError(
                    "psi does not map the submanifold velocity to the image velocity at u="
                    + std::to_string(u) + ": defect " + std::to_string(vdef));

            const double c2 = sp.dot(g * sp);
            if (!(c2 > 0.0))
                throw ValidationError("seed submanifold velocity degenerates at u="
                                      + std::to_string(u));

            // Base-side normal curvature vector sigma + h, contracted with the
            // unit tangent twice, expressed in chart components of T + V.
            const Eigen::MatrixXd e = gram_schmidt_frame(g, sp);
            const Eigen::VectorXd sig = submanifold_sigma(u);
            Eigen::VectorXd input = Eigen::VectorXd::Zero(cols);
            for (int mu = 0; mu + 1 < n(); ++mu) input.head(n()) += sig[mu] * e.col(mu + 1);
            const auto hx = h_.eval(x);
            for (int alpha = 0; alpha < s(); ++alpha)
                input[n() + alpha] = sp.dot(hx[static_cast<std::size_t>(alpha)] * sp) / c2;
            const Eigen::VectorXd lhs = psi * input;

            // Ambient-side normal curvature of the image curve for the same
            // unit tangent.
            const Eigen::VectorXd spt = ss.ambient_embedding.velocity(u);
            Eigen::VectorXd acct = ss.ambient_embedding.acceleration(u);
            add_quadratic_connection(christoffel(ambient_, xt), spt, acct);
            const double tt = spt.dot(gt * spt);
            const Eigen::VectorXd normal_part = acct - (acct.dot(gt * spt) / tt) * spt;
            const Eigen::VectorXd rhs = normal_part / c2;

            const double cdef = (lhs - rhs).cwiseAbs().maxCoeff();
            if (!(cdef <= kPsiCompatTol))
                throw ValidationError(
                    "second fundamental forms are incompatible along the seed at u="
                    + std::to_string(u) + ": defect " + std::to_string(cdef));
            ++evaluated;
        } catch (const EvalError&) {
            continue; // sample outside an evaluable region; try the next one
        }
    }
    if (evaluated == 0)
        throw ValidationError(
            "submanifold seed could not be evaluated at any sample parameter");
}

SeedFrames Problem::seed_frames() const
{
    const PointSeed& ps = point_seed();
    SeedFrames out;
    out.p = ps.p;
    out.p_tilde = ps.p_tilde;
    out.base_tangent = gram_schmidt_frame(base_.eval(ps.p), Eigen::MatrixXd(n(), 0));
    out.base_bundle = s() > 0 ? gram_schmidt_frame(bundle_.fiber_metric(ps.p),
                                                   Eigen::MatrixXd(s(), 0))
                              : Eigen::MatrixXd(0, 0);
    out.ambient_frame = ps.phi * block_diag(out.base_tangent, out.base_bundle);
    return out;
}

SeedFrames Problem::seed_frames_at(double u) const
{
    const SubmanifoldSeed& ss = submanifold_seed();
    SeedFrames out;
    out.p = ss.embedding.position(u);
    out.p_tilde = ss.ambient_embedding.position(u);
    out.base_tangent = gram_schmidt_frame(base_.eval(out.p), ss.embedding.velocity(u));
    out.base_bundle = s() > 0 ? gram_schmidt_frame(bundle_.fiber_metric(out.p),
                                                   Eigen::MatrixXd(s(), 0))
                              : Eigen::MatrixXd(0, 0);
    out.ambient_frame = psi_matrix(u) * block_diag(out.base_tangent, out.base_bundle);
    return out;
}

Eigen::MatrixXd Problem::psi_matrix(double u) const
{
    const SubmanifoldSeed& ss = submanifold_seed();
    const std::vector<double> pt{u};
    const int cols = n() + s();
    Eigen::MatrixXd m(ambient_dim(), cols);
    for (int r = 0; r < ambient_dim(); ++r)
        for (int c = 0; c < cols; ++c)
            m(r, c) = ss.psi[static_cast<std::size_t>(r * cols + c)].eval(pt);
    return m;
}

double Problem::submanifold_speed(double u) const
{
    const SubmanifoldSeed& ss = submanifold_seed();
    const Eigen::VectorXd sp = ss.embedding.velocity(u);
    return std::sqrt(sp.dot(base_.eval(ss.embedding.position(u)) * sp));
}

Eigen::VectorXd Problem::submanifold_sigma(double u) const
{
    const SubmanifoldSeed& ss = submanifold_seed();
    if (!ss.sigma.empty()) {
        const std::vector<double> pt{u};
        Eigen::VectorXd sig(n() - 1);
        for (int mu = 0; mu + 1 < n(); ++mu)
            sig[mu] = ss.sigma[static_cast<std::size_t>(mu)].eval(pt);
        return sig;
    }
    return derived_sigma(u);
}

Eigen::VectorXd Problem::derived_sigma(double u) const
{
    const SubmanifoldSeed& ss = submanifold_seed();
    const Eigen::VectorXd x = ss.embedding.position(u);
    const Eigen::VectorXd sp = ss.embedding.velocity(u);
    const Eigen::MatrixXd g = base_.eval(x);
    const double c2 = sp.dot(g * sp);
    if (!(c2 > 0.0))
        throw ValidationError("seed submanifold velocity degenerates at u="
                              + std::to_string(u));

    Eigen::VectorXd acc = ss.embedding.acceleration(u);
    add_quadratic_connection(christoffel(base_, x), sp, acc);

    const Eigen::MatrixXd e = gram_schmidt_frame(g, sp);
    Eigen::VectorXd sig(n() - 1);
    for (int mu = 0; mu + 1 < n(); ++mu) sig[mu] = e.col(mu + 1).dot(g * acc) / c2;
    return sig;
}

} // namespace devmap
