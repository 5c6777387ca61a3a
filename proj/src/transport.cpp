#include "devmap/transport.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <utility>

namespace devmap {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// (Gamma(w))(c, b) = sum_d Gamma^c_{db} w_d; multiplies tangent vectors.
Eigen::MatrixXd christoffel_contraction(const std::vector<Eigen::MatrixXd>& gamma,
                                        const Eigen::VectorXd& w)
{
    const int n = static_cast<int>(gamma.size());
    Eigen::MatrixXd m(n, n);
    for (int c = 0; c < n; ++c) m.row(c) = (gamma[static_cast<std::size_t>(c)] * w).transpose();
    return m;
}

Eigen::MatrixXd connection_contraction(const BundleSpec& bundle, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& w)
{
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(bundle.rank(), bundle.rank());
    for (int a = 0; a < bundle.base_dim(); ++a)
        if (w[a] != 0.0) m += w[a] * bundle.connection(a, x);
    return m;
}

} // namespace

void check_orthonormal(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& frame,
                       const std::string& what, double tol)
{
    if (frame.cols() == 0) return;
    const Eigen::MatrixXd defect =
        frame.transpose() * gram * frame
        - Eigen::MatrixXd::Identity(frame.cols(), frame.cols());
    const double worst = defect.cwiseAbs().maxCoeff();
    if (!(worst <= tol))
        throw ValidationError(what + " is not orthonormal: gram defect "
                              + std::to_string(worst));
}

Eigen::MatrixXd gram_schmidt_frame(const Eigen::MatrixXd& gram,
                                   const Eigen::MatrixXd& seed_columns)
{
    const int n = static_cast<int>(gram.rows());
    if (seed_columns.rows() != n && seed_columns.size() != 0)
        throw ValidationError("seed columns have wrong dimension");

    Eigen::MatrixXd frame(n, n);
    int have = 0;
    auto try_add = [&](Eigen::VectorXd u, bool required) {
        for (int j = 0; j < have; ++j) u -= (frame.col(j).dot(gram * u)) * frame.col(j);
        const double norm2 = u.dot(gram * u);
        if (norm2 < 1e-20) {
            if (required)
                throw ValidationError("frame seed columns are linearly dependent");
            return;
        }
        frame.col(have++) = u / std::sqrt(norm2);
    };

    for (Eigen::Index j = 0; j < seed_columns.cols(); ++j) try_add(seed_columns.col(j), true);
    for (int i = 0; i < n && have < n; ++i)
        try_add(Eigen::VectorXd::Unit(n, i), false);
    if (have < n) throw ValidationError("could not complete an orthonormal frame");
    return frame;
}

namespace {

OdeSystem parallel_transport_system(const MetricField& metric, const Curve& gamma)
{
    return {metric.dim(), [&metric, &gamma](double t, const Eigen::VectorXd& y) {
                const Eigen::VectorXd x = gamma.position(t);
                const Eigen::VectorXd w = gamma.velocity(t);
                const auto gm = christoffel(metric, x);
                return Eigen::VectorXd(-christoffel_contraction(gm, w) * y);
            }};
}

OdeSystem bundle_transport_system(const BundleSpec& bundle, const Curve& gamma)
{
    return {bundle.rank(), [&bundle, &gamma](double t, const Eigen::VectorXd& y) {
                const Eigen::VectorXd x = gamma.position(t);
                const Eigen::VectorXd w = gamma.velocity(t);
                return Eigen::VectorXd(-connection_contraction(bundle, x, w) * y);
            }};
}

// Runs a transport system over [from, to] in either direction; a descending
// range is handled by integrating along the reversed curve.
Eigen::VectorXd directed_transport(const Curve& gamma,
                                   const std::function<OdeSystem(const Curve&)>& make_system,
                                   const Eigen::VectorXd& v0, double from, double to,
                                   double step)
{
    if (from == to) return v0;
    if (from < to) {
        const OdeSystem sys = make_system(gamma);
        IntegrateOptions opt;
        opt.step = step;
        opt.breakpoints = gamma.knots();
        const Trajectory traj = rk4_integrate(sys, from, to, v0, opt);
        return traj.eval(to);
    }
    const Curve rev = gamma.reversed();
    const double flip = gamma.t0() + gamma.t1();
    const OdeSystem sys = make_system(rev);
    IntegrateOptions opt;
    opt.step = step;
    opt.breakpoints = rev.knots();
    const Trajectory traj = rk4_integrate(sys, flip - from, flip - to, v0, opt);
    return traj.eval(flip - to);
}

} // namespace

Trajectory parallel_transport(const MetricField& metric, const Curve& gamma,
                              const Eigen::VectorXd& v0, double step)
{
    const int n = metric.dim();
    if (gamma.dim() != n) throw ValidationError("curve dimension does not match the metric");
    if (v0.size() != n) throw ValidationError("transported vector has wrong dimension");

    IntegrateOptions opt;
    opt.step = step;
    opt.breakpoints = gamma.knots();
    return rk4_integrate(parallel_transport_system(metric, gamma), gamma.t0(), gamma.t1(), v0,
                         opt);
}

Trajectory bundle_transport(const BundleSpec& bundle, const Curve& gamma,
                            const Eigen::VectorXd& xi0, double step)
{
    if (gamma.dim() != bundle.base_dim())
        throw ValidationError("curve dimension does not match the bundle base");
    if (xi0.size() != bundle.rank())
        throw ValidationError("transported fiber vector has wrong dimension");

    IntegrateOptions opt;
    opt.step = step;
    opt.breakpoints = gamma.knots();
    return rk4_integrate(bundle_transport_system(bundle, gamma), gamma.t0(), gamma.t1(), xi0,
                         opt);
}

Eigen::VectorXd parallel_transport(const MetricField& metric, const Curve& gamma,
                                   const Eigen::VectorXd& v0, double from, double to,
                                   double step)
{
    const int n = metric.dim();
    if (gamma.dim() != n) throw ValidationError("curve dimension does not match the metric");
    if (v0.size() != n) throw ValidationError("transported vector has wrong dimension");
    return directed_transport(
        gamma, [&metric](const Curve& c) { return parallel_transport_system(metric, c); }, v0,
        from, to, step);
}

Eigen::VectorXd bundle_transport(const BundleSpec& bundle, const Curve& gamma,
                                 const Eigen::VectorXd& xi0, double from, double to,
                                 double step)
{
    if (gamma.dim() != bundle.base_dim())
        throw ValidationError("curve dimension does not match the bundle base");
    if (xi0.size() != bundle.rank())
        throw ValidationError("transported fiber vector has wrong dimension");
    return directed_transport(
        gamma, [&bundle](const Curve& c) { return bundle_transport_system(bundle, c); }, xi0,
        from, to, step);
}

BaseTransport::BaseTransport(MetricField metric, BundleSpec bundle, SecondFundamentalField h,
                             Curve gamma, FrameSeed seed, double step)
    : metric_(std::move(metric)), bundle_(std::move(bundle)), h_(std::move(h)),
      gamma_(std::move(gamma)), seed_(std::move(seed)), n_(metric_.dim()), s_(bundle_.rank())
{
    if (gamma_.dim() != n_) throw ValidationError("curve dimension does not match the metric");
    if (bundle_.base_dim() != n_)
        throw ValidationError("bundle base dimension does not match the metric");
    if (h_.base_dim() != n_ || h_.rank() != s_)
        throw ValidationError("second fundamental form shape does not match metric and bundle");
    if (seed_.tangent.rows() != n_ || seed_.tangent.cols() != n_)
        throw ValidationError("tangent seed frame must be square of the base dimension");
    if (seed_.bundle.rows() != s_ || seed_.bundle.cols() != s_)
        throw ValidationError("bundle seed frame must be square of the bundle rank");

    const Eigen::VectorXd x0 = gamma_.position(gamma_.t0());
    check_orthonormal(metric_.eval(x0), seed_.tangent, "tangent seed frame", 1e-8);
    if (s_ > 0)
        check_orthonormal(bundle_.fiber_metric(x0), seed_.bundle, "bundle seed frame", 1e-8);

    const int nn = n_ * n_;
    const int ss = s_ * s_;
    Eigen::VectorXd y0(nn + ss);
    Eigen::Map<Eigen::MatrixXd>(y0.data(), n_, n_) = seed_.tangent;
    if (s_ > 0) Eigen::Map<Eigen::MatrixXd>(y0.data() + nn, s_, s_) = seed_.bundle;

    OdeSystem sys{nn + ss, [this](double t, const Eigen::VectorXd& y) {
                      const Eigen::VectorXd x = gamma_.position(t);
                      const Eigen::VectorXd w = gamma_.velocity(t);
                      const auto gm = christoffel(metric_, x);
                      const Eigen::MatrixXd gw = christoffel_contraction(gm, w);
                      Eigen::VectorXd dy(y.size());
                      const int nn2 = n_ * n_;
                      Eigen::Map<Eigen::MatrixXd>(dy.data(), n_, n_) =
                          -gw * Eigen::Map<const Eigen::MatrixXd>(y.data(), n_, n_);
                      if (s_ > 0) {
                          const Eigen::MatrixXd ws = connection_contraction(bundle_, x, w);
                          Eigen::Map<Eigen::MatrixXd>(dy.data() + nn2, s_, s_) =
                              -ws * Eigen::Map<const Eigen::MatrixXd>(y.data() + nn2, s_, s_);
                      }
                      return dy;
                  }};
    IntegrateOptions opt;
    opt.step = step;
    opt.breakpoints = gamma_.knots();
    traj_ = rk4_integrate(sys, gamma_.t0(), gamma_.t1(), y0, opt);
}

Eigen::MatrixXd BaseTransport::tangent_frame(double t) const
{
    const Eigen::VectorXd y = traj_.eval(t);
    return Eigen::Map<const Eigen::MatrixXd>(y.data(), n_, n_);
}

Eigen::MatrixXd BaseTransport::bundle_frame(double t) const
{
    const Eigen::VectorXd y = traj_.eval(t);
    return Eigen::Map<const Eigen::MatrixXd>(y.data() + n_ * n_, s_, s_);
}

Eigen::VectorXd BaseTransport::coefficients(double t) const
{
    return tangent_frame(t).partialPivLu().solve(gamma_.velocity(t));
}

Eigen::VectorXd BaseTransport::coefficient_derivative(double t) const
{
    const Eigen::VectorXd x = gamma_.position(t);
    const Eigen::VectorXd w = gamma_.velocity(t);
    const auto gm = christoffel(metric_, x);
    const Eigen::VectorXd rhs = gamma_.acceleration(t) + christoffel_contraction(gm, w) * w;
    return tangent_frame(t).partialPivLu().solve(rhs);
}

std::vector<Eigen::MatrixXd> BaseTransport::h_in_frame(double t) const
{
    const Eigen::VectorXd x = gamma_.position(t);
    const auto hx = h_.eval(x);
    const Eigen::MatrixXd e = tangent_frame(t);
    std::vector<Eigen::MatrixXd> framed(static_cast<std::size_t>(s_));
    if (s_ == 0) return framed;

    std::vector<Eigen::MatrixXd> ht(static_cast<std::size_t>(s_));
    for (int mu = 0; mu < s_; ++mu)
        ht[static_cast<std::size_t>(mu)] = e.transpose() * hx[static_cast<std::size_t>(mu)] * e;

    const Eigen::MatrixXd binv =
        bundle_frame(t).partialPivLu().solve(Eigen::MatrixXd::Identity(s_, s_));
    for (int alpha = 0; alpha < s_; ++alpha) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_, n_);
        for (int mu = 0; mu < s_; ++mu) acc += binv(alpha, mu) * ht[static_cast<std::size_t>(mu)];
        framed[static_cast<std::size_t>(alpha)] = std::move(acc);
    }
    return framed;
}

std::vector<Eigen::MatrixXd> BaseTransport::h_in_frame_derivative(double t) const
{
    std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(s_));
    if (s_ == 0) return out;

    const Eigen::VectorXd x = gamma_.position(t);
    const Eigen::VectorXd w = gamma_.velocity(t);
    const auto gm = christoffel(metric_, x);
    const Eigen::MatrixXd gw = christoffel_contraction(gm, w);
    const Eigen::MatrixXd ws = connection_contraction(bundle_, x, w);

    const Eigen::MatrixXd e = tangent_frame(t);
    const Eigen::MatrixXd de = -gw * e;
    const Eigen::MatrixXd b = bundle_frame(t);
    const Eigen::MatrixXd binv = b.partialPivLu().solve(Eigen::MatrixXd::Identity(s_, s_));
    const Eigen::MatrixXd dbinv = binv * ws; // from b' = -ws b

    const auto hx = h_.eval(x);
    std::vector<Eigen::MatrixXd> dh_along(static_cast<std::size_t>(s_),
                                          Eigen::MatrixXd::Zero(n_, n_));
    for (int c = 0; c < n_; ++c) {
        if (w[c] == 0.0) continue;
        const auto dc = h_.partial(c, x);
        for (int mu = 0; mu < s_; ++mu)
            dh_along[static_cast<std::size_t>(mu)] += w[c] * dc[static_cast<std::size_t>(mu)];
    }

    std::vector<Eigen::MatrixXd> ht(static_cast<std::size_t>(s_));
    std::vector<Eigen::MatrixXd> dht(static_cast<std::size_t>(s_));
    for (int mu = 0; mu < s_; ++mu) {
        const auto& hm = hx[static_cast<std::size_t>(mu)];
        ht[static_cast<std::size_t>(mu)] = e.transpose() * hm * e;
        dht[static_cast<std::size_t>(mu)] = de.transpose() * hm * e
                                            + e.transpose() * dh_along[static_cast<std::size_t>(mu)] * e
                                            + e.transpose() * hm * de;
    }

    for (int alpha = 0; alpha < s_; ++alpha) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_, n_);
        for (int mu = 0; mu < s_; ++mu)
            acc += dbinv(alpha, mu) * ht[static_cast<std::size_t>(mu)]
                   + binv(alpha, mu) * dht[static_cast<std::size_t>(mu)];
        out[static_cast<std::size_t>(alpha)] = std::move(acc);
    }
    return out;
}

double BaseTransport::gram_drift() const
{
    double drift = 0.0;
    for (int i = 0; i < traj_.knot_count(); ++i) {
        const double t = traj_.times()[static_cast<std::size_t>(i)];
        const Eigen::VectorXd x = gamma_.position(t);
        const Eigen::VectorXd& y = traj_.state(i);
        const Eigen::MatrixXd e = Eigen::Map<const Eigen::MatrixXd>(y.data(), n_, n_);
        const Eigen::MatrixXd ge =
            e.transpose() * metric_.eval(x) * e - Eigen::MatrixXd::Identity(n_, n_);
        drift = std::max(drift, ge.cwiseAbs().maxCoeff());
        if (s_ > 0) {
            const Eigen::MatrixXd b =
                Eigen::Map<const Eigen::MatrixXd>(y.data() + n_ * n_, s_, s_);
            const Eigen::MatrixXd gb = b.transpose() * bundle_.fiber_metric(x) * b
                                       - Eigen::MatrixXd::Identity(s_, s_);
            drift = std::max(drift, gb.cwiseAbs().maxCoeff());
        }
    }
    return drift;
}

std::vector<double> BaseTransport::breakpoints() const { return gamma_.knots(); }

DevelopmentCoefficients coefficients_closure(std::shared_ptr<const BaseTransport> base)
{
    if (!base) throw ValidationError("coefficient closure needs a base transport");
    DevelopmentCoefficients coef;
    coef.n = base->n();
    coef.s = base->s();
    coef.t0 = base->t0();
    coef.t1 = base->t1();
    coef.breakpoints = base->breakpoints();
    coef.v = [base](double t) { return base->coefficients(t); };
    coef.h = [base](double t) { return base->h_in_frame(t); };
    return coef;
}

namespace {

void validate_development_inputs(const AmbientSpec& ambient,
                                 const DevelopmentCoefficients& coef,
                                 const Eigen::VectorXd& p_tilde,
                                 const Eigen::MatrixXd& seed_frame, int frame_count,
                                 const DevelopOptions& options)
{
    const int ambient_dim = ambient.dim();
    if (p_tilde.size() != ambient_dim)
        throw ValidationError("development start point has wrong dimension");
    if (!coef.v) throw ValidationError("development coefficients need a velocity closure");
    if (coef.n <= 0) throw ValidationError("development needs a positive base dimension");
    if (coef.s > 0 && !coef.h)
        throw ValidationError("generalized development needs the h closure");
    if (!(coef.t1 > coef.t0)) throw ValidationError("development needs t1 > t0");
    if (seed_frame.rows() != ambient_dim || seed_frame.cols() != frame_count)
        throw ValidationError("development seed frame must be ambient_dim x "
                              + std::to_string(frame_count));
    if (frame_count > ambient_dim)
        throw ValidationError("development frame cannot exceed the ambient dimension");
    check_orthonormal(ambient.eval(p_tilde), seed_frame, "development seed frame",
                      options.seed_tolerance);
}

// Shared result assembly: state is [x; frame rows row-major].
DevelopmentResult package_result(const AmbientSpec& ambient, Trajectory traj, int frame_count)
{
    DevelopmentResult res;
    res.ambient_dim = ambient.dim();
    res.frame_count = frame_count;
    res.trajectory = std::move(traj);

    const int nc = res.trajectory.knot_count();
    Eigen::MatrixXd gram0;
    for (int i = 0; i < nc; ++i) {
        const Eigen::VectorXd& y = res.trajectory.state(i);
        const Eigen::VectorXd x = y.head(res.ambient_dim);
        const Eigen::Map<const RowMajorMatrix> rows(y.data() + res.ambient_dim, frame_count,
                                                    res.ambient_dim);
        const Eigen::MatrixXd gram = rows * ambient.eval(x) * rows.transpose();
        if (i == 0)
            gram0 = gram;
        else
            res.gram_drift = std::max(res.gram_drift, (gram - gram0).cwiseAbs().maxCoeff());
    }
    return res;
}

std::function<void(double, Eigen::VectorXd&)> make_reorthonormalizer(const AmbientSpec& ambient,
                                                                     int frame_count)
{
    const int dim = ambient.dim();
    return [&ambient, frame_count, dim](double, Eigen::VectorXd& y) {
        const Eigen::VectorXd x = y.head(dim);
        const Eigen::MatrixXd g = ambient.eval(x);
        Eigen::Map<RowMajorMatrix> rows(y.data() + dim, frame_count, dim);
        for (int a = 0; a < frame_count; ++a) {
            Eigen::VectorXd r = rows.row(a).transpose();
            for (int b = 0; b < a; ++b) {
                const Eigen::VectorXd prev = rows.row(b).transpose();
                r -= prev.dot(g * r) * prev;
            }
            const double norm2 = r.dot(g * r);
            if (norm2 <= 0.0)
                throw NumericError("frame reorthonormalization degenerated");
            rows.row(a) = (r / std::sqrt(norm2)).transpose();
        }
    };
}

} // namespace

DevelopmentResult develop(const AmbientSpec& ambient, const DevelopmentCoefficients& coef,
                          const Eigen::VectorXd& p_tilde, const Eigen::MatrixXd& seed_frame,
                          const DevelopOptions& options)
{
    if (coef.s != 0)
        throw ValidationError("classical development takes no bundle block; use the "
                              "generalized development instead");
    const int n = coef.n;
    const int dim = ambient.dim();
    validate_development_inputs(ambient, coef, p_tilde, seed_frame, n, options);

    Eigen::VectorXd y0(dim + n * dim);
    y0.head(dim) = p_tilde;
    Eigen::Map<RowMajorMatrix>(y0.data() + dim, n, dim) = seed_frame.transpose();

    OdeSystem sys{static_cast<int>(y0.size()), [&, n, dim](double t, const Eigen::VectorXd& y) {
                      const Eigen::VectorXd x = y.head(dim);
                      const Eigen::Map<const RowMajorMatrix> rows(y.data() + dim, n, dim);
                      const Eigen::VectorXd v = coef.v(t);
                      if (v.size() != n)
                          throw NumericError("velocity closure returned wrong dimension");

                      const Eigen::VectorXd w = rows.transpose() * v;
                      const auto gm = christoffel(ambient, x);
                      std::vector<Eigen::VectorXd> gw(static_cast<std::size_t>(dim));
                      for (int bidx = 0; bidx < dim; ++bidx)
                          gw[static_cast<std::size_t>(bidx)] =
                              gm[static_cast<std::size_t>(bidx)] * w;

                      Eigen::VectorXd dy(y.size());
                      dy.head(dim) = w;
                      // Row by row: each frame vector is parallel along the result.
                      for (int a = 0; a < n; ++a)
                          for (int bidx = 0; bidx < dim; ++bidx)
                              dy[dim + a * dim + bidx] =
                                  -rows.row(a).dot(gw[static_cast<std::size_t>(bidx)]);
                      return dy;
                  }};

    IntegrateOptions opt;
    opt.step = options.step;
    opt.breakpoints = coef.breakpoints;
    opt.breakpoints.insert(opt.breakpoints.end(), options.extra_breakpoints.begin(),
                           options.extra_breakpoints.end());
    if (options.reorthonormalize) opt.post_step = make_reorthonormalizer(ambient, n);

    return package_result(ambient, rk4_integrate(sys, coef.t0, coef.t1, y0, opt), n);
}

DevelopmentResult generalized_develop(const AmbientSpec& ambient,
                                      const DevelopmentCoefficients& coef,
                                      const Eigen::VectorXd& p_tilde,
                                      const Eigen::MatrixXd& seed_frame,
                                      const DevelopOptions& options)
{
    const int n = coef.n;
    const int s = coef.s;
    const int fc = n + s;
    const int dim = ambient.dim();
    validate_development_inputs(ambient, coef, p_tilde, seed_frame, fc, options);

    Eigen::VectorXd y0(dim + fc * dim);
    y0.head(dim) = p_tilde;
    Eigen::Map<RowMajorMatrix>(y0.data() + dim, fc, dim) = seed_frame.transpose();

    OdeSystem sys{
        static_cast<int>(y0.size()), [&, n, s, fc, dim](double t, const Eigen::VectorXd& y) {
            const Eigen::VectorXd x = y.head(dim);
            const Eigen::Map<const RowMajorMatrix> rows(y.data() + dim, fc, dim);
            const Eigen::VectorXd v = coef.v(t);
            if (v.size() != n) throw NumericError("velocity closure returned wrong dimension");

            const Eigen::VectorXd w = rows.topRows(n).transpose() * v;
            const auto gm = christoffel(ambient, x);

            // m(b, a) = sum_c GammaTilde^a_{bc} w_c
            Eigen::MatrixXd m(dim, dim);
            for (int a = 0; a < dim; ++a) m.col(a) = gm[static_cast<std::size_t>(a)] * w;

            // Frame rotation coupling p(a, alpha) = sum_b h^alpha_{ab} v_b.
            Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(fc, fc);
            if (s > 0) {
                const auto hmats = coef.h(t);
                if (static_cast<int>(hmats.size()) != s)
                    throw NumericError("h closure returned wrong rank");
                for (int alpha = 0; alpha < s; ++alpha) {
                    const Eigen::VectorXd p = hmats[static_cast<std::size_t>(alpha)] * v;
                    for (int a = 0; a < n; ++a) {
                        coupling(a, n + alpha) = p[a];
                        coupling(n + alpha, a) = -p[a];
                    }
                }
            }

            Eigen::VectorXd dy(y.size());
            dy.head(dim) = w;
            Eigen::Map<RowMajorMatrix>(dy.data() + dim, fc, dim) =
                -rows * m + coupling * rows;
            return dy;
        }};

    IntegrateOptions opt;
    opt.step = options.step;
    opt.breakpoints = coef.breakpoints;
    opt.breakpoints.insert(opt.breakpoints.end(), options.extra_breakpoints.begin(),
                           options.extra_breakpoints.end());
    if (options.reorthonormalize) opt.post_step = make_reorthonormalizer(ambient, fc);

    return package_result(ambient, rk4_integrate(sys, coef.t0, coef.t1, y0, opt), fc);
}

Eigen::VectorXd DevelopmentResult::point_at(double t) const
{
    return trajectory.eval(t).head(ambient_dim);
}

Eigen::MatrixXd DevelopmentResult::frame_at(double t) const
{
    const Eigen::VectorXd y = trajectory.eval(t);
    return Eigen::Map<const RowMajorMatrix>(y.data() + ambient_dim, frame_count, ambient_dim)
        .transpose();
}

Eigen::VectorXd DevelopmentResult::push(double t, const Eigen::VectorXd& coefficients) const
{
    if (coefficients.size() != frame_count)
        throw ValidationError("frame coefficients have wrong dimension");
    return frame_at(t) * coefficients;
}

Eigen::VectorXd d_map(const DevelopmentResult& dev, double t1, double t2,
                      const Eigen::VectorXd& w)
{
    if (w.size() != dev.ambient_dim)
        throw ValidationError("transported vector has wrong ambient dimension");
    const Eigen::MatrixXd f1 = dev.frame_at(t1);
    Eigen::VectorXd coeff;
    if (dev.frame_count == dev.ambient_dim)
        coeff = f1.partialPivLu().solve(w);
    else
        coeff = f1.colPivHouseholderQr().solve(w); // least squares onto the frame span
    return dev.frame_at(t2) * coeff;
}

} // namespace devmap
