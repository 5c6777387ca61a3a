#include "devmap/metric.hpp"

#include <cmath>
#include <sstream>

namespace devmap {

namespace {

std::string point_string(const Eigen::VectorXd& x)
{
    std::ostringstream os;
    os << "(";
    for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
    os << ")";
    return os.str();
}

} // namespace

MetricField::MetricField(int dim, std::vector<ScalarField> upper, Box domain)
    : dim_(dim), domain_(std::move(domain)), comps_(std::move(upper))
{
    const int packed_count = dim * (dim + 1) / 2;
    if (dim <= 0) throw ValidationError("metric dimension must be positive");
    if (static_cast<int>(comps_.size()) != packed_count)
        throw ValidationError("metric needs " + std::to_string(packed_count)
                              + " upper-triangle components, got "
                              + std::to_string(comps_.size()));
    for (const auto& f : comps_) {
        if (!f.valid()) throw ValidationError("metric component is empty");
        if (f.dim() != dim) throw ValidationError("metric component has wrong dimension");
    }

    constant_ = true;
    for (const auto& f : comps_) constant_ = constant_ && f.is_constant();

    d1_.resize(static_cast<std::size_t>(dim));
    d2_.resize(static_cast<std::size_t>(dim));
    for (int c = 0; c < dim; ++c) {
        auto& row = d1_[static_cast<std::size_t>(c)];
        row.reserve(comps_.size());
        for (const auto& f : comps_) row.push_back(f.derivative(c));
        d2_[static_cast<std::size_t>(c)].resize(static_cast<std::size_t>(dim));
    }
    for (int c = 0; c < dim; ++c)
        for (int d = 0; d < dim; ++d) {
            auto& row = d2_[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)];
            row.reserve(comps_.size());
            for (const auto& f : d1_[static_cast<std::size_t>(c)])
                row.push_back(f.derivative(d));
        }

    if (constant_) {
        Eigen::VectorXd x0 = domain_.empty() ? Eigen::VectorXd::Zero(dim) : domain_.center();
        const_value_ = eval_packed(comps_, x0);
        Eigen::LLT<Eigen::MatrixXd> llt(const_value_);
        if (llt.info() != Eigen::Success)
            throw ValidationError("constant metric is not positive definite");
    }
}

MetricField MetricField::euclidean(int dim)
{
    std::vector<ScalarField> upper;
    for (int a = 0; a < dim; ++a)
        for (int b = a; b < dim; ++b)
            upper.push_back(ScalarField::constant(a == b ? 1.0 : 0.0, dim));
    return MetricField(dim, std::move(upper));
}

const ScalarField& MetricField::component(int a, int b) const
{
    return comps_[static_cast<std::size_t>(packed(a, b))];
}

Eigen::MatrixXd MetricField::eval_packed(const std::vector<ScalarField>& fields,
                                         const Eigen::VectorXd& x) const
{
    Eigen::MatrixXd m(dim_, dim_);
    std::span<const double> pt(x.data(), static_cast<std::size_t>(x.size()));
    for (int a = 0; a < dim_; ++a)
        for (int b = a; b < dim_; ++b) {
            const double v = fields[static_cast<std::size_t>(packed(a, b))].eval(pt);
            m(a, b) = v;
            m(b, a) = v;
        }
    return m;
}

void MetricField::check_in_domain(const Eigen::VectorXd& x) const
{
    if (!domain_.contains(x))
        throw EvalError("point " + point_string(x) + " is outside the chart domain");
}

Eigen::MatrixXd MetricField::eval(const Eigen::VectorXd& x) const
{
    check_in_domain(x);
    if (constant_) return const_value_;
    Eigen::MatrixXd g = eval_packed(comps_, x);
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw EvalError("metric is not positive definite at " + point_string(x));
    return g;
}

Eigen::MatrixXd MetricField::inverse(const Eigen::VectorXd& x) const
{
    Eigen::MatrixXd g = eval(x);
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw EvalError("metric is not positive definite at " + point_string(x));
    return llt.solve(Eigen::MatrixXd::Identity(dim_, dim_));
}

Eigen::MatrixXd MetricField::partial(int c, const Eigen::VectorXd& x) const
{
    if (constant_) return Eigen::MatrixXd::Zero(dim_, dim_);
    return eval_packed(d1_[static_cast<std::size_t>(c)], x);
}

Eigen::MatrixXd MetricField::partial2(int c, int d, const Eigen::VectorXd& x) const
{
    if (constant_) return Eigen::MatrixXd::Zero(dim_, dim_);
    return eval_packed(d2_[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)], x);
}

double MetricField::inner(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                          const Eigen::VectorXd& v) const
{
    return u.dot(eval(x) * v);
}

double CurvatureValue::sup_norm() const
{
    double m = 0.0;
    for (double v : data) m = std::max(m, std::abs(v));
    return m;
}

std::vector<Eigen::MatrixXd> christoffel(const MetricField& metric, const Eigen::VectorXd& x)
{
    const int n = metric.dim();
    std::vector<Eigen::MatrixXd> gamma(static_cast<std::size_t>(n),
                                       Eigen::MatrixXd::Zero(n, n));
    if (metric.is_constant()) {
        metric.check_in_domain(x);
        return gamma;
    }

    const Eigen::MatrixXd ginv = metric.inverse(x);
    std::vector<Eigen::MatrixXd> dg;
    dg.reserve(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) dg.push_back(metric.partial(c, x));

    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            for (int c = 0; c < n; ++c) {
                double sum = 0.0;
                for (int d = 0; d < n; ++d)
                    sum += ginv(c, d)
                           * (dg[static_cast<std::size_t>(a)](d, b)
                              + dg[static_cast<std::size_t>(b)](d, a)
                              - dg[static_cast<std::size_t>(d)](a, b));
                const double v = 0.5 * sum;
                gamma[static_cast<std::size_t>(c)](a, b) = v;
                gamma[static_cast<std::size_t>(c)](b, a) = v;
            }
        }
    return gamma;
}

CurvatureValue riemann_curvature(const MetricField& metric, const Eigen::VectorXd& x)
{
    const int n = metric.dim();
    CurvatureValue R(n, n, n, n);
    if (metric.is_constant()) {
        metric.check_in_domain(x);
        return R;
    }

    const Eigen::MatrixXd g = metric.eval(x);
    const Eigen::MatrixXd ginv = metric.inverse(x);

    std::vector<Eigen::MatrixXd> dg(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) dg[static_cast<std::size_t>(c)] = metric.partial(c, x);
    std::vector<std::vector<Eigen::MatrixXd>> ddg(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        ddg[static_cast<std::size_t>(c)].resize(static_cast<std::size_t>(n));
        for (int d = 0; d < n; ++d)
            ddg[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] =
                metric.partial2(c, d, x);
    }

    // d_e g^{-1} = -g^{-1} (d_e g) g^{-1}
    std::vector<Eigen::MatrixXd> dginv(static_cast<std::size_t>(n));
    for (int e = 0; e < n; ++e)
        dginv[static_cast<std::size_t>(e)] = -ginv * dg[static_cast<std::size_t>(e)] * ginv;

    const auto gamma = christoffel(metric, x);

    // dGamma[e][c](a,b) = d_e Gamma^c_{ab}
    std::vector<std::vector<Eigen::MatrixXd>> dgamma(static_cast<std::size_t>(n));
    for (int e = 0; e < n; ++e) {
        auto& slot = dgamma[static_cast<std::size_t>(e)];
        slot.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n));
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    double sum = 0.0;
                    for (int d = 0; d < n; ++d) {
                        const double lowered = dg[static_cast<std::size_t>(a)](d, b)
                                               + dg[static_cast<std::size_t>(b)](d, a)
                                               - dg[static_cast<std::size_t>(d)](a, b);
                        const double dlowered =
                            ddg[static_cast<std::size_t>(e)][static_cast<std::size_t>(a)](d, b)
                            + ddg[static_cast<std::size_t>(e)][static_cast<std::size_t>(b)](d, a)
                            - ddg[static_cast<std::size_t>(e)][static_cast<std::size_t>(d)](a, b);
                        sum += dginv[static_cast<std::size_t>(e)](c, d) * lowered
                               + ginv(c, d) * dlowered;
                    }
                    slot[static_cast<std::size_t>(c)](a, b) = 0.5 * sum;
                    slot[static_cast<std::size_t>(c)](b, a) = 0.5 * sum;
                }
    }

    // R^e_{abc} = d_a Gamma^e_{bc} - d_b Gamma^e_{ac}
    //           + Gamma^f_{bc} Gamma^e_{af} - Gamma^f_{ac} Gamma^e_{bf}
    Eigen::VectorXd up(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                for (int e = 0; e < n; ++e) {
                    double re =
                        dgamma[static_cast<std::size_t>(a)][static_cast<std::size_t>(e)](b, c)
                        - dgamma[static_cast<std::size_t>(b)][static_cast<std::size_t>(e)](a, c);
                    for (int f = 0; f < n; ++f)
                        re += gamma[static_cast<std::size_t>(f)](b, c)
                                  * gamma[static_cast<std::size_t>(e)](a, f)
                              - gamma[static_cast<std::size_t>(f)](a, c)
                                    * gamma[static_cast<std::size_t>(e)](b, f);
                    up[e] = re;
                }
                for (int d = 0; d < n; ++d) {
                    double lowered = 0.0;
                    for (int e = 0; e < n; ++e) lowered += up[e] * g(e, d);
                    R.at(a, b, c, d) = lowered;
                }
            }
    return R;
}

} // namespace devmap
