#include "devmap/bundle.hpp"

#include "devmap/rng.hpp"

#include <cmath>
#include <sstream>
#include <utility>

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

Eigen::MatrixXd eval_matrix(const std::vector<ScalarField>& fields, int rows, int cols,
                            const Eigen::VectorXd& x)
{
    Eigen::MatrixXd m(rows, cols);
    std::span<const double> pt(x.data(), static_cast<std::size_t>(x.size()));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            m(r, c) = fields[static_cast<std::size_t>(r * cols + c)].eval(pt);
    return m;
}

} // namespace

BundleSpec::BundleSpec(int base_dim, int rank, std::vector<ScalarField> frak_upper,
                       std::vector<std::vector<ScalarField>> omega, Box sample_box)
    : base_dim_(base_dim), rank_(rank), frak_(std::move(frak_upper)), omega_(std::move(omega))
{
    if (base_dim_ <= 0) throw ValidationError("bundle base dimension must be positive");
    if (rank_ < 0) throw ValidationError("bundle rank must be nonnegative");

    const int frak_count = rank_ * (rank_ + 1) / 2;
    if (static_cast<int>(frak_.size()) != frak_count)
        throw ValidationError("fiber metric needs " + std::to_string(frak_count)
                              + " upper-triangle components, got "
                              + std::to_string(frak_.size()));
    for (const auto& f : frak_)
        if (!f.valid() || f.dim() != base_dim_)
            throw ValidationError("fiber metric component has wrong dimension");

    if (omega_.empty())
        omega_.assign(static_cast<std::size_t>(base_dim_),
                      std::vector<ScalarField>(static_cast<std::size_t>(rank_ * rank_),
                                               ScalarField::constant(0.0, base_dim_)));
    if (static_cast<int>(omega_.size()) != base_dim_)
        throw ValidationError("connection needs one coefficient matrix per base direction");
    for (const auto& block : omega_) {
        if (static_cast<int>(block.size()) != rank_ * rank_)
            throw ValidationError("connection matrix must have rank*rank entries");
        for (const auto& f : block)
            if (!f.valid() || f.dim() != base_dim_)
                throw ValidationError("connection coefficient has wrong dimension");
    }

    dfrak_.resize(static_cast<std::size_t>(base_dim_));
    for (int c = 0; c < base_dim_; ++c) {
        auto& row = dfrak_[static_cast<std::size_t>(c)];
        row.reserve(frak_.size());
        for (const auto& f : frak_) row.push_back(f.derivative(c));
    }
    domega_.resize(static_cast<std::size_t>(base_dim_));
    for (int c = 0; c < base_dim_; ++c) {
        auto& slab = domega_[static_cast<std::size_t>(c)];
        slab.resize(omega_.size());
        for (std::size_t a = 0; a < omega_.size(); ++a) {
            slab[a].reserve(omega_[a].size());
            for (const auto& f : omega_[a]) slab[a].push_back(f.derivative(c));
        }
    }

    check_compatibility(sample_box);
}

BundleSpec BundleSpec::trivial(int base_dim, int rank)
{
    std::vector<ScalarField> frak;
    for (int a = 0; a < rank; ++a)
        for (int b = a; b < rank; ++b)
            frak.push_back(ScalarField::constant(a == b ? 1.0 : 0.0, base_dim));
    return BundleSpec(base_dim, rank, std::move(frak), {});
}

Eigen::MatrixXd BundleSpec::fiber_metric(const Eigen::VectorXd& x) const
{
    Eigen::MatrixXd m(rank_, rank_);
    std::span<const double> pt(x.data(), static_cast<std::size_t>(x.size()));
    for (int a = 0; a < rank_; ++a)
        for (int b = a; b < rank_; ++b) {
            const double v = frak_[static_cast<std::size_t>(packed(a, b))].eval(pt);
            m(a, b) = v;
            m(b, a) = v;
        }
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw EvalError("fiber metric is not positive definite at " + point_string(x));
    return m;
}

Eigen::MatrixXd BundleSpec::fiber_metric_partial(int c, const Eigen::VectorXd& x) const
{
    Eigen::MatrixXd m(rank_, rank_);
    std::span<const double> pt(x.data(), static_cast<std::size_t>(x.size()));
    const auto& row = dfrak_[static_cast<std::size_t>(c)];
    for (int a = 0; a < rank_; ++a)
        for (int b = a; b < rank_; ++b) {
            const double v = row[static_cast<std::size_t>(packed(a, b))].eval(pt);
            m(a, b) = v;
            m(b, a) = v;
        }
    return m;
}

Eigen::MatrixXd BundleSpec::connection(int a, const Eigen::VectorXd& x) const
{
    return eval_matrix(omega_[static_cast<std::size_t>(a)], rank_, rank_, x);
}

Eigen::MatrixXd BundleSpec::connection_partial(int c, int a, const Eigen::VectorXd& x) const
{
    return eval_matrix(domega_[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)],
                       rank_, rank_, x);
}

void BundleSpec::check_compatibility(const Box& sample_box) const
{
    Eigen::VectorXd lo(base_dim_), hi(base_dim_);
    if (sample_box.empty()) {
        lo.setConstant(-1.0);
        hi.setConstant(1.0);
    } else {
        lo = sample_box.lo;
        hi = sample_box.hi;
    }

    std::vector<Eigen::VectorXd> samples;
    samples.push_back(0.5 * (lo + hi));
    Pcg32 rng(0x9e3779b97f4a7c15ULL, 41);
    for (int k = 0; k < 8; ++k) {
        Eigen::VectorXd x(base_dim_);
        for (int i = 0; i < base_dim_; ++i) x[i] = rng.uniform(lo[i], hi[i]);
        samples.push_back(std::move(x));
    }

    int valid_samples = 0;
    std::string first_failure;
    for (const auto& x : samples) {
        try {
            const Eigen::MatrixXd frak = fiber_metric(x);
            for (int a = 0; a < base_dim_; ++a) {
                const Eigen::MatrixXd w = connection(a, x);
                const Eigen::MatrixXd defect =
                    fiber_metric_partial(a, x) - w.transpose() * frak - frak * w;
                const double worst =
                    defect.size() == 0 ? 0.0 : defect.cwiseAbs().maxCoeff();
                if (worst > 1e-10) {
                    std::ostringstream os;
                    os << "bundle connection is not compatible with the fiber metric: "
                       << "defect " << worst << " in direction " << (a + 1) << " at "
                       << point_string(x);
                    throw ValidationError(os.str());
                }
            }
            ++valid_samples;
        } catch (const EvalError& err) {
            // Field not defined at this sample point; other samples still apply.
            if (first_failure.empty()) first_failure = err.what();
        }
    }
    if (valid_samples == 0)
        throw ValidationError("bundle data could not be evaluated at any sample point: "
                              + first_failure);
}

CurvatureValue bundle_curvature(const BundleSpec& bundle, const Eigen::VectorXd& x)
{
    const int n = bundle.base_dim();
    const int s = bundle.rank();
    CurvatureValue R(s, s, n, n);

    const Eigen::MatrixXd frak = bundle.fiber_metric(x);
    std::vector<Eigen::MatrixXd> w(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) w[static_cast<std::size_t>(a)] = bundle.connection(a, x);

    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const Eigen::MatrixXd f = bundle.connection_partial(a, b, x)
                                      - bundle.connection_partial(b, a, x)
                                      + w[static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(b)]
                                      - w[static_cast<std::size_t>(b)] * w[static_cast<std::size_t>(a)];
            // m(beta, alpha) = <F_ab xi_alpha, xi_beta>
            const Eigen::MatrixXd m = frak * f;
            for (int alpha = 0; alpha < s; ++alpha)
                for (int beta = 0; beta < s; ++beta) {
                    const double v = 0.5 * (m(beta, alpha) - m(alpha, beta));
                    R.at(alpha, beta, a, b) = v;
                    R.at(alpha, beta, b, a) = -v;
                }
        }
    return R;
}

SecondFundamentalField::SecondFundamentalField(int base_dim, int rank,
                                               std::vector<std::vector<ScalarField>> comps)
    : base_dim_(base_dim), rank_(rank), comps_(std::move(comps))
{
    if (base_dim_ <= 0) throw ValidationError("base dimension must be positive");
    if (rank_ < 0) throw ValidationError("rank must be nonnegative");
    if (static_cast<int>(comps_.size()) != rank_)
        throw ValidationError("second fundamental form needs one block per normal direction");
    const int packed_count = base_dim_ * (base_dim_ + 1) / 2;
    for (const auto& block : comps_) {
        if (static_cast<int>(block.size()) != packed_count)
            throw ValidationError("second fundamental form block needs "
                                  + std::to_string(packed_count) + " components");
        for (const auto& f : block)
            if (!f.valid() || f.dim() != base_dim_)
                throw ValidationError("second fundamental form component has wrong dimension");
    }

    zero_ = true;
    for (const auto& block : comps_)
        for (const auto& f : block)
            zero_ = zero_ && f.is_constant() && f.constant_value() == 0.0;

    d1_.resize(static_cast<std::size_t>(base_dim_));
    for (int c = 0; c < base_dim_; ++c) {
        auto& slab = d1_[static_cast<std::size_t>(c)];
        slab.resize(comps_.size());
        for (std::size_t alpha = 0; alpha < comps_.size(); ++alpha) {
            slab[alpha].reserve(comps_[alpha].size());
            for (const auto& f : comps_[alpha]) slab[alpha].push_back(f.derivative(c));
        }
    }
}

SecondFundamentalField SecondFundamentalField::zero(int base_dim, int rank)
{
    std::vector<std::vector<ScalarField>> comps(
        static_cast<std::size_t>(rank),
        std::vector<ScalarField>(static_cast<std::size_t>(base_dim * (base_dim + 1) / 2),
                                 ScalarField::constant(0.0, base_dim)));
    return SecondFundamentalField(base_dim, rank, std::move(comps));
}

const ScalarField& SecondFundamentalField::component(int alpha, int a, int b) const
{
    return comps_[static_cast<std::size_t>(alpha)][static_cast<std::size_t>(packed(a, b))];
}

std::vector<Eigen::MatrixXd>
SecondFundamentalField::eval_packed(const std::vector<std::vector<ScalarField>>& fields,
                                    const Eigen::VectorXd& x) const
{
    std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(rank_));
    std::span<const double> pt(x.data(), static_cast<std::size_t>(x.size()));
    for (int alpha = 0; alpha < rank_; ++alpha) {
        Eigen::MatrixXd m(base_dim_, base_dim_);
        for (int a = 0; a < base_dim_; ++a)
            for (int b = a; b < base_dim_; ++b) {
                const double v =
                    fields[static_cast<std::size_t>(alpha)][static_cast<std::size_t>(packed(a, b))]
                        .eval(pt);
                m(a, b) = v;
                m(b, a) = v;
            }
        out[static_cast<std::size_t>(alpha)] = std::move(m);
    }
    return out;
}

std::vector<Eigen::MatrixXd> SecondFundamentalField::eval(const Eigen::VectorXd& x) const
{
    return eval_packed(comps_, x);
}

std::vector<Eigen::MatrixXd> SecondFundamentalField::partial(int c, const Eigen::VectorXd& x) const
{
    return eval_packed(d1_[static_cast<std::size_t>(c)], x);
}

} // namespace devmap
