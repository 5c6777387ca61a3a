#include "devmap/curve.hpp"

#include "devmap/odeint.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

namespace devmap {

struct Curve::Impl {
    virtual ~Impl() = default;
    virtual int dim() const = 0;
    virtual double t0() const = 0;
    virtual double t1() const = 0;
    virtual Eigen::VectorXd position(double t) const = 0;
    virtual Eigen::VectorXd velocity(double t) const = 0;
    virtual Eigen::VectorXd acceleration(double t) const = 0;
    virtual std::vector<double> knots() const { return {}; }
};

namespace {

struct ExpressionCurve final : Curve::Impl {
    std::vector<ScalarField> comps, d1, d2;
    double a, b;

    ExpressionCurve(std::vector<ScalarField> c, double t0, double t1)
        : comps(std::move(c)), a(t0), b(t1)
    {
        for (const auto& f : comps) {
            if (!f.valid() || f.dim() != 1)
                throw ValidationError("curve components must be one-variable fields");
            d1.push_back(f.derivative(0));
            d2.push_back(d1.back().derivative(0));
        }
        if (comps.empty()) throw ValidationError("curve needs at least one component");
    }

    int dim() const override { return static_cast<int>(comps.size()); }
    double t0() const override { return a; }
    double t1() const override { return b; }

    Eigen::VectorXd eval_fields(const std::vector<ScalarField>& fields, double t) const
    {
        Eigen::VectorXd x(fields.size());
        const std::span<const double> pt(&t, 1);
        for (std::size_t i = 0; i < fields.size(); ++i)
            x[static_cast<Eigen::Index>(i)] = fields[i].eval(pt);
        return x;
    }

    Eigen::VectorXd position(double t) const override { return eval_fields(comps, t); }
    Eigen::VectorXd velocity(double t) const override { return eval_fields(d1, t); }
    Eigen::VectorXd acceleration(double t) const override { return eval_fields(d2, t); }
};

struct LineCurve final : Curve::Impl {
    Eigen::VectorXd start, dir;

    LineCurve(Eigen::VectorXd a, Eigen::VectorXd b) : start(std::move(a))
    {
        if (b.size() != start.size())
            throw ValidationError("line endpoints must have equal dimensions");
        dir = b - start;
    }

    int dim() const override { return static_cast<int>(start.size()); }
    double t0() const override { return 0.0; }
    double t1() const override { return 1.0; }
    Eigen::VectorXd position(double t) const override { return start + t * dir; }
    Eigen::VectorXd velocity(double) const override { return dir; }
    Eigen::VectorXd acceleration(double) const override
    {
        return Eigen::VectorXd::Zero(start.size());
    }
};

struct BezierCurve final : Curve::Impl {
    std::array<Eigen::VectorXd, 4> p;

    explicit BezierCurve(std::array<Eigen::VectorXd, 4> control) : p(std::move(control))
    {
        for (const auto& q : p)
            if (q.size() != p[0].size() || q.size() == 0)
                throw ValidationError("control points must have equal dimensions");
    }

    int dim() const override { return static_cast<int>(p[0].size()); }
    double t0() const override { return 0.0; }
    double t1() const override { return 1.0; }

    Eigen::VectorXd position(double t) const override
    {
        const double u = 1.0 - t;
        return (u * u * u) * p[0] + (3.0 * u * u * t) * p[1] + (3.0 * u * t * t) * p[2]
               + (t * t * t) * p[3];
    }
    Eigen::VectorXd velocity(double t) const override
    {
        const double u = 1.0 - t;
        return 3.0
               * ((u * u) * (p[1] - p[0]) + (2.0 * u * t) * (p[2] - p[1])
                  + (t * t) * (p[3] - p[2]));
    }
    Eigen::VectorXd acceleration(double t) const override
    {
        const double u = 1.0 - t;
        return 6.0 * (u * (p[2] - 2.0 * p[1] + p[0]) + t * (p[3] - 2.0 * p[2] + p[1]));
    }
};

struct TrajectoryCurve final : Curve::Impl {
    Trajectory traj;
    int pos_off, n, vel_off;

    TrajectoryCurve(Trajectory tr, int position_offset, int dim_in, int velocity_offset)
        : traj(std::move(tr)), pos_off(position_offset), n(dim_in), vel_off(velocity_offset)
    {
        if (traj.knot_count() < 2) throw ValidationError("trajectory curve needs two knots");
        const int width = static_cast<int>(traj.state(0).size());
        if (n <= 0 || pos_off < 0 || pos_off + n > width)
            throw ValidationError("position slots fall outside the trajectory state");
        if (vel_off >= 0 && vel_off + n > width)
            throw ValidationError("velocity slots fall outside the trajectory state");
    }

    int dim() const override { return n; }
    double t0() const override { return traj.t0(); }
    double t1() const override { return traj.t1(); }

    Eigen::VectorXd position(double t) const override
    {
        return traj.eval(t).segment(pos_off, n);
    }
    Eigen::VectorXd velocity(double t) const override
    {
        return vel_off >= 0 ? Eigen::VectorXd(traj.eval(t).segment(vel_off, n))
                            : Eigen::VectorXd(traj.derivative(t).segment(pos_off, n));
    }
    Eigen::VectorXd acceleration(double t) const override
    {
        return vel_off >= 0 ? Eigen::VectorXd(traj.derivative(t).segment(vel_off, n))
                            : Eigen::VectorXd(traj.second_derivative(t).segment(pos_off, n));
    }
    std::vector<double> knots() const override
    {
        const auto& times = traj.times();
        return {times.begin() + 1, times.end() - 1};
    }
};

struct ReversedCurve final : Curve::Impl {
    Curve inner;

    explicit ReversedCurve(Curve c) : inner(std::move(c)) {}

    double flip(double t) const { return inner.t0() + inner.t1() - t; }

    int dim() const override { return inner.dim(); }
    double t0() const override { return inner.t0(); }
    double t1() const override { return inner.t1(); }
    Eigen::VectorXd position(double t) const override { return inner.position(flip(t)); }
    Eigen::VectorXd velocity(double t) const override { return -inner.velocity(flip(t)); }
    Eigen::VectorXd acceleration(double t) const override
    {
        return inner.acceleration(flip(t));
    }
    std::vector<double> knots() const override
    {
        auto ks = inner.knots();
        for (double& k : ks) k = flip(k);
        std::sort(ks.begin(), ks.end());
        return ks;
    }
};

} // namespace

Curve Curve::from_expressions(std::vector<ScalarField> comps, double t0, double t1)
{
    if (!(t1 > t0)) throw ValidationError("curve parameter range must have t1 > t0");
    return Curve(std::make_shared<ExpressionCurve>(std::move(comps), t0, t1));
}

Curve Curve::line(Eigen::VectorXd a, Eigen::VectorXd b)
{
    return Curve(std::make_shared<LineCurve>(std::move(a), std::move(b)));
}

Curve Curve::bezier3(std::array<Eigen::VectorXd, 4> control)
{
    return Curve(std::make_shared<BezierCurve>(std::move(control)));
}

Curve Curve::from_samples(std::vector<double> times, std::vector<Eigen::VectorXd> points)
{
    if (times.size() != points.size())
        throw ValidationError("sample times and points must pair up");
    if (times.size() < 2) throw ValidationError("sampled curve needs at least two points");
    const Eigen::Index n = points[0].size();
    for (const auto& p : points)
        if (p.size() != n) throw ValidationError("sample points must have equal dimensions");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        if (!(times[i] < times[i + 1]))
            throw ValidationError("sample times must increase strictly");

    Trajectory traj;
    const std::size_t m = times.size();
    for (std::size_t i = 0; i < m; ++i) {
        Eigen::VectorXd tangent(n);
        if (i == 0)
            tangent = (points[1] - points[0]) / (times[1] - times[0]);
        else if (i + 1 == m)
            tangent = (points[m - 1] - points[m - 2]) / (times[m - 1] - times[m - 2]);
        else
            tangent = (points[i + 1] - points[i - 1]) / (times[i + 1] - times[i - 1]);
        traj.append(times[i], points[i], std::move(tangent));
    }
    return Curve(std::make_shared<TrajectoryCurve>(std::move(traj), 0, static_cast<int>(n), -1));
}

Curve Curve::from_trajectory(Trajectory traj, int position_offset, int dim, int velocity_offset)
{
    return Curve(std::make_shared<TrajectoryCurve>(std::move(traj), position_offset, dim,
                                                   velocity_offset));
}

int Curve::dim() const { return impl_->dim(); }
double Curve::t0() const { return impl_->t0(); }
double Curve::t1() const { return impl_->t1(); }

namespace {

double checked_time(const Curve::Impl& impl, double t)
{
    const double lo = impl.t0();
    const double hi = impl.t1();
    const double slack = 1e-9 * std::max(1.0, hi - lo);
    if (t < lo - slack || t > hi + slack)
        throw EvalError("curve parameter " + std::to_string(t) + " is outside ["
                        + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return std::clamp(t, lo, hi);
}

} // namespace

Eigen::VectorXd Curve::position(double t) const { return impl_->position(checked_time(*impl_, t)); }
Eigen::VectorXd Curve::velocity(double t) const { return impl_->velocity(checked_time(*impl_, t)); }
Eigen::VectorXd Curve::acceleration(double t) const
{
    return impl_->acceleration(checked_time(*impl_, t));
}
std::vector<double> Curve::knots() const { return impl_->knots(); }

Curve Curve::reversed() const { return Curve(std::make_shared<ReversedCurve>(*this)); }

Curve read_curve_csv(std::istream& in)
{
    std::vector<double> times;
    std::vector<Eigen::VectorXd> points;
    std::string line;
    std::size_t line_no = 0;
    std::size_t columns = 0;
    bool allow_header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        if (trimmed.empty() || trimmed[0] == '#') continue;

        std::vector<double> row;
        std::string bad_cell;
        std::stringstream ss(trimmed);
        std::string cell;
        while (bad_cell.empty() && std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
                    ++used;
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                bad_cell = cell;
            }
        }
        if (!bad_cell.empty()) {
            // A leading row that is not numeric is the column header.
            if (allow_header) {
                allow_header = false;
                continue;
            }
            throw ParseError("curve file has a malformed number '" + bad_cell + "' at line "
                             + std::to_string(line_no), line_no);
        }
        allow_header = false;
        if (row.size() < 2)
            throw ParseError("curve file rows need a time and at least one coordinate (line "
                             + std::to_string(line_no) + ")", line_no);
        if (columns == 0) columns = row.size();
        if (row.size() != columns)
            throw ParseError("curve file row at line " + std::to_string(line_no) + " has "
                             + std::to_string(row.size()) + " values, expected "
                             + std::to_string(columns), line_no);
        times.push_back(row[0]);
        Eigen::VectorXd p(static_cast<Eigen::Index>(row.size()) - 1);
        for (std::size_t i = 1; i < row.size(); ++i)
            p[static_cast<Eigen::Index>(i) - 1] = row[i];
        points.push_back(std::move(p));
    }
    if (times.size() < 2) throw ValidationError("curve file needs at least two sample rows");
    return Curve::from_samples(std::move(times), std::move(points));
}

void write_curve_csv(std::ostream& out, const Curve& curve, int sample_count)
{
    if (sample_count < 2) throw ValidationError("curve export needs at least two samples");
    out << "t";
    for (int i = 1; i <= curve.dim(); ++i) out << ",x" << i;
    out << "\n";
    char buf[32];
    for (int k = 0; k < sample_count; ++k) {
        const double t = (k == sample_count - 1)
                             ? curve.t1()
                             : curve.t0()
                                   + (curve.t1() - curve.t0())
                                         * (static_cast<double>(k) / (sample_count - 1));
        std::snprintf(buf, sizeof buf, "%.17g", t);
        out << buf;
        const Eigen::VectorXd x = curve.position(t);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", x[i]);
            out << "," << buf;
        }
        out << "\n";
    }
}

} // namespace devmap
