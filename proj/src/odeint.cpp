#include "devmap/odeint.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace devmap {

namespace {

std::string state_string(double t, const Eigen::VectorXd& y)
{
    std::ostringstream os;
    os << "t=" << t << ", y=(";
    for (Eigen::Index i = 0; i < y.size(); ++i) os << (i ? "," : "") << y[i];
    os << ")";
    return os.str();
}

Eigen::VectorXd eval_rhs(const OdeSystem& sys, double t, const Eigen::VectorXd& y)
{
    Eigen::VectorXd f = sys.rhs(t, y);
    if (f.size() != y.size())
        throw NumericError("right-hand side returned wrong dimension at "
                           + state_string(t, y));
    if (!f.allFinite())
        throw NumericError("non-finite right-hand side at " + state_string(t, y));
    return f;
}

// Interior breakpoints merged with both ends, strictly increasing.
std::vector<double> segment_bounds(double t0, double t1, const std::vector<double>& breaks)
{
    if (!(t1 > t0)) throw ValidationError("integration requires t1 > t0");
    std::vector<double> bounds;
    bounds.push_back(t0);
    std::vector<double> sorted = breaks;
    std::sort(sorted.begin(), sorted.end());
    for (double b : sorted)
        if (b > t0 && b < t1 && b > bounds.back() + 1e-14 * (t1 - t0)) bounds.push_back(b);
    bounds.push_back(t1);
    return bounds;
}

} // namespace

int Trajectory::segment_index(double& t) const
{
    if (times_.size() < 2) {
        if (times_.size() == 1 && t == times_[0]) return 0;
        throw EvalError("trajectory has no segments");
    }
    const double lo = times_.front();
    const double hi = times_.back();
    const double slack = 1e-9 * std::max(1.0, hi - lo);
    if (t < lo - slack || t > hi + slack)
        throw EvalError("time " + std::to_string(t) + " is outside the trajectory range ["
                        + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    t = std::clamp(t, lo, hi);
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    int i = static_cast<int>(it - times_.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(times_.size()) - 2);
    return i;
}

Eigen::VectorXd Trajectory::eval(double t) const
{
    const int i = segment_index(t);
    if (t == times_[static_cast<std::size_t>(i)]) return states_[static_cast<std::size_t>(i)];
    if (t == times_[static_cast<std::size_t>(i) + 1])
        return states_[static_cast<std::size_t>(i) + 1];
    const double ta = times_[static_cast<std::size_t>(i)];
    const double tb = times_[static_cast<std::size_t>(i) + 1];
    const double h = tb - ta;
    const double s = (t - ta) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * states_[static_cast<std::size_t>(i)]
           + (h10 * h) * slopes_[static_cast<std::size_t>(i)]
           + h01 * states_[static_cast<std::size_t>(i) + 1]
           + (h11 * h) * slopes_[static_cast<std::size_t>(i) + 1];
}

Eigen::VectorXd Trajectory::derivative(double t) const
{
    const int i = segment_index(t);
    const double ta = times_[static_cast<std::size_t>(i)];
    const double tb = times_[static_cast<std::size_t>(i) + 1];
    const double h = tb - ta;
    const double s = (t - ta) / h;
    const double s2 = s * s;
    const double d00 = (6.0 * s2 - 6.0 * s) / h;
    const double d10 = 3.0 * s2 - 4.0 * s + 1.0;
    const double d01 = (-6.0 * s2 + 6.0 * s) / h;
    const double d11 = 3.0 * s2 - 2.0 * s;
    return d00 * states_[static_cast<std::size_t>(i)] + d10 * slopes_[static_cast<std::size_t>(i)]
           + d01 * states_[static_cast<std::size_t>(i) + 1]
           + d11 * slopes_[static_cast<std::size_t>(i) + 1];
}

Eigen::VectorXd Trajectory::second_derivative(double t) const
{
    const int i = segment_index(t);
    const double ta = times_[static_cast<std::size_t>(i)];
    const double tb = times_[static_cast<std::size_t>(i) + 1];
    const double h = tb - ta;
    const double s = (t - ta) / h;
    const double d00 = (12.0 * s - 6.0) / (h * h);
    const double d10 = (6.0 * s - 4.0) / h;
    const double d01 = (-12.0 * s + 6.0) / (h * h);
    const double d11 = (6.0 * s - 2.0) / h;
    return d00 * states_[static_cast<std::size_t>(i)] + d10 * slopes_[static_cast<std::size_t>(i)]
           + d01 * states_[static_cast<std::size_t>(i) + 1]
           + d11 * slopes_[static_cast<std::size_t>(i) + 1];
}

void Trajectory::append(double t, Eigen::VectorXd y, Eigen::VectorXd f)
{
    if (!times_.empty() && !(t > times_.back()))
        throw ValidationError("trajectory knots must have increasing times");
    times_.push_back(t);
    states_.push_back(std::move(y));
    slopes_.push_back(std::move(f));
}

Trajectory rk4_integrate(const OdeSystem& sys, double t0, double t1, Eigen::VectorXd y0,
                         const IntegrateOptions& options)
{
    if (options.step <= 0.0) throw ValidationError("step size must be positive");
    if (y0.size() != sys.dim) throw ValidationError("initial state has wrong dimension");

    const auto bounds = segment_bounds(t0, t1, options.breakpoints);
    Trajectory traj;
    Eigen::VectorXd y = std::move(y0);
    if (options.post_step) options.post_step(t0, y);
    Eigen::VectorXd f = eval_rhs(sys, t0, y);
    traj.append(t0, y, f);

    for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
        const double a = bounds[seg];
        const double b = bounds[seg + 1];
        const double span = b - a;
        const int m = std::max(1, static_cast<int>(std::ceil(span / options.step - 1e-12)));
        double t = a;
        for (int i = 1; i <= m; ++i) {
            const double t_next = (i == m) ? b : a + span * (static_cast<double>(i) / m);
            const double h = t_next - t;
            const Eigen::VectorXd k1 = f;
            const Eigen::VectorXd k2 = eval_rhs(sys, t + 0.5 * h, y + (0.5 * h) * k1);
            const Eigen::VectorXd k3 = eval_rhs(sys, t + 0.5 * h, y + (0.5 * h) * k2);
            const Eigen::VectorXd k4 = eval_rhs(sys, t_next, y + h * k3);
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!y.allFinite())
                throw NumericError("non-finite state at " + state_string(t_next, y));
            if (options.post_step) options.post_step(t_next, y);
            f = eval_rhs(sys, t_next, y);
            traj.append(t_next, y, f);
            t = t_next;
        }
    }
    return traj;
}

Trajectory dp45_integrate(const OdeSystem& sys, double t0, double t1, Eigen::VectorXd y0,
                          const AdaptiveOptions& options)
{
    if (options.abs_tol <= 0.0 || options.rel_tol < 0.0)
        throw ValidationError("tolerances must be positive");
    if (options.initial_step <= 0.0) throw ValidationError("initial step must be positive");
    if (y0.size() != sys.dim) throw ValidationError("initial state has wrong dimension");

    // Dormand-Prince 5(4) coefficients.
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    const auto bounds = segment_bounds(t0, t1, options.breakpoints);
    const double min_step = 1e-14 * (t1 - t0);

    Trajectory traj;
    Eigen::VectorXd y = std::move(y0);
    if (options.post_step) options.post_step(t0, y);
    Eigen::VectorXd f = eval_rhs(sys, t0, y);
    traj.append(t0, y, f);

    double h = options.initial_step;
    if (options.max_step > 0.0) h = std::min(h, options.max_step);

    for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
        const double b = bounds[seg + 1];
        double t = bounds[seg];
        while (t < b) {
            bool clipped = false;
            double step = h;
            if (t + step >= b) {
                step = b - t;
                clipped = true;
            }
            if (step < min_step && !clipped)
                throw NumericError("adaptive step size underflow at "
                                   + state_string(t, y));

            const Eigen::VectorXd k1 = f;
            const Eigen::VectorXd k2 = eval_rhs(sys, t + c2 * step, y + step * (a21 * k1));
            const Eigen::VectorXd k3 =
                eval_rhs(sys, t + c3 * step, y + step * (a31 * k1 + a32 * k2));
            const Eigen::VectorXd k4 =
                eval_rhs(sys, t + c4 * step, y + step * (a41 * k1 + a42 * k2 + a43 * k3));
            const Eigen::VectorXd k5 = eval_rhs(
                sys, t + c5 * step, y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const double t_next = clipped ? b : t + step;
            const Eigen::VectorXd k6 =
                eval_rhs(sys, t_next,
                         y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            Eigen::VectorXd y_next =
                y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            if (!y_next.allFinite())
                throw NumericError("non-finite state at " + state_string(t_next, y_next));
            const Eigen::VectorXd k7 = eval_rhs(sys, t_next, y_next);
            const Eigen::VectorXd err =
                step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            double ratio = 0.0;
            for (Eigen::Index i = 0; i < err.size(); ++i) {
                const double scale =
                    options.abs_tol
                    + options.rel_tol * std::max(std::abs(y[i]), std::abs(y_next[i]));
                ratio = std::max(ratio, std::abs(err[i]) / scale);
            }

            double factor = ratio > 0.0 ? 0.9 * std::pow(ratio, -0.2) : 5.0;
            factor = std::clamp(factor, 0.2, 5.0);
            double h_new = step * factor;
            if (options.max_step > 0.0) h_new = std::min(h_new, options.max_step);

            if (ratio <= 1.0) {
                y = std::move(y_next);
                if (options.post_step) {
                    options.post_step(t_next, y);
                    f = eval_rhs(sys, t_next, y);
                } else {
                    f = k7;
                }
                traj.append(t_next, y, f);
                t = t_next;
                h = h_new;
            } else {
                h = h_new;
                if (h < min_step)
                    throw NumericError("adaptive step size underflow at "
                                       + state_string(t, y));
            }
        }
    }
    return traj;
}

} // namespace devmap
