#pragma once

#include "devmap/errors.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace devmap {

// First-order system y' = f(t, y). The right-hand side may throw EvalError;
// non-finite values it returns are turned into NumericError by the steppers.
struct OdeSystem {
    int dim = 0;
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> rhs;
};

// Dense solution: knots (t_i, y_i, y'_i) joined by cubic Hermite segments.
// Evaluation at a knot time reproduces the stored state bit for bit.
class Trajectory {
public:
    Trajectory() = default;

    double t0() const { return times_.front(); }
    double t1() const { return times_.back(); }
    int knot_count() const { return static_cast<int>(times_.size()); }
    const std::vector<double>& times() const { return times_; }
    const Eigen::VectorXd& state(int i) const { return states_[static_cast<std::size_t>(i)]; }
    const Eigen::VectorXd& slope(int i) const { return slopes_[static_cast<std::size_t>(i)]; }

    // Interpolated state; t may overshoot the ends by a relative 1e-9 slack
    // (clamped), anything further is an error.
    Eigen::VectorXd eval(double t) const;
    // Time derivatives of the interpolant.
    Eigen::VectorXd derivative(double t) const;
    Eigen::VectorXd second_derivative(double t) const;

    void append(double t, Eigen::VectorXd y, Eigen::VectorXd f);

private:
    std::vector<double> times_;
    std::vector<Eigen::VectorXd> states_;
    std::vector<Eigen::VectorXd> slopes_;

    int segment_index(double& t) const;
};

// Classical fixed-step integration: each span between consecutive breakpoints
// is cut into ceil(span / step) equal steps, so breakpoint times appear as
// knots exactly. post_step may project the state after every accepted step
// (its result is what gets stored and differentiated).
struct IntegrateOptions {
    double step = 1e-3;
    std::vector<double> breakpoints;
    std::function<void(double, Eigen::VectorXd&)> post_step;
};

Trajectory rk4_integrate(const OdeSystem& sys, double t0, double t1, Eigen::VectorXd y0,
                         const IntegrateOptions& options = {});

// Embedded 4(5) pair with proportional step control. A step is accepted when
// every component satisfies |err_i| <= abs_tol + rel_tol * |y_i|; the next
// step scales by 0.9 * ratio^(-1/5) clamped to [0.2, 5]. Steps shrinking
// below 1e-14 * (t1 - t0) raise NumericError.
struct AdaptiveOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double initial_step = 1e-3;
    double max_step = 0.0; // 0 means uncapped
    std::vector<double> breakpoints;
    std::function<void(double, Eigen::VectorXd&)> post_step;
};

Trajectory dp45_integrate(const OdeSystem& sys, double t0, double t1, Eigen::VectorXd y0,
                          const AdaptiveOptions& options = {});

} // namespace devmap
