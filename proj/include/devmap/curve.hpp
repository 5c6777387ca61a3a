#pragma once

#include "devmap/expr.hpp"
#include "devmap/errors.hpp"

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <memory>
#include <vector>

namespace devmap {

class Trajectory;

// Parametrized chart curve t -> x(t) with exact velocity and acceleration.
// Value semantics over a shared immutable implementation.
class Curve {
public:
    Curve() = default;

    // Components as one-variable fields; the parameter is x1.
    static Curve from_expressions(std::vector<ScalarField> comps, double t0, double t1);
    // Straight segment a -> b over [0, 1].
    static Curve line(Eigen::VectorXd a, Eigen::VectorXd b);
    // Cubic Bezier over [0, 1].
    static Curve bezier3(std::array<Eigen::VectorXd, 4> control);
    // Interpolating C^1 spline through samples (centripetal-free Catmull-Rom
    // tangents, one-sided at the ends); times must increase strictly.
    static Curve from_samples(std::vector<double> times, std::vector<Eigen::VectorXd> points);
    // Position read from state slots [position_offset, position_offset+dim) of
    // a trajectory; velocity from [velocity_offset, ...) when nonnegative,
    // otherwise from the interpolant derivative.
    static Curve from_trajectory(Trajectory traj, int position_offset, int dim,
                                 int velocity_offset = -1);

    bool valid() const { return impl_ != nullptr; }
    int dim() const;
    double t0() const;
    double t1() const;
    Eigen::VectorXd position(double t) const;
    Eigen::VectorXd velocity(double t) const;
    Eigen::VectorXd acceleration(double t) const;
    // Interior parameter values where smoothness may drop; integrators split here.
    std::vector<double> knots() const;
    // Same trace walked backwards: s -> x(t0 + t1 - s).
    Curve reversed() const;

    struct Impl; // internal polymorphic representation

private:
    explicit Curve(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

// Plain curve CSV: optional "t,x1,...,xn" header, one row per sample,
// values separated by commas. Reading interpolates with from_samples.
Curve read_curve_csv(std::istream& in);
// Writes sample_count uniform samples with 17 significant digits and LF endings.
void write_curve_csv(std::ostream& out, const Curve& curve, int sample_count);

} // namespace devmap
