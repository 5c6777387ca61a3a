#pragma once

#include "devmap/bundle.hpp"
#include "devmap/curve.hpp"
#include "devmap/metric.hpp"
#include "devmap/odeint.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace devmap {

// Throws ValidationError unless frame^T gram frame is the identity within tol
// in the sup norm. `what` names the offending frame in the message.
void check_orthonormal(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& frame,
                       const std::string& what, double tol = 1e-12);

// Completes `seed_columns` (possibly zero columns, assumed independent) to a
// square frame orthonormal under the inner product `gram`, by metric
// Gram-Schmidt over the seed columns followed by the chart axes in order.
// Deterministic; axes that are numerically dependent on the span are skipped.
Eigen::MatrixXd gram_schmidt_frame(const Eigen::MatrixXd& gram,
                                   const Eigen::MatrixXd& seed_columns);

// Parallel transport of a tangent vector along gamma under the Levi-Civita
// connection: V'^c = -Gamma^c_{db} gamma'^d V^b. The returned trajectory
// stores the chart components of V over the curve parameter.
Trajectory parallel_transport(const MetricField& metric, const Curve& gamma,
                              const Eigen::VectorXd& v0, double step = 1e-3);

// Transport of a fiber vector along gamma under the bundle connection:
// xi' = -(sum_a gamma'^a W_a) xi.
Trajectory bundle_transport(const BundleSpec& bundle, const Curve& gamma,
                            const Eigen::VectorXd& xi0, double step = 1e-3);

// Point-to-point variants: move the vector from curve parameter `from` to
// `to`, in either direction, and return the transported components.
Eigen::VectorXd parallel_transport(const MetricField& metric, const Curve& gamma,
                                   const Eigen::VectorXd& v0, double from, double to,
                                   double step);
Eigen::VectorXd bundle_transport(const BundleSpec& bundle, const Curve& gamma,
                                 const Eigen::VectorXd& xi0, double from, double to,
                                 double step);

// Orthonormal start frames for transports and developments.
struct FrameSeed {
    Eigen::MatrixXd tangent; // n x n, column a = E_a chart components
    Eigen::MatrixXd bundle;  // s x s, column j = fiber frame components (0x0 if rank 0)
};

// Everything the base side contributes along one curve: parallel tangent
// frame, bundle frame, the curve velocity coefficients in the moving frame,
// and the second fundamental form re-expressed in the moving frames. All time
// derivatives are exact (transport equations and symbolic field derivatives),
// not finite differences.
class BaseTransport {
public:
    BaseTransport(MetricField metric, BundleSpec bundle, SecondFundamentalField h,
                  Curve gamma, FrameSeed seed, double step = 1e-3);

    int n() const noexcept { return n_; }
    int s() const noexcept { return s_; }
    double t0() const { return gamma_.t0(); }
    double t1() const { return gamma_.t1(); }
    const Curve& curve() const noexcept { return gamma_; }
    const MetricField& metric() const noexcept { return metric_; }
    const BundleSpec& bundle() const noexcept { return bundle_; }
    const SecondFundamentalField& second_fundamental() const noexcept { return h_; }
    const FrameSeed& seed() const noexcept { return seed_; }

    Eigen::MatrixXd tangent_frame(double t) const; // n x n, columns E_a(t)
    Eigen::MatrixXd bundle_frame(double t) const;  // s x s

    // v(t): coefficients of gamma'(t) in the transported tangent frame.
    Eigen::VectorXd coefficients(double t) const;
    Eigen::VectorXd coefficient_derivative(double t) const;

    // h in the moving frames: value[alpha](a,b) = <h(E_a,E_b), xi^alpha(t)>
    // coefficients with respect to the transported bundle frame.
    std::vector<Eigen::MatrixXd> h_in_frame(double t) const;
    std::vector<Eigen::MatrixXd> h_in_frame_derivative(double t) const;

    // Frame orthonormality defect along the whole transport.
    double gram_drift() const;

    std::vector<double> breakpoints() const; // curve knots, for downstream integrators

private:
    MetricField metric_;
    BundleSpec bundle_;
    SecondFundamentalField h_;
    Curve gamma_;
    FrameSeed seed_;
    int n_, s_;
    Trajectory traj_; // state: tangent frame column-major (n*n), then bundle (s*s)
};

// Coefficient data driving a development: v(t) and, for the generalized
// version, the moving-frame second fundamental form h(t) (s matrices n x n).
struct DevelopmentCoefficients {
    int n = 0;
    int s = 0;
    double t0 = 0.0;
    double t1 = 1.0;
    std::function<Eigen::VectorXd(double)> v;
    std::function<std::vector<Eigen::MatrixXd>(double)> h; // may be empty when s == 0
    std::vector<double> breakpoints;
};

// Moving-frame data of BaseTransport packaged for the development integrators.
DevelopmentCoefficients coefficients_closure(std::shared_ptr<const BaseTransport> base);

struct DevelopOptions {
    double step = 1e-3;
    bool reorthonormalize = false;      // metric Gram-Schmidt after every step
    double seed_tolerance = 1e-8;       // allowed orthonormality defect of the seed
    std::vector<double> extra_breakpoints;
};

// Development output: ambient curve and moving ambient frame, dense in t.
struct DevelopmentResult {
    int ambient_dim = 0; // N
    int frame_count = 0; // n (classical) or n + s (generalized)
    Trajectory trajectory; // state: x (N), then frame rows row-major (frame_count x N)
    double gram_drift = 0.0; // sup over knots of |frame gram - seed gram|

    Eigen::VectorXd point_at(double t) const;
    Eigen::MatrixXd frame_at(double t) const; // N x frame_count, columns = frame vectors
    Eigen::VectorXd point() const { return point_at(trajectory.t1()); }
    Eigen::MatrixXd frame() const { return frame_at(trajectory.t1()); }
    // Push coefficients through the moving frame: frame_at(t) * c.
    Eigen::VectorXd push(double t, const Eigen::VectorXd& coefficients) const;
};

// Classical development (no bundle): the ambient curve follows the seed frame
// image of gamma', and the frame is parallel along the result. Requires
// coefficients.s == 0. seed_frame is N x n, columns orthonormal under the
// ambient metric at p_tilde.
DevelopmentResult develop(const AmbientSpec& ambient, const DevelopmentCoefficients& coefficients,
                          const Eigen::VectorXd& p_tilde, const Eigen::MatrixXd& seed_frame,
                          const DevelopOptions& options = {});

// Generalized development: the n + s frame vectors rotate into each other
// through P_{a alpha} = sum_b h^alpha_{ab} v_b on top of parallel transport,
// and the ambient curve follows the tangent block. seed_frame is N x (n+s).
DevelopmentResult generalized_develop(const AmbientSpec& ambient,
                                      const DevelopmentCoefficients& coefficients,
                                      const Eigen::VectorXd& p_tilde,
                                      const Eigen::MatrixXd& seed_frame,
                                      const DevelopOptions& options = {});

// Frame-coefficient transport along a development: expands w in the frame at
// t1, re-emits the same coefficients on the frame at t2. An isometry of the
// ambient metric; when h vanishes it coincides with parallel transport along
// the developed curve. The composition over successive parameter values is
// exact by construction (one shared frame trajectory).
Eigen::VectorXd d_map(const DevelopmentResult& dev, double t1, double t2,
                      const Eigen::VectorXd& w);

} // namespace devmap
