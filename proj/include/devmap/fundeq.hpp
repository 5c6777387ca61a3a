#pragma once

#include "devmap/problem.hpp"
#include "devmap/transport.hpp"

#include <algorithm>
#include <memory>

namespace devmap {

// Shape operator of the prescribed data for a fiber vector xi (chart
// components): A_xi = g^{-1} H with H_ab = h^alpha_{ab} frak_{alpha beta}
// xi^beta, so that <A_xi X, Y>_g = <h(X,Y), xi>_frak.
Eigen::MatrixXd weingarten(const MetricField& base, const BundleSpec& bundle,
                           const SecondFundamentalField& h, const Eigen::VectorXd& xi,
                           const Eigen::VectorXd& x);

// The frame map induced by developing a curve: it sends chart components of
// T_xM + V_x at the curve point x to ambient chart components at the
// development target, by expanding in the transported orthonormal frame and
// re-emitting on its developed ambient image.
struct TauMap {
    Eigen::VectorXd x;             // base chart point on the curve
    Eigen::VectorXd target;        // ambient chart point of the development
    Eigen::MatrixXd map;           // N x (n+s) ambient images of the orthonormal frame
    Eigen::MatrixXd frame_tangent; // n x n transported tangent frame, chart columns
    Eigen::MatrixXd frame_bundle;  // s x s transported bundle frame, chart columns
    double gram_defect = 0.0;      // orthonormality defect of map in the ambient metric

    // Matrix acting on chart components of T + V directly:
    // map * blockdiag(frame_tangent, frame_bundle)^{-1}.
    Eigen::MatrixXd chart_matrix() const;
    Eigen::VectorXd apply(const Eigen::VectorXd& w) const; // w has n+s entries

    // The same map written in rotated orthonormal frames; qt and qv must be
    // orthogonal. Residuals and apply() are unchanged by reframing.
    TauMap reframed(const Eigen::MatrixXd& qt, const Eigen::MatrixXd& qv) const;
};

// A curve developed from problem data: the moving-frame transport along the
// curve plus the resulting ambient development.
struct CurveDevelopment {
    std::shared_ptr<const BaseTransport> transport;
    DevelopmentResult development;
};

// Develop a curve of the base chart into the ambient space, starting from the
// given frames (the curve must start at start.p). The parameterless-seed
// overload uses the problem's point seed.
CurveDevelopment develop_curve(const Problem& prob, const Curve& gamma,
                               const SeedFrames& start, double step = 1e-3);
CurveDevelopment develop_curve(const Problem& prob, const Curve& gamma,
                               double step = 1e-3);

// Frame map at parameter t of a developed curve, and at the far end of a
// curve developed from the problem's point seed.
TauMap tau_at(const Problem& prob, const CurveDevelopment& dev, double t);
TauMap tau_gamma(const Problem& prob, const Curve& gamma, double step = 1e-3);

// Pull an ambient curvature tensor back through the columns of phi:
// result(A,B,C,D) = sum src(P,Q,R,S) phi(P,A) phi(Q,B) phi(R,C) phi(S,D).
CurvatureValue pull_back_curvature(const CurvatureValue& src, const Eigen::MatrixXd& phi);

// Sup-norm defects of the three compatibility equations at one curve point,
// using the frame map tau to compare against the ambient curvature:
//   gauss:   R(X,Y,Z,W) - tau*Rt(X,Y,Z,W) - <h(X,W),h(Y,Z)> + <h(X,Z),h(Y,W)>
//   codazzi: <(D_X h)(Y,Z) - (D_Y h)(X,Z), xi> - tau*Rt(Z,xi,X,Y)
//   ricci:   RV(xi,eta,X,Y) - tau*Rt(xi,eta,X,Y) - <A_xi Y, A_eta X> + <A_eta Y, A_xi X>
// over chart basis vectors X,Y,Z,W of the tangent and xi,eta of the fiber.
struct ResidualReport {
    int curve_id = 0;
    Eigen::VectorXd point; // base chart point of evaluation
    double gauss = 0.0;
    double codazzi = 0.0;
    double ricci = 0.0;

    double max_residual() const { return std::max({gauss, codazzi, ricci}); }
};

ResidualReport compatibility_residuals(const Problem& prob, const TauMap& tau);

// {curve_id, point, gauss, codazzi, ricci} with 17-significant-digit numbers.
std::string to_json(const ResidualReport& report);

} // namespace devmap
