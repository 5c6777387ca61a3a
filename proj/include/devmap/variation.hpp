#pragma once

#include "devmap/fundeq.hpp"
#include "devmap/problem.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>

namespace devmap {

// One-parameter family u -> gamma_u of base curves sharing one parameter
// range. For point-seeded problems every curve must start at the seed point;
// for submanifold-seeded problems start(u) gives the submanifold parameter of
// gamma_u's start point, so the curves fan out along the seed.
struct CurveFamily {
    std::function<Curve(double)> curve;
    double u0 = 0.0;
    double u1 = 1.0;
    std::function<double(double)> start; // submanifold-seeded problems only
};

struct VariationOptions {
    double step = 1e-3;     // integration step for transports and variations
    double du = 1e-6;       // finite-difference width for u-derivatives
    double du_mixed = 1e-4; // width for the mixed u,t coefficient derivative
};

// Variation of the base transports at one family parameter: U(t) holds the
// frame coefficients of the u-derivative of gamma_u(t), and the rotation
// blocks hold <D_u E_a, E_b> and <D_u B_alpha, B_beta> for the transported
// frames. State layout: U (n), U' (n), tangent rotation (n*n, row-major),
// bundle rotation (s*s, row-major).
struct BaseVariationResult {
    int n = 0;
    int s = 0;
    std::shared_ptr<const BaseTransport> center;
    Trajectory trajectory;
    double antisymmetry_defect = 0.0; // sup over knots of the rotation blocks

    Eigen::VectorXd u_at(double t) const;
    Eigen::VectorXd u_prime_at(double t) const;
    Eigen::MatrixXd tangent_rotation_at(double t) const;
    Eigen::MatrixXd bundle_rotation_at(double t) const;
    // Chart components of the variation field: E(t) U(t).
    Eigen::VectorXd chart_variation_at(double t) const;
};

// Variation of the generalized developments: U(t) holds the ambient frame
// coefficients of the u-derivative of the developed point, and the rotation
// matrix holds <D_u F_A, F_B> for the full moving frame. State layout:
// U (n+s), U' (n+s), rotation ((n+s)^2, row-major).
struct GVariationResult {
    int n = 0;
    int s = 0;
    CurveDevelopment center;
    Trajectory trajectory;
    double antisymmetry_defect = 0.0;

    Eigen::VectorXd u_at(double t) const;
    Eigen::VectorXd u_prime_at(double t) const;
    Eigen::MatrixXd frame_rotation_at(double t) const;
    // Ambient chart components of the variation field: F(t) U(t).
    Eigen::VectorXd chart_variation_at(double t) const;
};

BaseVariationResult integrate_base_variation(const Problem& prob, const CurveFamily& family,
                                             double u, const VariationOptions& options = {});
GVariationResult integrate_gvariation(const Problem& prob, const CurveFamily& family,
                                      double u, const VariationOptions& options = {});

// Defects of the block reduction that ties the two systems together: the
// development variation should stay tangential (U_alpha = 0), match the base
// variation on the tangent block, reproduce both rotation blocks, and fill
// the mixed block with h^alpha_{ab} U_b. All five are sup norms over the
// shared time grid; they vanish exactly when the prescribed data is the
// genuine first/second fundamental form of an immersion.
struct AnsatzReport {
    double max_u_alpha = 0.0;
    double max_u_diff = 0.0;
    double max_xab_diff = 0.0;
    double max_xalphabeta_diff = 0.0;
    double max_xaalpha_diff = 0.0;
    double max_defect() const;
};

AnsatzReport verify_ansatz(const BaseVariationResult& base, const GVariationResult& dev);
AnsatzReport verify_ansatz(const Problem& prob, const CurveFamily& family, double u,
                           const VariationOptions& options = {});

} // namespace devmap
