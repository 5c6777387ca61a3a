#pragma once

#include "devmap/bundle.hpp"
#include "devmap/curve.hpp"
#include "devmap/metric.hpp"

#include <variant>
#include <vector>

namespace devmap {

// Starting data at a single base point: phi maps chart components of
// T_pM + V_p (first n entries tangent, last s entries fiber) to ambient chart
// components at p_tilde, and must be a linear isometry between the product
// metric g + frak at p and the ambient metric at p_tilde.
struct PointSeed {
    Eigen::VectorXd p;       // base chart point, n entries
    Eigen::VectorXd p_tilde; // ambient chart point
    Eigen::MatrixXd phi;     // ambient_dim x (n+s)
};

// One-parameter seed submanifold: a curve S(u) in the base chart together
// with its prescribed image curve in the ambient chart, over one shared
// parameter interval. psi extends the embedding correspondence to all of
// T_SM + V|_S: an ambient_dim x (n+s) matrix of scalar fields in u (row-major
// storage), acting on chart components. Construction validates that psi is a
// fiberwise isometry, maps S'(u) to the ambient velocity, and satisfies the
// second-fundamental-form compatibility along S (the pulled-back ambient
// form of the image equals sigma + h restricted to S).
struct SubmanifoldSeed {
    Curve embedding;              // u -> base chart
    Curve ambient_embedding;      // u -> ambient chart, same parameter range
    std::vector<ScalarField> psi; // row-major ambient_dim x (n+s), fields of u
    // Optional override of the submanifold's second fundamental form in the
    // adapted frame: n-1 fields sigma^mu(u) for the unit S-tangent; empty
    // means derive it from the embedding and the base connection.
    std::vector<ScalarField> sigma;
};

// Orthonormal start data for developments: base frames at the start point and
// their ambient images.
struct SeedFrames {
    Eigen::VectorXd p;             // base chart start point
    Eigen::VectorXd p_tilde;       // ambient start point
    Eigen::MatrixXd base_tangent;  // n x n, metric-orthonormal columns
    Eigen::MatrixXd base_bundle;   // s x s, fiber-metric-orthonormal columns
    Eigen::MatrixXd ambient_frame; // N x (n+s), ambient-orthonormal columns
};

// A complete reconstruction problem: base metric, auxiliary bundle,
// prescribed second fundamental form, target ambient space, and the seed
// identifying where developments start. Construction validates all dimension
// relations and the isometry/compatibility conditions of the seed.
class Problem {
public:
    Problem(MetricField base, BundleSpec bundle, SecondFundamentalField h, AmbientSpec ambient,
            PointSeed seed);
    Problem(MetricField base, BundleSpec bundle, SecondFundamentalField h, AmbientSpec ambient,
            SubmanifoldSeed seed);

    int n() const noexcept { return base_.dim(); }
    int s() const noexcept { return bundle_.rank(); }
    int ambient_dim() const noexcept { return ambient_.dim(); }

    const MetricField& base() const noexcept { return base_; }
    const BundleSpec& bundle() const noexcept { return bundle_; }
    const SecondFundamentalField& h() const noexcept { return h_; }
    const AmbientSpec& ambient() const noexcept { return ambient_; }

    bool point_seeded() const noexcept { return std::holds_alternative<PointSeed>(seed_); }
    const PointSeed& point_seed() const;             // ValidationError on wrong seed kind
    const SubmanifoldSeed& submanifold_seed() const; // ValidationError on wrong seed kind

    // Orthonormal start frames. The point-seed variant is parameterless; the
    // submanifold variant takes the S-parameter and adapts the base tangent
    // frame so its first column is the unit S-tangent.
    SeedFrames seed_frames() const;
    SeedFrames seed_frames_at(double u) const;

    // psi evaluated at u as a matrix.
    Eigen::MatrixXd psi_matrix(double u) const;

    // Metric speed |S'(u)| of the seed submanifold.
    double submanifold_speed(double u) const;

    // Second fundamental form of S in the base, contracted with the unit
    // S-tangent twice and expressed in the adapted sub-normal frame
    // (n-1 entries). Uses the override fields when supplied, otherwise
    // derives from the embedding and the base connection.
    Eigen::VectorXd submanifold_sigma(double u) const;

private:
    MetricField base_;
    BundleSpec bundle_;
    SecondFundamentalField h_;
    AmbientSpec ambient_;
    std::variant<PointSeed, SubmanifoldSeed> seed_;

    void validate_shapes() const;
    void validate_point_seed() const;
    void validate_submanifold_seed() const;
    Eigen::VectorXd derived_sigma(double u) const;
};

} // namespace devmap
