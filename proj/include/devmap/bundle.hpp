#pragma once

#include "devmap/metric.hpp"

#include <vector>

namespace devmap {

// Auxiliary vector bundle over the base chart: rank s, fiber metric
// frak_{alpha beta}, and connection coefficients omega^beta_{a alpha} with
//   D_{e_a} xi_alpha = omega^beta_{a alpha} xi_beta.
// Coefficients are grouped into matrices W_a with (W_a)(beta, alpha), so the
// components of a parallel fiber vector obey xi' = -(sum_a w_a W_a) xi along
// a curve with velocity w.
// Construction verifies metric compatibility
//   d_a frak = W_a^T frak + frak W_a
// at deterministic sample points and rejects incompatible data.
class BundleSpec {
public:
    // frak_upper: packed alpha <= beta fiber metric components (s(s+1)/2 fields
    // over the base chart). omega: omega[a] holds the s*s entries of W_a in
    // row-major order; empty omega means a flat connection.
    BundleSpec(int base_dim, int rank, std::vector<ScalarField> frak_upper,
               std::vector<std::vector<ScalarField>> omega, Box sample_box = {});
    static BundleSpec trivial(int base_dim, int rank);

    int base_dim() const noexcept { return base_dim_; }
    int rank() const noexcept { return rank_; }

    Eigen::MatrixXd fiber_metric(const Eigen::VectorXd& x) const;         // s x s, PD-checked
    Eigen::MatrixXd fiber_metric_partial(int c, const Eigen::VectorXd& x) const;
    Eigen::MatrixXd connection(int a, const Eigen::VectorXd& x) const;    // W_a
    Eigen::MatrixXd connection_partial(int c, int a, const Eigen::VectorXd& x) const;

private:
    int base_dim_;
    int rank_;
    std::vector<ScalarField> frak_;                      // packed alpha <= beta
    std::vector<std::vector<ScalarField>> dfrak_;        // [c][packed]
    std::vector<std::vector<ScalarField>> omega_;        // [a][beta * s + alpha]
    std::vector<std::vector<std::vector<ScalarField>>> domega_; // [c][a][beta * s + alpha]

    int packed(int a, int b) const
    {
        return a <= b ? a * rank_ - a * (a - 1) / 2 + (b - a)
                      : b * rank_ - b * (b - 1) / 2 + (a - b);
    }
    void check_compatibility(const Box& sample_box) const;
};

// Curvature of the bundle connection, lowered with the fiber metric:
//   result.at(alpha, beta, a, b) = <F_ab xi_alpha, xi_beta>,
//   F_ab = d_a W_b - d_b W_a + [W_a, W_b],
// antisymmetrized explicitly in (alpha, beta) so that the metric-compatible
// cancellation is exact (rank one gives identically zero).
CurvatureValue bundle_curvature(const BundleSpec& bundle, const Eigen::VectorXd& x);

// Prescribed second fundamental form h^alpha_{ab}, symmetric in (a, b),
// as scalar fields over the base chart.
class SecondFundamentalField {
public:
    // comps[alpha] holds the packed a <= b components (n(n+1)/2 fields each).
    SecondFundamentalField(int base_dim, int rank,
                           std::vector<std::vector<ScalarField>> comps);
    static SecondFundamentalField zero(int base_dim, int rank);

    int base_dim() const noexcept { return base_dim_; }
    int rank() const noexcept { return rank_; }
    bool is_zero() const noexcept { return zero_; }
    const ScalarField& component(int alpha, int a, int b) const;

    // value[alpha](a, b) = h^alpha_{ab}; exact mirror across the diagonal.
    std::vector<Eigen::MatrixXd> eval(const Eigen::VectorXd& x) const;
    std::vector<Eigen::MatrixXd> partial(int c, const Eigen::VectorXd& x) const;

private:
    int base_dim_;
    int rank_;
    bool zero_;
    std::vector<std::vector<ScalarField>> comps_;              // [alpha][packed]
    std::vector<std::vector<std::vector<ScalarField>>> d1_;    // [c][alpha][packed]

    int packed(int a, int b) const
    {
        return a <= b ? a * base_dim_ - a * (a - 1) / 2 + (b - a)
                      : b * base_dim_ - b * (b - 1) / 2 + (a - b);
    }
    std::vector<Eigen::MatrixXd>
    eval_packed(const std::vector<std::vector<ScalarField>>& fields,
                const Eigen::VectorXd& x) const;
};

} // namespace devmap
