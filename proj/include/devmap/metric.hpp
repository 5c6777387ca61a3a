#pragma once

#include "devmap/expr.hpp"

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <vector>

namespace devmap {

// Axis-aligned chart domain box. Empty bounds mean unrestricted.
struct Box {
    Eigen::VectorXd lo, hi;

    bool empty() const { return lo.size() == 0; }
    bool contains(const Eigen::VectorXd& x) const
    {
        if (empty()) return true;
        for (Eigen::Index i = 0; i < lo.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }
    Eigen::VectorXd center() const { return 0.5 * (lo + hi); }
};

// Riemannian metric in a single chart: components g_ab as scalar fields,
// stored for a <= b and mirrored. First and second symbolic derivatives are
// cached at construction for Christoffel symbols and curvature.
class MetricField {
public:
    MetricField(int dim, std::vector<ScalarField> upper, Box domain = {});
    static MetricField euclidean(int dim);

    int dim() const noexcept { return dim_; }
    const Box& domain() const noexcept { return domain_; }
    bool is_constant() const noexcept { return constant_; }
    const ScalarField& component(int a, int b) const;

    // Metric value at x, checked symmetric positive definite (Cholesky).
    Eigen::MatrixXd eval(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd inverse(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd partial(int c, const Eigen::VectorXd& x) const;         // d_c g
    Eigen::MatrixXd partial2(int c, int d, const Eigen::VectorXd& x) const; // d_c d_d g

    // Inner product of chart vectors at x.
    double inner(const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

    void check_in_domain(const Eigen::VectorXd& x) const; // EvalError when outside

private:
    int dim_;
    bool constant_;
    Box domain_;
    std::vector<ScalarField> comps_;               // packed a <= b
    std::vector<std::vector<ScalarField>> d1_;     // [c][packed]
    std::vector<std::vector<std::vector<ScalarField>>> d2_; // [c][d][packed]
    Eigen::MatrixXd const_value_;

    int packed(int a, int b) const { return a <= b ? a * dim_ - a * (a - 1) / 2 + (b - a)
                                                   : b * dim_ - b * (b - 1) / 2 + (a - b); }
    Eigen::MatrixXd eval_packed(const std::vector<ScalarField>& fields, const Eigen::VectorXd& x) const;
};

// Dense fully-lowered curvature components at a point. dims = extent of each
// index slot; Riemann uses {n,n,n,n}, bundle curvature {s,s,n,n}.
struct CurvatureValue {
    std::array<int, 4> dims{};
    std::vector<double> data;

    CurvatureValue() = default;
    CurvatureValue(int d0, int d1, int d2, int d3)
        : dims{d0, d1, d2, d3},
          data(static_cast<std::size_t>(d0) * d1 * d2 * d3, 0.0) {}

    double& at(int i, int j, int k, int l)
    {
        return data[static_cast<std::size_t>(((i * dims[1] + j) * dims[2] + k)) * dims[3] + l];
    }
    double at(int i, int j, int k, int l) const
    {
        return data[static_cast<std::size_t>(((i * dims[1] + j) * dims[2] + k)) * dims[3] + l];
    }
    double sup_norm() const;
};

// Christoffel symbols of the second kind: result[c](a,b) = Gamma^c_{ab},
// bit-identically symmetric in (a,b).
std::vector<Eigen::MatrixXd> christoffel(const MetricField& metric, const Eigen::VectorXd& x);

// Riemann curvature, fully lowered, with the convention
//   R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
//   R(X,Y,Z,W) = <R(X,Y)Z, W>,
// so result.at(a,b,c,d) = R(e_a, e_b, e_c, e_d) in chart basis.
CurvatureValue riemann_curvature(const MetricField& metric, const Eigen::VectorXd& x);

// The ambient manifold is just a metric over chart coordinates of dimension n+s.
using AmbientSpec = MetricField;

} // namespace devmap
