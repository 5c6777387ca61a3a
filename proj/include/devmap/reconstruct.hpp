#pragma once

#include "devmap/fundeq.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace devmap {

struct ReconstructOptions {
    double step = 1e-3; // development integration step
    int jobs = 1;       // worker threads for grid reconstruction
};

// One developed curve from the seed: the immersion value at the curve's far
// end together with the frame map and the compatibility residuals there.
struct PointReconstruction {
    Eigen::VectorXd point; // ambient chart point
    TauMap tau;
    ResidualReport residuals;
};

// Develop gamma from the problem seed and evaluate the endpoint. The curve
// must start at the seed point, or on the seed submanifold (its parameter is
// located by projection onto the embedding).
PointReconstruction reconstruct_point(const Problem& prob, const Curve& gamma,
                                      const ReconstructOptions& options = {});

// Start frames for developing gamma: the point seed's frames, or the
// submanifold frames at the embedding parameter nearest the curve start
// (which must coincide with it within tolerance).
SeedFrames start_frames_for(const Problem& prob, const Curve& gamma);

// Residual sweep along one developed curve: the compatibility defects at
// evenly spaced parameters of a single development, their sups, the frame
// drift, and the developed endpoint.
struct CurveCheck {
    Eigen::VectorXd endpoint;            // ambient chart endpoint
    double gram_defect = 0.0;            // frame orthonormality drift
    std::vector<ResidualReport> samples; // curve_id holds the sample index
    double max_gauss = 0.0;
    double max_codazzi = 0.0;
    double max_ricci = 0.0;

    double max_residual() const { return std::max({max_gauss, max_codazzi, max_ricci}); }
};

CurveCheck check_along_curve(const Problem& prob, const Curve& gamma, int sample_count = 9,
                             const ReconstructOptions& options = {});

// {endpoint, gram_defect, max_gauss, max_codazzi, max_ricci, samples} with
// 17-significant-digit numbers.
std::string to_json(const CurveCheck& check);

// How reconstruct_grid routes a curve from the seed to a grid node.
enum class CurvePolicy {
    CoordinatePolyline, // axis-aligned segments smoothed to C^1 (default)
    Radial,             // straight chart segment from the seed point
    NormalGeodesic,     // base geodesics leaving the seed submanifold orthogonally
};

// Rectangular sampling lattice. For the point-seed policies the axes are the
// base chart coordinates; for the normal-geodesic policy the two axes are
// (submanifold parameter, signed normal offset). An axis with count 1
// collapses to its lower bound.
struct GridSpec {
    Eigen::VectorXd lo, hi;
    std::vector<int> counts;

    std::size_t total() const;
};

struct ImmersionRecord {
    bool valid = false;
    Eigen::VectorXd node;  // grid node in lattice axes
    Eigen::VectorXd x;     // base chart point reached (empty when the curve failed)
    Curve curve;           // curve the development followed
    Eigen::VectorXd point; // ambient chart point f(x)
    TauMap tau;
    ResidualReport residuals;
    std::string error; // failure note for invalid records
};

// Reconstructed immersion samples over a grid, row-major in the lattice with
// the last axis fastest. Faces are quads between neighbouring valid records
// (only emitted for two-axis lattices).
struct ImmersionSample {
    int base_dim = 0;
    int ambient_dim = 0;
    std::vector<int> counts;
    std::vector<ImmersionRecord> records;
    std::vector<std::array<int, 4>> faces;

    int valid_count() const;
    double max_gram_defect() const; // over valid records
    double max_residual() const;    // over valid records
};

ImmersionSample reconstruct_grid(const Problem& prob, const GridSpec& grid,
                                 CurvePolicy policy = CurvePolicy::CoordinatePolyline,
                                 const ReconstructOptions& options = {});

// Well-definedness audit: develop k random in-chart cubic curves with fixed
// endpoints (seed point to target) and measure the spread of the developed
// endpoints in the ambient chart.
struct AuditReport {
    Eigen::VectorXd target;
    int k = 0;
    double spread = 0.0; // max pairwise endpoint distance
    std::vector<Eigen::VectorXd> endpoints;
};

AuditReport path_independence_audit(const Problem& prob, const Eigen::VectorXd& target,
                                    int k, std::uint64_t rng_seed,
                                    const ReconstructOptions& options = {});

// Orthogonal Procrustes fit of the rigid motion b ~ rotation * a + translation
// over index-corresponding point sets. Proper rotations only; `degenerate`
// flags cross-covariance rank below dim - 1 (fit still returned).
struct RigidAlignment {
    Eigen::MatrixXd rotation;
    Eigen::VectorXd translation;
    double rms = 0.0;
    bool degenerate = false;

    Eigen::VectorXd apply(const Eigen::VectorXd& a) const { return rotation * a + translation; }
};

RigidAlignment align_rigid(const std::vector<Eigen::VectorXd>& a,
                           const std::vector<Eigen::VectorXd>& b);

// Geodesic of the metric from x with initial velocity v, over t in [0, 1].
Curve shoot_geodesic(const MetricField& metric, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& v, double step = 1e-3);

// C^1 path from a to b along axis-aligned segments (coordinates change one at
// a time, in order), each segment a cubic easing with zero endpoint velocity.
Curve coordinate_polyline(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Wavefront OBJ export of the valid records: `v x y z` then `f i j k l` with
// 1-based indices, LF endings, 17 significant digits. Ambient dim must be 3.
void write_immersion_obj(std::ostream& out, const ImmersionSample& sample);

// CSV export: header x1..xn,f1..fN,gauss,codazzi,ricci,valid; invalid records
// carry nan ambient columns.
void write_immersion_csv(std::ostream& out, const ImmersionSample& sample);

// {target, k, spread, endpoints} with 17-significant-digit numbers.
std::string to_json(const AuditReport& report);

} // namespace devmap
