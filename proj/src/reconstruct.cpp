#include "devmap/reconstruct.hpp"

#include "devmap/io.hpp"
#include "devmap/rng.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace devmap {

namespace {

constexpr double kStartTol = 1e-8; // curve start vs seed point or submanifold

// Nearest parameter of the seed embedding to x0: coarse scan plus golden
// section refinement of the squared chart distance.
double locate_on_submanifold(const Curve& embedding, const Eigen::VectorXd& x0)
{
    const double u0 = embedding.t0(), u1 = embedding.t1();
    const auto dist2 = [&](double u) { return (embedding.position(u) - x0).squaredNorm(); };

    const int scan = 512;
    double best_u = u0, best = dist2(u0);
    for (int i = 1; i <= scan; ++i) {
        const double u = u0 + (u1 - u0) * i / scan;
        const double d = dist2(u);
        if (d < best) {
            best = d;
            best_u = u;
        }
    }

    const double span = (u1 - u0) / scan;
    double lo = std::max(u0, best_u - span), hi = std::min(u1, best_u + span);
    const double gold = 0.5 * (3.0 - std::sqrt(5.0));
    double a = lo + gold * (hi - lo), b = hi - gold * (hi - lo);
    double fa = dist2(a), fb = dist2(b);
    while (hi - lo > 1e-13 * std::max(1.0, std::abs(u1 - u0))) {
        if (fa < fb) {
            hi = b;
            b = a;
            fb = fa;
            a = lo + gold * (hi - lo);
            fa = dist2(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = hi - gold * (hi - lo);
            fb = dist2(b);
        }
    }
    return 0.5 * (lo + hi);
}

SeedFrames frames_for_curve(const Problem& prob, const Curve& gamma)
{
    const Eigen::VectorXd x0 = gamma.position(gamma.t0());
    if (prob.point_seeded()) return prob.seed_frames();
    const Curve& emb = prob.submanifold_seed().embedding;
    const double u = locate_on_submanifold(emb, x0);
    const double offset = (emb.position(u) - x0).cwiseAbs().maxCoeff();
    if (offset > kStartTol)
        throw ValidationError("curve does not start on the seed submanifold: offset "
                              + format_double(offset) + " at parameter " + format_double(u));
    return prob.seed_frames_at(u);
}

// options.step is arc resolution: fast curves get proportionally finer
// parameter steps so the integration error stays speed-independent
double normalized_step(const Curve& gamma, const ReconstructOptions& options)
{
    double vmax = 0.0;
    const double t0 = gamma.t0(), t1 = gamma.t1();
    for (int i = 0; i <= 128; ++i)
        vmax = std::max(vmax, gamma.velocity(t0 + (t1 - t0) * i / 128.0).norm());
    return options.step / std::max(1.0, vmax);
}

PointReconstruction reconstruct_with_frames(const Problem& prob, const Curve& gamma,
                                            const SeedFrames& frames,
                                            const ReconstructOptions& options)
{
    const CurveDevelopment dev = develop_curve(prob, gamma, frames, normalized_step(gamma, options));
    PointReconstruction out;
    out.tau = tau_at(prob, dev, gamma.t1());
    out.point = out.tau.target;
    out.residuals = compatibility_residuals(prob, out.tau);
    return out;
}

void validate_options(const ReconstructOptions& options)
{
    if (!(options.step > 0.0))
        throw ValidationError("integration step must be positive");
    if (options.jobs < 1) throw ValidationError("worker count must be at least one");
}

std::string policy_name(CurvePolicy policy)
{
    switch (policy) {
    case CurvePolicy::CoordinatePolyline: return "coordinate-polyline";
    case CurvePolicy::Radial: return "radial";
    case CurvePolicy::NormalGeodesic: return "normal-geodesic";
    }
    return "unknown";
}

} // namespace

std::size_t GridSpec::total() const
{
    std::size_t total = 1;
    for (const int c : counts) total *= static_cast<std::size_t>(c);
    return total;
}

PointReconstruction reconstruct_point(const Problem& prob, const Curve& gamma,
                                      const ReconstructOptions& options)
{
    validate_options(options);
    if (!gamma.valid()) throw ValidationError("reconstruction needs a non-empty curve");
    if (gamma.dim() != prob.n())
        throw ValidationError("curve dimension does not match the base manifold");
    return reconstruct_with_frames(prob, gamma, frames_for_curve(prob, gamma), options);
}

SeedFrames start_frames_for(const Problem& prob, const Curve& gamma)
{
    if (!gamma.valid()) throw ValidationError("reconstruction needs a non-empty curve");
    if (gamma.dim() != prob.n())
        throw ValidationError("curve dimension does not match the base manifold");
    return frames_for_curve(prob, gamma);
}

CurveCheck check_along_curve(const Problem& prob, const Curve& gamma, int sample_count,
                             const ReconstructOptions& options)
{
    validate_options(options);
    if (sample_count < 1) throw ValidationError("residual check needs at least one sample");
    if (!gamma.valid()) throw ValidationError("reconstruction needs a non-empty curve");
    if (gamma.dim() != prob.n())
        throw ValidationError("curve dimension does not match the base manifold");

    const SeedFrames frames = frames_for_curve(prob, gamma);
    const CurveDevelopment dev =
        develop_curve(prob, gamma, frames, normalized_step(gamma, options));

    CurveCheck out;
    out.gram_defect = dev.development.gram_drift;
    const double t0 = gamma.t0(), t1 = gamma.t1();
    for (int i = 0; i < sample_count; ++i) {
        const double t = sample_count == 1 ? t1 : t0 + (t1 - t0) * i / (sample_count - 1);
        const TauMap tau = tau_at(prob, dev, t);
        ResidualReport rep = compatibility_residuals(prob, tau);
        rep.curve_id = i;
        out.max_gauss = std::max(out.max_gauss, rep.gauss);
        out.max_codazzi = std::max(out.max_codazzi, rep.codazzi);
        out.max_ricci = std::max(out.max_ricci, rep.ricci);
        if (i + 1 == sample_count) out.endpoint = tau.target;
        out.samples.push_back(std::move(rep));
    }
    return out;
}

std::string to_json(const CurveCheck& check)
{
    std::vector<std::string> samples;
    samples.reserve(check.samples.size());
    for (const auto& rep : check.samples) samples.push_back(to_json(rep));
    return json_object({{"endpoint", json_vector(check.endpoint)},
                        {"gram_defect", json_number(check.gram_defect)},
                        {"max_gauss", json_number(check.max_gauss)},
                        {"max_codazzi", json_number(check.max_codazzi)},
                        {"max_ricci", json_number(check.max_ricci)},
                        {"samples", json_array(samples)}});
}

Curve shoot_geodesic(const MetricField& metric, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& v, double step)
{
    const int n = metric.dim();
    if (x.size() != n || v.size() != n)
        throw ValidationError("geodesic data does not match the metric dimension");
    if (!(step > 0.0)) throw ValidationError("integration step must be positive");

    OdeSystem sys;
    sys.dim = 2 * n;
    sys.rhs = [&metric, n](double, const Eigen::VectorXd& y) {
        const Eigen::VectorXd pos = y.head(n), vel = y.tail(n);
        const std::vector<Eigen::MatrixXd> gm = christoffel(metric, pos);
        Eigen::VectorXd dy(2 * n);
        dy.head(n) = vel;
        for (int c = 0; c < n; ++c)
            dy[n + c] = -vel.dot(gm[static_cast<std::size_t>(c)] * vel);
        return dy;
    };

    Eigen::VectorXd y0(2 * n);
    y0 << x, v;
    IntegrateOptions io;
    io.step = step;
    return Curve::from_trajectory(rk4_integrate(sys, 0.0, 1.0, y0, io), 0, n, n);
}

Curve coordinate_polyline(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    if (a.size() != b.size())
        throw ValidationError("polyline endpoints must have matching dimensions");
    const int n = static_cast<int>(a.size());

    std::vector<Eigen::VectorXd> corners;
    std::vector<double> lengths;
    Eigen::VectorXd cur = a;
    for (int k = 0; k < n; ++k) {
        if (cur[k] == b[k]) continue;
        lengths.push_back(std::abs(b[k] - cur[k]));
        cur[k] = b[k];
        corners.push_back(cur);
    }

    Trajectory traj;
    const Eigen::VectorXd rest = Eigen::VectorXd::Zero(n);
    traj.append(0.0, a, rest);
    if (corners.empty()) {
        traj.append(1.0, a, rest);
    } else {
        // durations proportional to chart length; zero velocity at corners
        // makes each segment the unique cubic easing between its ends
        const double total = std::accumulate(lengths.begin(), lengths.end(), 0.0);
        double done = 0.0;
        for (std::size_t k = 0; k < corners.size(); ++k) {
            done += lengths[k];
            const double t = k + 1 == corners.size() ? 1.0 : done / total;
            traj.append(t, corners[k], rest);
        }
    }
    return Curve::from_trajectory(std::move(traj), 0, n, -1);
}

ImmersionSample reconstruct_grid(const Problem& prob, const GridSpec& grid,
                                 CurvePolicy policy, const ReconstructOptions& options)
{
    validate_options(options);
    const int axes = static_cast<int>(grid.counts.size());
    if (grid.lo.size() != grid.hi.size() || static_cast<int>(grid.lo.size()) != axes)
        throw ValidationError("grid needs one count per axis");
    for (int i = 0; i < axes; ++i) {
        if (grid.counts[static_cast<std::size_t>(i)] < 1)
            throw ValidationError("grid counts must be positive");
        if (!(grid.lo[i] <= grid.hi[i]))
            throw ValidationError("grid bounds must be ordered: lo <= hi");
    }

    if (policy == CurvePolicy::NormalGeodesic) {
        if (prob.point_seeded())
            throw ValidationError("the normal-geodesic policy needs a submanifold seed");
        if (axes != 2)
            throw ValidationError(
                "the normal-geodesic grid takes two axes: (parameter, offset)");
        const Curve& emb = prob.submanifold_seed().embedding;
        if (grid.lo[0] < emb.t0() - 1e-12 || grid.hi[0] > emb.t1() + 1e-12)
            throw ValidationError("the first grid axis must stay within the seed "
                                  "parameter range ["
                                  + format_double(emb.t0()) + ", " + format_double(emb.t1())
                                  + "]");
    } else {
        if (!prob.point_seeded())
            throw ValidationError("the " + policy_name(policy) + " policy needs a point seed");
        if (axes != prob.n())
            throw ValidationError("grid needs one axis per base coordinate");
    }

    ImmersionSample sample;
    sample.base_dim = prob.n();
    sample.ambient_dim = prob.ambient_dim();
    sample.counts = grid.counts;
    const std::size_t total = grid.total();
    sample.records.resize(total);

    // the point-seed frames never change across nodes
    SeedFrames shared_frames;
    if (policy != CurvePolicy::NormalGeodesic) shared_frames = prob.seed_frames();

    const auto node_at = [&](std::size_t idx) {
        Eigen::VectorXd node(axes);
        std::size_t rem = idx;
        for (int ax = axes - 1; ax >= 0; --ax) {
            const int c = grid.counts[static_cast<std::size_t>(ax)];
            const int i = static_cast<int>(rem % static_cast<std::size_t>(c));
            rem /= static_cast<std::size_t>(c);
            node[ax] = c == 1 ? grid.lo[ax] : grid.lo[ax] + i * (grid.hi[ax] - grid.lo[ax]) / (c - 1);
        }
        return node;
    };

    const auto run_node = [&](std::size_t idx) {
        ImmersionRecord& rec = sample.records[idx];
        rec.node = node_at(idx);
        try {
            SeedFrames frames = shared_frames;
            if (policy == CurvePolicy::NormalGeodesic) {
                const double u = rec.node[0];
                frames = prob.seed_frames_at(u);
                const Eigen::VectorXd dir = frames.base_tangent.col(1);
                rec.curve = shoot_geodesic(prob.base(), frames.p,
                                           rec.node[1] * dir, options.step);
            } else if (policy == CurvePolicy::Radial) {
                rec.curve = Curve::line(shared_frames.p, rec.node);
            } else {
                rec.curve = coordinate_polyline(shared_frames.p, rec.node);
            }
            rec.x = rec.curve.position(rec.curve.t1());

            PointReconstruction pr = reconstruct_with_frames(prob, rec.curve, frames, options);
            rec.point = std::move(pr.point);
            rec.tau = std::move(pr.tau);
            rec.residuals = std::move(pr.residuals);
            rec.residuals.curve_id = static_cast<int>(idx);
            rec.valid = true;
        } catch (const std::exception& e) {
            rec.valid = false;
            rec.error = e.what();
        }
    };

    const int jobs = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(options.jobs), std::max<std::size_t>(total, 1)));
    if (jobs <= 1) {
        for (std::size_t idx = 0; idx < total; ++idx) run_node(idx);
    } else {
        // disjoint index-addressed slots keep the assembly deterministic
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(jobs));
        for (int w = 0; w < jobs; ++w)
            workers.emplace_back([&, w] {
                for (std::size_t idx = static_cast<std::size_t>(w); idx < total;
                     idx += static_cast<std::size_t>(jobs))
                    run_node(idx);
            });
        for (auto& t : workers) t.join();
    }

    if (axes == 2) {
        const int c0 = grid.counts[0], c1 = grid.counts[1];
        const auto at = [&](int i, int j) { return i * c1 + j; };
        for (int i = 0; i + 1 < c0; ++i)
            for (int j = 0; j + 1 < c1; ++j) {
                const std::array<int, 4> corners{at(i, j), at(i + 1, j), at(i + 1, j + 1),
                                                 at(i, j + 1)};
                const bool ok = std::all_of(corners.begin(), corners.end(), [&](int c) {
                    return sample.records[static_cast<std::size_t>(c)].valid;
                });
                if (ok) sample.faces.push_back(corners);
            }
    }
    return sample;
}

int ImmersionSample::valid_count() const
{
    return static_cast<int>(
        std::count_if(records.begin(), records.end(), [](const auto& r) { return r.valid; }));
}

double ImmersionSample::max_gram_defect() const
{
    double worst = 0.0;
    for (const auto& r : records)
        if (r.valid) worst = std::max(worst, r.tau.gram_defect);
    return worst;
}

double ImmersionSample::max_residual() const
{
    double worst = 0.0;
    for (const auto& r : records)
        if (r.valid) worst = std::max(worst, r.residuals.max_residual());
    return worst;
}

AuditReport path_independence_audit(const Problem& prob, const Eigen::VectorXd& target,
                                    int k, std::uint64_t rng_seed,
                                    const ReconstructOptions& options)
{
    validate_options(options);
    if (k < 2) throw ValidationError("the path audit needs at least two curves");
    if (!prob.point_seeded())
        throw ValidationError("the path audit needs a point-seeded problem");
    if (target.size() != prob.n())
        throw ValidationError("audit target dimension does not match the base manifold");

    const Eigen::VectorXd p = prob.point_seed().p;
    const Eigen::VectorXd d = target - p;
    const double amp = 0.35 * d.norm();
    const Box& box = prob.base().domain();
    const int n = prob.n();

    Pcg32 rng(rng_seed);
    const auto in_chart = [&](const Curve& c) {
        if (box.empty()) return true;
        for (int i = 0; i <= 64; ++i)
            if (!box.contains(c.position(i / 64.0))) return false;
        return true;
    };

    AuditReport report;
    report.target = target;
    report.k = k;
    for (int i = 0; i < k; ++i) {
        Curve curve;
        bool found = false;
        for (int attempt = 0; attempt < 64 && !found; ++attempt) {
            Eigen::VectorXd c1 = p + d / 3.0, c2 = p + 2.0 * d / 3.0;
            for (int j = 0; j < n; ++j) {
                c1[j] += rng.uniform(-amp, amp);
                c2[j] += rng.uniform(-amp, amp);
            }
            curve = Curve::bezier3({p, c1, c2, target});
            found = in_chart(curve);
        }
        if (!found)
            throw ValidationError("path audit retry budget exhausted: sampled curves "
                                  "keep leaving the chart domain");
        PointReconstruction pr = reconstruct_point(prob, curve, options);
        pr.residuals.curve_id = i;
        report.endpoints.push_back(std::move(pr.point));
    }

    for (std::size_t i = 0; i < report.endpoints.size(); ++i)
        for (std::size_t j = i + 1; j < report.endpoints.size(); ++j)
            report.spread = std::max(report.spread,
                                     (report.endpoints[i] - report.endpoints[j]).norm());
    return report;
}

RigidAlignment align_rigid(const std::vector<Eigen::VectorXd>& a,
                           const std::vector<Eigen::VectorXd>& b)
{
    if (a.size() != b.size())
        throw ValidationError("alignment needs the same number of points on both sides");
    if (a.size() < 3) throw ValidationError("alignment needs at least three points");
    const Eigen::Index dim = a.front().size();
    for (const auto& set : {std::cref(a), std::cref(b)})
        for (const auto& pt : set.get())
            if (pt.size() != dim)
                throw ValidationError("alignment points must have matching dimensions");

    const double m = static_cast<double>(a.size());
    Eigen::VectorXd ca = Eigen::VectorXd::Zero(dim), cb = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca += a[i];
        cb += b[i];
    }
    ca /= m;
    cb /= m;

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t i = 0; i < a.size(); ++i) cov += (b[i] - cb) * (a[i] - ca).transpose();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::VectorXd signs = Eigen::VectorXd::Ones(dim);
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) signs[dim - 1] = -1.0;

    RigidAlignment out;
    out.rotation = svd.matrixU() * signs.asDiagonal() * svd.matrixV().transpose();
    out.translation = cb - out.rotation * ca;

    const Eigen::VectorXd sv = svd.singularValues();
    const double scale = sv.size() ? sv[0] : 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > std::max(1e-300, scale * 1e-9)) ++rank;
    out.degenerate = rank < dim - 1;

    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sq += (out.apply(a[i]) - b[i]).squaredNorm();
    out.rms = std::sqrt(sq / m);
    return out;
}

void write_immersion_obj(std::ostream& out, const ImmersionSample& sample)
{
    if (sample.ambient_dim != 3)
        throw ValidationError("OBJ export needs a three-dimensional ambient chart; "
                              "use CSV for other dimensions");

    std::vector<int> compact(sample.records.size(), 0);
    int next = 1; // OBJ indices are 1-based
    for (std::size_t i = 0; i < sample.records.size(); ++i) {
        const ImmersionRecord& rec = sample.records[i];
        if (!rec.valid) continue;
        compact[i] = next++;
        out << "v " << format_double(rec.point[0]) << ' ' << format_double(rec.point[1])
            << ' ' << format_double(rec.point[2]) << '\n';
    }
    for (const auto& face : sample.faces) {
        out << 'f';
        for (const int c : face) out << ' ' << compact[static_cast<std::size_t>(c)];
        out << '\n';
    }
}

void write_immersion_csv(std::ostream& out, const ImmersionSample& sample)
{
    for (int i = 0; i < sample.base_dim; ++i) out << 'x' << i + 1 << ',';
    for (int i = 0; i < sample.ambient_dim; ++i) out << 'f' << i + 1 << ',';
    out << "gauss,codazzi,ricci,valid\n";
    for (const auto& rec : sample.records) {
        for (int i = 0; i < sample.base_dim; ++i)
            out << (rec.x.size() == sample.base_dim ? format_double(rec.x[i]) : "nan") << ',';
        for (int i = 0; i < sample.ambient_dim; ++i)
            out << (rec.valid ? format_double(rec.point[i]) : "nan") << ',';
        if (rec.valid)
            out << format_double(rec.residuals.gauss) << ','
                << format_double(rec.residuals.codazzi) << ','
                << format_double(rec.residuals.ricci) << ",1\n";
        else
            out << "nan,nan,nan,0\n";
    }
}

std::string to_json(const AuditReport& report)
{
    std::vector<std::string> ends;
    ends.reserve(report.endpoints.size());
    for (const auto& e : report.endpoints) ends.push_back(json_vector(e));
    return json_object({{"target", json_vector(report.target)},
                        {"k", std::to_string(report.k)},
                        {"spread", json_number(report.spread)},
                        {"endpoints", json_array(ends)}});
}

} // namespace devmap
