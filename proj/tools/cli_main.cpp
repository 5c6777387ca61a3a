// Command-line front end: reads a problem configuration, dispatches to the
// library, and writes trajectories (CSV), meshes (OBJ/CSV/JSON), or reports
// (JSON). Exit codes: 0 success, 1 bad input, 2 numeric failure.

#include "CLI11.hpp"

#include "devmap/config.hpp"
#include "devmap/io.hpp"
#include "devmap/reconstruct.hpp"
#include "devmap/transport.hpp"
#include "devmap/variation.hpp"

#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

using namespace devmap;

namespace {

ProblemConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    return ProblemConfig::parse(in);
}

Curve load_curve(const std::string& path, int n)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open curve file: " + path);
    const Curve curve = read_curve_csv(in);
    if (curve.dim() != n)
        throw ValidationError("curve file has " + std::to_string(curve.dim())
                              + " components but the base chart has " + std::to_string(n)
                              + " coordinates");
    return curve;
}

void emit(const std::string& out_path, const std::string& text)
{
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ValidationError("cannot open output file: " + out_path);
    out << text;
}

std::vector<int> parse_grid_shape(const std::string& text)
{
    std::vector<int> counts;
    int value = 0;
    bool any = false;
    for (const char ch : text) {
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            value = value * 10 + (ch - '0');
            any = true;
        } else if (ch == 'x' && any) {
            counts.push_back(value);
            value = 0;
            any = false;
        } else {
            throw ValidationError("grid shape must look like 33x17, got '" + text + "'");
        }
    }
    if (!any) throw ValidationError("grid shape must look like 33x17, got '" + text + "'");
    counts.push_back(value);
    for (const int c : counts)
        if (c < 1) throw ValidationError("grid counts must be positive");
    return counts;
}

CurvePolicy parse_policy(const std::string& name)
{
    if (name == "polyline") return CurvePolicy::CoordinatePolyline;
    if (name == "radial") return CurvePolicy::Radial;
    if (name == "normal") return CurvePolicy::NormalGeodesic;
    throw ValidationError("unknown curve policy '" + name
                          + "': expected polyline, radial, or normal");
}

int cmd_develop(const Problem& prob, const Curve& gamma, double step, const std::string& out,
                bool generalized)
{
    if (!generalized && prob.s() != 0)
        throw ValidationError("the develop command handles rank-zero bundles only; "
                              "use gdevelop for bundle-valued data");
    const SeedFrames frames = start_frames_for(prob, gamma);
    const CurveDevelopment dev = develop_curve(prob, gamma, frames, step);

    std::ostringstream text;
    write_curve_csv(text, Curve::from_trajectory(dev.development.trajectory, 0, prob.ambient_dim()),
                    201);
    emit(out, text.str());
    std::cerr << (generalized ? "gdevelop" : "develop") << ": step " << format_double(step)
              << ", frame drift " << format_double(dev.development.gram_drift) << "\n";
    return 0;
}

int cmd_transport(const Problem& prob, const ProblemConfig& cfg, const Curve& gamma,
                  double step, const std::string& out)
{
    const std::vector<double> vec = cfg.numbers("options", "vec");
    const int n = prob.n(), s = prob.s();
    const double t0 = gamma.t0(), t1 = gamma.t1();

    Eigen::VectorXd result;
    if (static_cast<int>(vec.size()) == n) {
        const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(vec.data(), n);
        result = parallel_transport(prob.base(), gamma, v, t0, t1, step);
    } else if (static_cast<int>(vec.size()) == n + s && s > 0) {
        const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(vec.data(), n + s);
        result.resize(n + s);
        result.head(n) = parallel_transport(prob.base(), gamma, v.head(n), t0, t1, step);
        result.tail(s) = bundle_transport(prob.bundle(), gamma, v.tail(s), t0, t1, step);
    } else {
        throw ValidationError("key 'vec' in [options] needs " + std::to_string(n) + " (tangent) or "
                              + std::to_string(n + s) + " (tangent + fiber) numbers, got "
                              + std::to_string(vec.size()));
    }

    std::string text;
    for (Eigen::Index i = 0; i < result.size(); ++i) {
        if (i) text += ' ';
        text += format_double(result[i]);
    }
    text += '\n';
    emit(out, text);
    return 0;
}

int cmd_check(const Problem& prob, const Curve& gamma, double step, double tol,
              const std::string& out)
{
    ReconstructOptions ropts;
    ropts.step = step;
    const CurveCheck check = check_along_curve(prob, gamma, 9, ropts);
    const bool pass = check.max_residual() <= tol;
    emit(out, json_object({{"command", json_string("check")},
                           {"step", json_number(step)},
                           {"tol", json_number(tol)},
                           {"status", json_string(pass ? "pass" : "fail")},
                           {"report", to_json(check)}})
                  + "\n");
    return 0;
}

int cmd_variation(const Problem& prob, const ProblemConfig& cfg, double step,
                  const std::string& out)
{
    VariationOptions vopts;
    vopts.step = step;
    const double u = cfg.number("options", "u", 0.0);
    const CurveFamily family = read_curve_family(cfg, prob.n());
    const AnsatzReport report = verify_ansatz(prob, family, u, vopts);
    emit(out, json_object({{"command", json_string("variation")},
                           {"u", json_number(u)},
                           {"step", json_number(step)},
                           {"max_u_alpha", json_number(report.max_u_alpha)},
                           {"max_u_diff", json_number(report.max_u_diff)},
                           {"max_xab_diff", json_number(report.max_xab_diff)},
                           {"max_xalphabeta_diff", json_number(report.max_xalphabeta_diff)},
                           {"max_xaalpha_diff", json_number(report.max_xaalpha_diff)},
                           {"max_defect", json_number(report.max_defect())}})
                  + "\n");
    return 0;
}

std::string immersion_json(const ImmersionSample& sample, double step)
{
    std::vector<std::string> counts;
    for (const int c : sample.counts) counts.push_back(std::to_string(c));
    std::vector<std::string> records;
    records.reserve(sample.records.size());
    for (const auto& rec : sample.records) {
        std::vector<std::pair<std::string, std::string>> fields{
            {"node", json_vector(rec.node)}, {"valid", rec.valid ? "true" : "false"}};
        if (rec.valid) {
            fields.emplace_back("x", json_vector(rec.x));
            fields.emplace_back("point", json_vector(rec.point));
            fields.emplace_back("residuals", to_json(rec.residuals));
        } else {
            fields.emplace_back("error", json_string(rec.error));
        }
        records.push_back(json_object(fields));
    }
    return json_object({{"command", json_string("reconstruct")},
                        {"step", json_number(step)},
                        {"counts", json_array(counts)},
                        {"valid", std::to_string(sample.valid_count())},
                        {"max_residual", json_number(sample.max_residual())},
                        {"gram_defect", json_number(sample.max_gram_defect())},
                        {"records", json_array(records)}})
           + "\n";
}

int cmd_reconstruct(const Problem& prob, const ProblemConfig& cfg, const std::string& shape,
                    const std::string& policy, const std::string& format, double step, int jobs,
                    const std::string& out)
{
    GridSpec grid;
    grid.counts = parse_grid_shape(shape);
    if (!cfg.entry("options", "grid_lo") || !cfg.entry("options", "grid_hi"))
        throw ValidationError("the reconstruct command needs 'grid_lo' and 'grid_hi' in [options]");
    const std::vector<double> lo = cfg.numbers("options", "grid_lo");
    const std::vector<double> hi = cfg.numbers("options", "grid_hi");
    if (lo.size() != grid.counts.size() || hi.size() != grid.counts.size())
        throw ValidationError("grid_lo and grid_hi in [options] need one number per grid axis");
    grid.lo = Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
    grid.hi = Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));

    ReconstructOptions ropts;
    ropts.step = step;
    ropts.jobs = jobs;
    const ImmersionSample sample = reconstruct_grid(prob, grid, parse_policy(policy), ropts);

    if (format == "obj") {
        std::ostringstream text;
        write_immersion_obj(text, sample);
        emit(out, text.str());
    } else if (format == "csv") {
        std::ostringstream text;
        write_immersion_csv(text, sample);
        emit(out, text.str());
    } else if (format == "json") {
        emit(out, immersion_json(sample, step));
    } else {
        throw ValidationError("unknown output format '" + format + "': expected obj, csv, or json");
    }
    std::cerr << "reconstruct: " << sample.valid_count() << " of " << grid.total()
              << " nodes, step " << format_double(step) << ", max residual "
              << format_double(sample.max_residual()) << ", frame drift "
              << format_double(sample.max_gram_defect()) << "\n";
    return 0;
}

int cmd_audit(const Problem& prob, const ProblemConfig& cfg, double step, std::uint64_t seed,
              const std::string& out)
{
    const std::vector<double> target = cfg.numbers("options", "audit_target");
    if (static_cast<int>(target.size()) != prob.n())
        throw ValidationError("key 'audit_target' in [options] needs " + std::to_string(prob.n())
                              + " numbers, got " + std::to_string(target.size()));
    const int k = cfg.integer("options", "audit_count", 10);

    ReconstructOptions ropts;
    ropts.step = step;
    const AuditReport report = path_independence_audit(
        prob, Eigen::Map<const Eigen::VectorXd>(target.data(), prob.n()), k, seed, ropts);
    emit(out, json_object({{"command", json_string("audit")},
                           {"step", json_number(step)},
                           {"seed", std::to_string(seed)},
                           {"report", to_json(report)}})
                  + "\n");
    return 0;
}

int run(int argc, char** argv)
{
    CLI::App app{"curve developments and immersion reconstruction from metric data"};
    app.require_subcommand(1);

    std::string config_path, curve_path, grid_shape, out_path;
    std::string policy = "polyline", format = "obj";
    double step_flag = 1e-3, tol_flag = 1e-6;
    std::uint64_t seed_flag = 0;
    int jobs_flag = 1;

    const auto add_common = [&](CLI::App* sub, bool needs_curve) {
        sub->add_option("--config", config_path, "problem configuration file")->required();
        if (needs_curve) sub->add_option("--curve", curve_path, "curve CSV file")->required();
        sub->add_option("--step", step_flag, "integration step");
        sub->add_option("--out", out_path, "output file (default stdout)");
        return sub;
    };
    CLI::App* develop =
        add_common(app.add_subcommand("develop", "classical development of a curve"), true);
    CLI::App* gdevelop =
        add_common(app.add_subcommand("gdevelop", "generalized development of a curve"), true);
    CLI::App* transport = add_common(
        app.add_subcommand("transport", "parallel transport of [options] vec along a curve"),
        true);
    CLI::App* check = add_common(
        app.add_subcommand("check", "compatibility residuals along a curve"), true);
    check->add_option("--tol", tol_flag, "pass/fail residual tolerance");
    CLI::App* variation = add_common(
        app.add_subcommand("variation", "variation defects over the [options] curve family"),
        false);
    CLI::App* reconstruct = add_common(
        app.add_subcommand("reconstruct", "sample the immersion over a grid"), false);
    reconstruct->add_option("--grid", grid_shape, "lattice shape, e.g. 33x17")->required();
    reconstruct->add_option("--policy", policy, "curve routing: polyline, radial, or normal");
    reconstruct->add_option("--format", format, "output format: obj, csv, or json");
    reconstruct->add_option("--jobs", jobs_flag, "worker threads");
    CLI::App* audit = add_common(
        app.add_subcommand("audit", "endpoint spread over random curves to [options] audit_target"),
        false);
    audit->add_option("--seed", seed_flag, "rng seed for the sampled curves");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    CLI::App* sub = app.get_subcommands().front();

    const ProblemConfig cfg = load_config(config_path);
    const Problem prob = build_problem(cfg);

    const double step =
        sub->count("--step") ? step_flag : cfg.number("options", "step", 1e-3);
    if (!(step > 0.0)) throw ValidationError("integration step must be positive");

    if (sub == develop || sub == gdevelop)
        return cmd_develop(prob, load_curve(curve_path, prob.n()), step, out_path,
                           sub == gdevelop);
    if (sub == transport)
        return cmd_transport(prob, cfg, load_curve(curve_path, prob.n()), step, out_path);
    if (sub == check) {
        const double tol = sub->count("--tol") ? tol_flag : cfg.number("options", "tol", 1e-6);
        return cmd_check(prob, load_curve(curve_path, prob.n()), step, tol, out_path);
    }
    if (sub == variation) return cmd_variation(prob, cfg, step, out_path);
    if (sub == reconstruct) {
        const int jobs = sub->count("--jobs") ? jobs_flag : cfg.integer("options", "jobs", 1);
        return cmd_reconstruct(prob, cfg, grid_shape, policy, format, step, jobs, out_path);
    }
    const std::uint64_t seed =
        sub->count("--seed") ? seed_flag : cfg.unsigned64("options", "seed", 0);
    return cmd_audit(prob, cfg, step, seed, out_path);
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const EvalError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
