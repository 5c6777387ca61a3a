#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out, err;
};

const fs::path& scratch_dir()
{
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "devmap_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string path_of(const std::string& name) { return (scratch_dir() / name).string(); }

void write_file(const std::string& name, const std::string& text)
{
    std::ofstream f(path_of(name), std::ios::binary);
    f << text;
}

std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args)
{
    const std::string out = path_of("stdout.txt"), err = path_of("stderr.txt");
    const std::string cmd =
        std::string(DEVMAP_CLI_PATH) + " " + args + " > " + out + " 2> " + err;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
}

int count_lines_starting(const std::string& text, const std::string& prefix)
{
    int count = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(prefix, 0) == 0) ++count;
    return count;
}

// Value after `"key": ` in a one-line JSON document; nan when absent.
double extract_number(const std::string& json, const std::string& key)
{
    const std::string needle = "\"" + key + "\": ";
    const std::size_t pos = json.find(needle);
    if (pos == std::string::npos) return std::nan("");
    return std::strtod(json.c_str() + pos + needle.size(), nullptr);
}

std::vector<double> last_csv_row(const std::string& text)
{
    std::istringstream in(text);
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    std::vector<double> row;
    std::istringstream cells(last);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    return row;
}

void write_fixtures()
{
    static bool done = false;
    if (done) return;
    done = true;

    // plane immersed in 3-space as the z = 0 graph
    write_file("flat3.cfg", R"([base]
n = 2

[ambient]
dim = 3

[bundle]
s = 1

[seed]
p = 0 0
ptilde = 0 0 0
phi = 1 0 0  0 1 0  0 0 1

[options]
grid_lo = 0 0
grid_hi = 0.9 0.9
)");

    // plane onto itself, shifted by (0.3, 0.3)
    write_file("flat2.cfg", R"([base]
n = 2

[ambient]
dim = 2

[seed]
p = 0.2 0.3
ptilde = 0.5 0.6
phi = 1 0 0 1

[options]
vec = 0.3 -0.4
audit_target = 1.4 1.2
audit_count = 6
)");

    // unit sphere chart with inward normal data
    write_file("sphere.cfg", R"([base]
n = 2
g_1_1 = 1
g_2_2 = sin(x1)^2
domain_lo = 0.05 -10
domain_hi = 3.09 10

[ambient]
dim = 3

[bundle]
s = 1

[h]
h_1_1_1 = 1
h_1_2_2 = sin(x1)^2

[seed]
p = 1.5707963267948966 0
ptilde = 1 0 0
phi = 0 0 -1  0 1 0  -1 0 0

[options]
grid_lo = 0.6 0
grid_hi = 2.5 5.8
audit_target = 0.9 0.7
audit_count = 6
vec = 0.5 0.25 1
u = 0.5
family_1 = pi/2 + 0.25*x2*x1^2 - 0.1*x1
family_2 = (0.8 + 0.1*x2)*x1 + 0.2*x2*sin(x1)
)");

    write_file("noambient.cfg", "[base]\nn = 2\n");

    write_file("seg.csv", "t,x1,x2\n0,0.2,0.3\n0.5,0.55,0.05\n1,0.9,-0.4\n");
    write_file("equator.csv",
               "t,x1,x2\n0,1.5707963267948966,0\n0.5,1.5707963267948966,0.75\n"
               "1,1.5707963267948966,1.5\n");
    write_file("leaves.csv", "t,x1,x2\n0,1.5707963267948966,0\n1,3.5,0\n");
}

} // namespace

TEST_CASE("reconstruct writes the expected flat mesh")
{
    write_fixtures();
    const std::string mesh = path_of("flat.obj");
    const RunResult r = run_cli("reconstruct --config " + path_of("flat3.cfg")
                                + " --grid 4x4 --out " + mesh);
    CHECK(r.exit_code == 0);
    const std::string obj = read_file(mesh);
    CHECK(count_lines_starting(obj, "v ") == 16);
    CHECK(count_lines_starting(obj, "f ") == 9);
    CHECK(obj.rfind("v 0 0 0\n", 0) == 0);
    CHECK(obj.find("f 1 5 6 2\n") != std::string::npos);
    CHECK(r.err.find("16 of 16 nodes") != std::string::npos);
}

TEST_CASE("check reports sphere residuals and honours the tolerance")
{
    write_fixtures();
    const std::string report = path_of("check.json");
    const RunResult r = run_cli("check --config " + path_of("sphere.cfg") + " --curve "
                                + path_of("equator.csv") + " --out " + report);
    CHECK(r.exit_code == 0);
    const std::string json = read_file(report);
    CHECK(json.find("\"status\": \"pass\"") != std::string::npos);
    CHECK(extract_number(json, "max_gauss") <= 1e-7);
    CHECK(extract_number(json, "max_codazzi") <= 1e-7);
    CHECK(extract_number(json, "max_ricci") <= 1e-7);
    CHECK(extract_number(json, "tol") == 1e-6);

    // residuals are never negative, so a negative tolerance must report fail
    const RunResult strict = run_cli("check --config " + path_of("sphere.cfg") + " --curve "
                                     + path_of("equator.csv") + " --tol=-1");
    CHECK(strict.exit_code == 0);
    CHECK(strict.out.find("\"status\": \"fail\"") != std::string::npos);
}

TEST_CASE("develop writes trajectories and transport prints the carried vector")
{
    write_fixtures();
    const std::string traj = path_of("dev.csv");
    const RunResult r = run_cli("develop --config " + path_of("flat2.cfg") + " --curve "
                                + path_of("seg.csv") + " --out " + traj);
    CHECK(r.exit_code == 0);
    const std::vector<double> end = last_csv_row(read_file(traj));
    REQUIRE(end.size() == 3); // t, f1, f2
    CHECK(end[0] == 1.0);
    CHECK(std::abs(end[1] - 1.2) <= 1e-9);
    CHECK(std::abs(end[2] - (-0.1)) <= 1e-9);

    const RunResult refuse = run_cli("develop --config " + path_of("sphere.cfg") + " --curve "
                                     + path_of("equator.csv"));
    CHECK(refuse.exit_code == 1);
    CHECK(refuse.err.find("use gdevelop") != std::string::npos);

    const RunResult g = run_cli("gdevelop --config " + path_of("sphere.cfg") + " --curve "
                                + path_of("equator.csv") + " --out " + path_of("gdev.csv"));
    CHECK(g.exit_code == 0);
    const std::vector<double> gend = last_csv_row(read_file(path_of("gdev.csv")));
    REQUIRE(gend.size() == 4);
    CHECK(std::abs(gend[1] - std::cos(1.5)) <= 1e-6);
    CHECK(std::abs(gend[2] - std::sin(1.5)) <= 1e-6);
    CHECK(std::abs(gend[3]) <= 1e-6);

    const RunResult t = run_cli("transport --config " + path_of("flat2.cfg") + " --curve "
                                + path_of("seg.csv"));
    CHECK(t.exit_code == 0);
    CHECK(t.out == "0.29999999999999999 -0.40000000000000002\n");

    // tangent + fiber components ride along the equator unchanged
    const RunResult full = run_cli("transport --config " + path_of("sphere.cfg") + " --curve "
                                   + path_of("equator.csv"));
    CHECK(full.exit_code == 0);
    const std::vector<double> carried = last_csv_row(full.out);
    REQUIRE(carried.size() == 1); // no commas: single row of space-separated values
    std::istringstream cells(full.out);
    double a = 0, b = 0, c = 0;
    cells >> a >> b >> c;
    CHECK(std::abs(a - 0.5) <= 1e-9);
    CHECK(std::abs(b - 0.25) <= 1e-9);
    CHECK(std::abs(c - 1.0) <= 1e-9);
}

TEST_CASE("identical runs produce byte-identical output")
{
    write_fixtures();
    const std::string base = "reconstruct --config " + path_of("sphere.cfg") + " --grid 5x5";
    const RunResult once = run_cli(base);
    const RunResult twice = run_cli(base);
    CHECK(once.exit_code == 0);
    CHECK(once.out == twice.out);
    CHECK(!once.out.empty());

    const RunResult threaded = run_cli(base + " --jobs 3");
    CHECK(threaded.exit_code == 0);
    CHECK(threaded.out == once.out);

    const RunResult audit1 = run_cli("audit --config " + path_of("sphere.cfg") + " --seed 2026");
    const RunResult audit2 = run_cli("audit --config " + path_of("sphere.cfg") + " --seed 2026");
    CHECK(audit1.out == audit2.out);
}

TEST_CASE("variation reports the family defects")
{
    write_fixtures();
    const RunResult r = run_cli("variation --config " + path_of("sphere.cfg"));
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"command\": \"variation\"") != std::string::npos);
    CHECK(extract_number(r.out, "u") == 0.5);
    CHECK(extract_number(r.out, "max_defect") <= 1e-7);
}

TEST_CASE("audit reports the endpoint spread")
{
    write_fixtures();
    const RunResult r = run_cli("audit --config " + path_of("sphere.cfg") + " --seed 2026");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"seed\": 2026") != std::string::npos);
    CHECK(extract_number(r.out, "k") == 6.0);
    CHECK(extract_number(r.out, "spread") <= 1e-6);

    const RunResult flat = run_cli("audit --config " + path_of("flat2.cfg"));
    CHECK(flat.exit_code == 0);
    CHECK(extract_number(flat.out, "spread") <= 1e-10);
}

TEST_CASE("bad inputs exit one and numeric failures exit two")
{
    write_fixtures();
    const RunResult missing = run_cli("check --config " + path_of("noambient.cfg") + " --curve "
                                      + path_of("seg.csv"));
    CHECK(missing.exit_code == 1);
    CHECK(missing.err.find("missing section [ambient]") != std::string::npos);

    CHECK(run_cli("check --config " + path_of("sphere.cfg") + " --curve "
                  + path_of("equator.csv") + " --frobnicate")
              .exit_code
          == 1);
    CHECK(run_cli("frobnicate --config " + path_of("sphere.cfg")).exit_code == 1);
    CHECK(run_cli("check --curve " + path_of("equator.csv")).exit_code == 1);
    CHECK(run_cli("check --config " + path_of("sphere.cfg") + " --curve "
                  + path_of("nosuch.csv"))
              .exit_code
          == 1);

    const RunResult nogrid = run_cli("reconstruct --config " + path_of("flat2.cfg")
                                     + " --grid 3x3");
    CHECK(nogrid.exit_code == 1);
    CHECK(nogrid.err.find("'grid_lo' and 'grid_hi'") != std::string::npos);

    const RunResult notarget = run_cli("audit --config " + path_of("flat3.cfg"));
    CHECK(notarget.exit_code == 1);
    CHECK(notarget.err.find("missing key 'audit_target' in [options]") != std::string::npos);

    CHECK(run_cli("reconstruct --config " + path_of("flat3.cfg")
                  + " --grid 4x4 --policy zigzag")
              .exit_code
          == 1);
    CHECK(run_cli("reconstruct --config " + path_of("flat3.cfg") + " --grid 4x4 --format yaml")
              .exit_code
          == 1);
    CHECK(run_cli("reconstruct --config " + path_of("flat3.cfg") + " --grid 4xx4").exit_code
          == 1);

    const RunResult leaves = run_cli("gdevelop --config " + path_of("sphere.cfg") + " --curve "
                                     + path_of("leaves.csv"));
    CHECK(leaves.exit_code == 2);
    CHECK(leaves.err.find("outside the chart domain") != std::string::npos);
}

TEST_CASE("help exits cleanly")
{
    const RunResult r = run_cli("--help");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("reconstruct") != std::string::npos);
}
