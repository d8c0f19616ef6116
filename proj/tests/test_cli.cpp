#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "magopt/objective.hpp"
#include "magopt/sensitivity.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(MAGOPT_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 512> buf{};
    RunResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (fgets(buf.data(), buf.size(), pipe) != nullptr) result.output += buf.data();
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// small, fast run configuration
void write_small_config(const fs::path& path, const std::string& extra = "") {
    std::ofstream out(path);
    out << "[geometry]\nh = 0.008\n";
    out << "[objective]\nn_quadrature = 180\n";
    out << "[optimizer]\nmax_iters = 3\n";
    out << extra;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("solve writes fields, trace and summary") {
    TempDir tmp("magopt_cli_solve");
    write_small_config(tmp.path / "run.cfg");
    const RunResult r = run_cli("solve --config " + (tmp.path / "run.cfg").string() + " --out " +
                                (tmp.path / "out").string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(tmp.path / "out" / "u.vtk"));
    CHECK(fs::exists(tmp.path / "out" / "trace.csv"));
    CHECK(fs::exists(tmp.path / "out" / "summary.txt"));

    // printed J matches the summary file to all digits
    const std::string summary = slurp(tmp.path / "out" / "summary.txt");
    const auto line_end = summary.find('\n');
    const std::string j_line = summary.substr(0, line_end);
    CHECK(r.output.find(j_line) != std::string::npos);
}

TEST_CASE("solve works in both material modes") {
    TempDir tmp("magopt_cli_modes");
    write_small_config(tmp.path / "run.cfg");
    const RunResult lin = run_cli("solve --config " + (tmp.path / "run.cfg").string() +
                                  " --mode linear --out " + (tmp.path / "lin").string());
    const RunResult nl = run_cli("solve --config " + (tmp.path / "run.cfg").string() +
                                 " --mode nonlinear --out " + (tmp.path / "nl").string());
    CHECK(lin.exit_code == 0);
    CHECK(nl.exit_code == 0);
}

TEST_CASE("bad radius ordering exits with code 2 and names the field") {
    TempDir tmp("magopt_cli_badcfg");
    write_small_config(tmp.path / "run.cfg", "[geometry]\nr_stator_bore = 0.2\n");
    const RunResult r = run_cli("solve --config " + (tmp.path / "run.cfg").string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("r_stator_bore") != std::string::npos);
}

TEST_CASE("sensitivity export and nonlinear topo column") {
    TempDir tmp("magopt_cli_sens");
    write_small_config(tmp.path / "run.cfg");

    const RunResult lin = run_cli("sensitivity --config " + (tmp.path / "run.cfg").string() +
                                  " --out " + (tmp.path / "lin").string());
    CHECK(lin.exit_code == 0);
    const std::string lin_csv = slurp(tmp.path / "lin" / "sens.csv");
    CHECK(lin_csv.find("elem_id,centroid_x,centroid_y,onoff,topo") == 0);
    {
        std::istringstream lines(lin_csv);
        std::string header, row;
        std::getline(lines, header);
        std::getline(lines, row);
        CHECK(row.back() != ',');  // linear mode fills the topo column
    }

    const RunResult nl = run_cli("sensitivity --config " + (tmp.path / "run.cfg").string() +
                                 " --mode nonlinear --out " + (tmp.path / "nl").string());
    CHECK(nl.exit_code == 0);
    std::istringstream lines(slurp(tmp.path / "nl" / "sens.csv"));
    std::string header, row;
    std::getline(lines, header);
    int rows = 0;
    while (std::getline(lines, row)) {
        CHECK(row.back() == ',');  // empty topo column in nonlinear mode
        ++rows;
    }
    CHECK(rows > 0);
}

TEST_CASE("exported sensitivities survive an FD spot check") {
    using namespace magopt;
    TempDir tmp("magopt_cli_fd");
    write_small_config(tmp.path / "run.cfg");
    const RunResult r = run_cli("sensitivity --config " + (tmp.path / "run.cfg").string() +
                                " --out " + (tmp.path / "out").string());
    REQUIRE(r.exit_code == 0);

    std::map<int, double> exported;
    {
        std::istringstream lines(slurp(tmp.path / "out" / "sens.csv"));
        std::string header, row;
        std::getline(lines, header);
        while (std::getline(lines, row)) {
            std::replace(row.begin(), row.end(), ',', ' ');
            std::istringstream ss(row);
            int id;
            double cx, cy, onoff;
            ss >> id >> cx >> cy >> onoff;
            exported[id] = onoff;
        }
    }
    REQUIRE(exported.size() >= 5);

    // rebuild the same problem through the library and compare 5 elements
    const Mesh mesh = generate_motor_mesh(MotorGeometry{}, 0.008);
    const BHModel model = BHModel::analytic();
    const DesignState state = DesignState::all_on(mesh, MaterialMode::Linear);
    const GapCircle gap = build_gap_circle(mesh, 0.0525, 180);
    const TargetCurve target = TargetCurve::sine();
    const double h = 1e-3 * model.nu1();
    std::mt19937 gen(4242);
    std::vector<int> ids;
    for (const auto& [id, value] : exported) ids.push_back(id);
    std::shuffle(ids.begin(), ids.end(), gen);
    for (int k = 0; k < 5; ++k) {
        const int id = ids[static_cast<std::size_t>(k)];
        const double fd = sensitivity_fd_oracle(mesh, model, state, gap, target, id, h);
        CHECK(std::abs(exported.at(id) - fd) <=
              1e-3 * std::max(std::abs(fd), 1e-18));
    }
}

TEST_CASE("optimize: zero-iteration history and deterministic rerun") {
    TempDir tmp("magopt_cli_opt");
    write_small_config(tmp.path / "run.cfg", "[optimizer]\nmax_iters = 0\n");
    const RunResult r0 = run_cli("optimize --config " + (tmp.path / "run.cfg").string() +
                                 " --out " + (tmp.path / "it0").string());
    CHECK(r0.exit_code == 0);
    std::istringstream lines(slurp(tmp.path / "it0" / "history.csv"));
    std::string header, row;
    std::getline(lines, header);
    CHECK(header == "iter,J,switched,reverted");
    int rows = 0;
    while (std::getline(lines, row)) ++rows;
    CHECK(rows == 1);  // initial J only

    write_small_config(tmp.path / "run3.cfg");
    const RunResult a = run_cli("optimize --config " + (tmp.path / "run3.cfg").string() +
                                " --out " + (tmp.path / "a").string());
    const RunResult b = run_cli("optimize --config " + (tmp.path / "run3.cfg").string() +
                                " --out " + (tmp.path / "b").string());
    CHECK(a.exit_code == 0);
    CHECK(b.exit_code == 0);
    CHECK(slurp(tmp.path / "a" / "history.csv") == slurp(tmp.path / "b" / "history.csv"));
    CHECK(slurp(tmp.path / "a" / "trace.csv") == slurp(tmp.path / "b" / "trace.csv"));
}

TEST_CASE("solve with a mesh file override") {
    using namespace magopt;
    TempDir tmp("magopt_cli_mesh");
    write_small_config(tmp.path / "run.cfg");

    // a saved mesh fed back through --mesh reproduces the generator's run
    save_mesh_file((tmp.path / "motor.mesh").string(),
                   generate_motor_mesh(MotorGeometry{}, 0.008));
    const RunResult from_file = run_cli("solve --config " + (tmp.path / "run.cfg").string() +
                                        " --mesh " + (tmp.path / "motor.mesh").string() +
                                        " --out " + (tmp.path / "o1").string());
    CHECK(from_file.exit_code == 0);
    const RunResult generated = run_cli("solve --config " + (tmp.path / "run.cfg").string() +
                                        " --out " + (tmp.path / "o2").string());
    CHECK(generated.exit_code == 0);
    CHECK(slurp(tmp.path / "o1" / "trace.csv") == slurp(tmp.path / "o2" / "trace.csv"));

    const RunResult bad = run_cli("solve --config " + (tmp.path / "run.cfg").string() +
                                  " --mesh " + (tmp.path / "missing.mesh").string());
    CHECK(bad.exit_code == 2);
}

TEST_CASE("polarization subcommand") {
    const RunResult disk = run_cli("polarization disk 2 1 256");
    CHECK(disk.exit_code == 0);
    CHECK(disk.output.find("2.0943") != std::string::npos);  // 2 pi / 3
    CHECK(disk.output.find("relative error") != std::string::npos);

    const RunResult equal = run_cli("polarization disk 2 2 64");
    CHECK(equal.exit_code == 2);

    const RunResult refine = run_cli("polarization ellipse:2,1 2 1 32 --refine");
    CHECK(refine.exit_code == 0);
    CHECK(refine.output.find("n,P11,P22,P12,delta_rel") != std::string::npos);
    CHECK(refine.output.find("256,") != std::string::npos);

    const RunResult usage = run_cli("polarization");
    CHECK(usage.exit_code == 2);
}
