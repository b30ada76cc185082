#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef _WIN32
#include <sys/wait.h>
#endif

// End-to-end checks that drive the installed binary.

namespace {

namespace fs = std::filesystem;

struct CommandResult {
    int exit_code;
    std::string output; // stdout + stderr
};

CommandResult run_cli(const std::string& args) {
    const fs::path dir = fs::temp_directory_path() / "ceopt_cli_tests";
    fs::create_directories(dir);
    const fs::path log = dir / "out.txt";
    const std::string cmd =
        std::string(CEOPT_CLI_BIN) + " " + args + " > " + log.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream buf;
    buf << in.rdbuf();
#ifdef _WIN32
    const int code = raw;
#else
    const int code = WEXITSTATUS(raw);
#endif
    return {code, buf.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path temp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ceopt_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("run reports the exact evaluation budget") {
    const fs::path out = temp_file("ce_run.json");
    const CommandResult r = run_cli(
        "run --method ce --mu 0,0 --cov-scale 200 --m 10 --m-elite 5 --k-max 10 --seed 0 --out " +
        out.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("evaluations 100") != std::string::npos);
    CHECK(fs::exists(out));
}

TEST_CASE("invalid elite count exits 2 and names the constraint") {
    const CommandResult r =
        run_cli("run --method ce --m 10 --m-elite 20 --out " + temp_file("x.json").string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("m_elite") != std::string::npos);
}

TEST_CASE("unknown flags are rejected") {
    const CommandResult r = run_cli("run --frobnicate 3");
    CHECK(r.exit_code == 2);
}

TEST_CASE("repeated seeded runs write byte-identical traces") {
    const fs::path a = temp_file("trace_a.json");
    const fs::path b = temp_file("trace_b.json");
    const std::string flags =
        "run --method ce-surrogate --mu 0,0 --cov-scale 200 --m 10 --m-elite 5 --k-max 10 "
        "--seed 7 --out ";
    CHECK(run_cli(flags + a.string()).exit_code == 0);
    CHECK(run_cli(flags + b.string()).exit_code == 0);
    const std::string ca = slurp(a);
    CHECK(!ca.empty());
    CHECK(ca == slurp(b));
}

TEST_CASE("sierra surface export honors the grid arithmetic") {
    const fs::path out = temp_file("surface.csv");
    const CommandResult r =
        run_cli("sierra --lo -15,-15 --hi 15,15 --step 0.25 --out " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("rows 14641") != std::string::npos);

    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x1,x2,S");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) {
        ++rows;
    }
    CHECK(rows == 14641);
}

TEST_CASE("sierra minimum lands at the center") {
    const fs::path out = temp_file("surface_min.csv");
    const CommandResult r =
        run_cli("sierra --lo -15,-15 --hi 15,15 --step 0.25 --out " + out.string());
    REQUIRE(r.exit_code == 0);
    // "min <v> at <x>,<y>"
    const auto at = r.output.find("min ");
    REQUIRE(at != std::string::npos);
    std::istringstream line(r.output.substr(at + 4));
    double v;
    std::string word, coords;
    line >> v >> word >> coords;
    const auto comma = coords.find(',');
    const double x = std::stod(coords.substr(0, comma));
    const double y = std::stod(coords.substr(comma + 1));
    CHECK(std::abs(x) <= 0.5);
    CHECK(std::abs(y) <= 0.5);
    CHECK(v < 0.0);
}

TEST_CASE("zero step is a usage error") {
    const CommandResult r = run_cli("sierra --step 0 --out " + temp_file("y.csv").string());
    CHECK(r.exit_code == 2);
}

TEST_CASE("oversized grids are a runtime error") {
    const CommandResult r =
        run_cli("sierra --lo -4000,-4000 --hi 4000,4000 --step 1 --out " +
                temp_file("z.csv").string());
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("grid too large") != std::string::npos);
}

TEST_CASE("unknown experiment id exits 2") {
    const CommandResult r = run_cli("experiment --id 9z");
    CHECK(r.exit_code == 2);
}

TEST_CASE("small experiment writes summary, curves and traces") {
    const fs::path dir = temp_file("exp_out");
    const CommandResult r =
        run_cli("experiment --id 1a --seeds 3 --k-max 3 --out " + dir.string());
    CHECK(r.exit_code == 0);

    const std::string summary = slurp(dir / "summary.csv");
    CHECK(summary.rfind("experiment,method,schedule,runtime_s,bv,bd\n", 0) == 0);
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 4); // header + 3 methods

    const std::string curves = slurp(dir / "curves.csv");
    CHECK(std::count(curves.begin(), curves.end(), '\n') == 1 + 3 * 3);
    CHECK(fs::exists(dir / "traces" / "1a_ce_uniform_0.json"));
}

TEST_CASE("single-seed curves have zero standard deviation") {
    const fs::path dir = temp_file("exp_single");
    const CommandResult r =
        run_cli("experiment --id 1a --seeds 1 --k-max 2 --out " + dir.string());
    REQUIRE(r.exit_code == 0);
    std::istringstream in(slurp(dir / "curves.csv"));
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        const auto last_comma = line.rfind(',');
        CHECK(line.substr(last_comma + 1) == "0");
    }
}
