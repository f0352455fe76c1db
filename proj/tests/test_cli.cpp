#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qoc/protocol.hpp"
#include "qoc/protocol_io.hpp"

using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
using namespace qoc;

namespace {

constexpr double kLn2 = 0.6931471805599453094;

// Scratch directory removed on scope exit; every test writes only under here.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        std::string name = (std::filesystem::temp_directory_path() / "qoc_cli_XXXXXX").string();
        if (!mkdtemp(name.data())) throw std::runtime_error("mkdtemp failed");
        path = name;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string sub(const char* leaf) const { return (path / leaf).string(); }
};

struct CliResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string& args, const TempDir& dir, const std::string& env = "") {
    const std::string capture = dir.sub("cli_output.txt");
    const std::string cmd =
        env + "\"" QOC_CLI_BIN "\" " + args + " > \"" + capture + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(capture);
    std::stringstream text;
    text << in.rdbuf();
    return {WEXITSTATUS(status), text.str()};
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    const std::vector<double>& col(const std::string& name) const {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return columns[k];
        throw std::runtime_error("no column named " + name);
    }
};

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    Table table;
    std::string line, field;
    if (!std::getline(in, line)) throw std::runtime_error("empty table: " + path);
    std::stringstream header(line);
    while (std::getline(header, field, ',')) table.header.push_back(field);
    table.columns.resize(table.header.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::size_t c = 0;
        while (std::getline(row, field, ',')) table.columns.at(c++).push_back(std::stod(field));
        if (c != table.header.size()) throw std::runtime_error("ragged row in " + path);
    }
    return table;
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("optimize heating converges and writes its artifacts", "[cli]") {
    TempDir dir;
    const auto result = run_cli("optimize --functional heating --out \"" + dir.sub("run") + "\"", dir);
    INFO(result.output);
    REQUIRE(result.exit_code == 0);
    CHECK_THAT(result.output, ContainsSubstring("converged = true"));

    for (const char* leaf : {"protocol.csv", "trajectory.csv", "history.csv", "summary.json"})
        REQUIRE(std::filesystem::exists(std::filesystem::path(dir.sub("run")) / leaf));

    const auto summary = read_json(dir.sub("run") + "/summary.json");
    CHECK(summary.at("converged").get<bool>());
    CHECK_FALSE(summary.at("stalled").get<bool>());
    CHECK(summary.at("iterations").get<int>() <= 50);
    CHECK(summary.at("final_J").get<double>() == Approx(1.0).epsilon(0.02));
    CHECK(summary.at("initial_J").get<double>() == Approx(1.5 * kLn2).margin(1e-4));
    CHECK(summary.at("final_residual").get<double>() < 1e-9);
    CHECK(summary.at("config").at("functional").get<std::string>() == "heating");

    const Table history = read_table(dir.sub("run") + "/history.csv");
    const auto& cost = history.col("J");
    for (std::size_t k = 1; k < cost.size(); ++k) REQUIRE(cost[k] <= cost[k - 1]);
}

TEST_CASE("simulate replays an optimized protocol to the same endpoint", "[cli]") {
    TempDir dir;
    auto result = run_cli(
        "optimize --functional heating --grid-n 500 --out \"" + dir.sub("run") + "\"", dir);
    REQUIRE(result.exit_code == 0);

    result = run_cli("simulate --protocol \"" + dir.sub("run") + "/protocol.csv\" --out \"" +
                         dir.sub("replay") + "\"",
                     dir);
    INFO(result.output);
    REQUIRE(result.exit_code == 0);
    CHECK_THAT(result.output, ContainsSubstring("(admissible)"));

    const auto optimized = read_table(dir.sub("run") + "/trajectory.csv").col("z");
    const auto replayed = read_table(dir.sub("replay") + "/trajectory.csv").col("z");
    REQUIRE(optimized.size() == replayed.size());
    CHECK(std::abs(optimized.back() - replayed.back()) <= 1e-12);
}

TEST_CASE("simulate a constant protocol that spends the whole budget", "[cli]") {
    TempDir dir;
    write_protocol_csv(dir.sub("constant.csv"), constant_guess(AdmissibilityTarget{}, 1.0, 400));
    const auto result = run_cli(
        "simulate --protocol \"" + dir.sub("constant.csv") + "\" --out \"" + dir.sub("sim") + "\"",
        dir);
    INFO(result.output);
    REQUIRE(result.exit_code == 0);

    const Table traj = read_table(dir.sub("sim") + "/trajectory.csv");
    CHECK(std::abs(traj.col("z").back()) < 1e-9);
    CHECK(traj.col("entropy").back() == Approx(kLn2).margin(1e-9));
    CHECK(traj.col("bures_angle").back() == Approx(std::acos(std::sqrt(0.5))).margin(1e-9));
}

TEST_CASE("simulate the rate whose exact response is the linear trajectory", "[cli]") {
    TempDir dir;
    write_protocol_csv(dir.sub("linear.csv"), sample_protocol(1.0, 1000, [](double t) {
                           return 1.0 / (2.0 - t);
                       }));
    const auto result = run_cli(
        "simulate --protocol \"" + dir.sub("linear.csv") + "\" --out \"" + dir.sub("sim") + "\"",
        dir);
    REQUIRE(result.exit_code == 0);

    const Table traj = read_table(dir.sub("sim") + "/trajectory.csv");
    const auto& t = traj.col("t");
    const auto& z = traj.col("z");
    for (std::size_t k = 0; k < t.size(); ++k)
        REQUIRE(z[k] == Approx(1.0 - t[k]).margin(1e-6));
}

TEST_CASE("simulate --bloch emits the transverse components", "[cli]") {
    TempDir dir;
    write_protocol_csv(dir.sub("p.csv"), constant_guess(AdmissibilityTarget{}, 1.0, 200));
    const auto result =
        run_cli("simulate --protocol \"" + dir.sub("p.csv") +
                    "\" --bloch --x0 1 --z0 0 --omega0 2 --out \"" + dir.sub("sim") + "\"",
                dir);
    REQUIRE(result.exit_code == 0);

    const Table traj = read_table(dir.sub("sim") + "/trajectory.csv");
    REQUIRE(traj.header == std::vector<std::string>{"t", "x", "y", "z", "heat_rate", "entropy"});
    const double x = traj.col("x").back(), y = traj.col("y").back();
    CHECK(std::hypot(x, y) == Approx(std::exp(-kLn2 / 2.0)).margin(1e-6));
}

TEST_CASE("broken protocol files are reported as input errors", "[cli]") {
    TempDir dir;
    SECTION("empty file") {
        std::ofstream(dir.sub("empty.csv")).close();
        const auto result = run_cli(
            "simulate --protocol \"" + dir.sub("empty.csv") + "\" --out \"" + dir.sub("o") + "\"",
            dir);
        CHECK(result.exit_code == 1);
        CHECK_THAT(result.output, ContainsSubstring("empty"));
    }
    SECTION("non-numeric value names the offending row") {
        std::ofstream out(dir.sub("bad.csv"));
        out << "t,gamma\n0,1\n0.25,abc\n0.5,1\n0.75,1\n1,1\n";
        out.close();
        const auto result = run_cli(
            "simulate --protocol \"" + dir.sub("bad.csv") + "\" --out \"" + dir.sub("o") + "\"",
            dir);
        CHECK(result.exit_code == 1);
        CHECK_THAT(result.output, ContainsSubstring("row 3"));
    }
    SECTION("missing file") {
        const auto result = run_cli(
            "simulate --protocol \"" + dir.sub("nope.csv") + "\" --out \"" + dir.sub("o") + "\"",
            dir);
        CHECK(result.exit_code == 1);
    }
}

TEST_CASE("optimize rejects an inadmissible initial protocol file", "[cli]") {
    TempDir dir;
    write_protocol_csv(dir.sub("bad_init.csv"),
                       ControlProtocol(1.0, std::vector<double>(101, 1.0)));
    const auto result = run_cli("optimize --init \"" + dir.sub("bad_init.csv") +
                                    "\" --out \"" + dir.sub("o") + "\"",
                                dir);
    CHECK(result.exit_code == 1);
    CHECK_THAT(result.output, ContainsSubstring("residual"));
}

TEST_CASE("analytic reference cases", "[cli]") {
    TempDir dir;
    SECTION("heating optimum") {
        const auto result =
            run_cli("analytic --case heating-optimum --out \"" + dir.sub("ref") + "\"", dir);
        REQUIRE(result.exit_code == 0);
        const Table ref = read_table(dir.sub("ref") + "/analytic.csv");
        CHECK(ref.col("gamma_star").front() == 0.5);
        CHECK(ref.col("gamma_star").back() == Approx(1.0).margin(1e-15));
        CHECK(ref.col("z_star").front() == 1.0);
        CHECK(ref.col("z_star").back() == Approx(0.0).margin(1e-15));
        CHECK(read_json(dir.sub("ref") + "/summary.json").at("J_star").get<double>() == 1.0);
    }
    SECTION("dispersion optimum") {
        const auto result =
            run_cli("analytic --case dispersion-optimum --out \"" + dir.sub("ref") + "\"", dir);
        REQUIRE(result.exit_code == 0);
        const auto summary = read_json(dir.sub("ref") + "/summary.json");
        CHECK(summary.at("J_star").get<double>() == 0.25);
        CHECK(summary.at("last_node_clamped").get<bool>());
        const Table ref = read_table(dir.sub("ref") + "/analytic.csv");
        CHECK(ref.col("gamma_star").front() == 0.25);  // 1 / (2 tau z (1+z)) at z = 1
        CHECK(ref.col("z_star").front() == 1.0);
    }
    SECTION("minimal time") {
        const auto result =
            run_cli("analytic --case minimal-time --out \"" + dir.sub("ref") + "\"", dir);
        REQUIRE(result.exit_code == 0);
        const auto summary = read_json(dir.sub("ref") + "/summary.json");
        CHECK(summary.at("tau_star").get<double>() == 0.0);
        CHECK(summary.at("impulse_weight").get<double>() == Approx(kLn2).margin(1e-15));
        CHECK(summary.at("costate_vanishes").get<bool>());
        CHECK(read_table(dir.sub("ref") + "/width_study.csv").col("width").size() == 4);
    }
    SECTION("costate oracle") {
        const auto result = run_cli(
            "analytic --case costate-oracle --grid-n 4000 --out \"" + dir.sub("ref") + "\"", dir);
        REQUIRE(result.exit_code == 0);
        const auto summary = read_json(dir.sub("ref") + "/summary.json");
        CHECK(summary.at("max_abs_difference").get<double>() < 1e-6);
        CHECK(summary.at("p0_closed_form").get<double>() == Approx(-1.5 * kLn2).margin(1e-6));
    }
    SECTION("unknown case") {
        const auto result =
            run_cli("analytic --case there-is-no-such-case --out \"" + dir.sub("ref") + "\"", dir);
        CHECK(result.exit_code == 1);
        CHECK_THAT(result.output, ContainsSubstring("unknown case"));
    }
}

TEST_CASE("qsl ascent reports non-convergence through the exit code", "[cli]") {
    TempDir dir;
    const auto result = run_cli(
        "optimize --functional qsl --max-iter 200 --out \"" + dir.sub("run") + "\"", dir);
    INFO(result.output);
    REQUIRE(result.exit_code == 2);
    const auto summary = read_json(dir.sub("run") + "/summary.json");
    CHECK_FALSE(summary.at("converged").get<bool>());
    CHECK(summary.at("final_J").get<double>() < summary.at("initial_J").get<double>());
}

TEST_CASE("QOC_OUT_DIR supplies the default output directory", "[cli]") {
    TempDir dir;
    const auto result = run_cli("analytic --case heating-optimum", dir,
                                "QOC_OUT_DIR=\"" + dir.sub("env_out") + "\" ");
    REQUIRE(result.exit_code == 0);
    CHECK(std::filesystem::exists(std::filesystem::path(dir.sub("env_out")) / "summary.json"));
    CHECK(std::filesystem::exists(std::filesystem::path(dir.sub("env_out")) / "analytic.csv"));
}

TEST_CASE("usage errors come back as exit code 1", "[cli]") {
    TempDir dir;
    CHECK(run_cli("", dir).exit_code == 1);              // missing subcommand
    CHECK(run_cli("optimize --functional bogus --out \"" + dir.sub("o") + "\"", dir).exit_code ==
          1);
    CHECK(run_cli("--help", dir).exit_code == 0);
}
