#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "tsc/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome tsc_cli(std::initializer_list<std::string> args) {
    std::vector<std::string> storage{"tsc"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : storage) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = tsc::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "tsc_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

const std::string kScenario = std::string(TSC_SOURCE_DIR) + "/scenarios/fourway.json";

}  // namespace

TEST_CASE("help and usage") {
    CHECK(tsc_cli({"--help"}).code == tsc::cli::kExitOk);
    CHECK(tsc_cli({}).code == tsc::cli::kExitUsage);
    CHECK(tsc_cli({"frobnicate"}).code == tsc::cli::kExitUsage);
    CHECK(tsc_cli({"run", "--seeds", "0"}).code == tsc::cli::kExitUsage);
}

TEST_CASE("run writes one csv row per seed and controller") {
    const auto csv = scratch("run.csv");
    const auto js = scratch("run.json");
    const auto r = tsc_cli({"run", "--scenario", kScenario, "--controller", "timed,mpc", "--control-horizon", "20",
                            "--seeds", "10", "--duration", "120", "--out-csv", csv.string(), "--out-json",
                            js.string()});
    REQUIRE(r.code == tsc::cli::kExitOk);
    const auto rows = lines(slurp(csv));
    REQUIRE(rows.size() == 21);
    CHECK(rows[0].rfind("scenario,controller,seed,P,C,", 0) == 0);
    CHECK(rows[1].rfind("fourway,timed,1,,,", 0) == 0);
    CHECK(rows[2].rfind("fourway,mpc,1,30,20,", 0) == 0);
    CHECK(rows[20].rfind("fourway,mpc,10,30,20,", 0) == 0);
    CHECK(slurp(js).find("\"per_signal\"") != std::string::npos);
    CHECK(r.out.find("time program") != std::string::npos);
}

TEST_CASE("run errors") {
    const auto r = tsc_cli({"run", "--scenario", "/nonexistent/scenario.json"});
    CHECK(r.code == tsc::cli::kExitUsage);
    CHECK(r.err.find("/nonexistent/scenario.json") != std::string::npos);
    CHECK(tsc_cli({"run", "--controller", "mpc", "--horizon", "10", "--control-horizon", "12"}).code ==
          tsc::cli::kExitUsage);
    CHECK(tsc_cli({"run", "--weights", "1,2"}).code == tsc::cli::kExitUsage);
}

TEST_CASE("bench reports one row per control horizon") {
    const auto r = tsc_cli({"bench", "--horizon", "30", "--control-horizon", "15,20,25,30", "--duration", "30"});
    REQUIRE(r.code == tsc::cli::kExitOk);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == "scenario,P,C,seeds,solves,mean_solve_ms,sd_solve_ms,max_solve_ms");
    CHECK(rows[1].rfind("fourway,30,15,1,30,", 0) == 0);
    CHECK(rows[4].rfind("fourway,30,30,1,30,", 0) == 0);
    CHECK(tsc_cli({"bench", "--duration", "10"}).code == tsc::cli::kExitUsage);
}

TEST_CASE("paired bench times the same problems at every horizon") {
    const auto r = tsc_cli({"bench", "--paired", "--horizon", "20", "--control-horizon", "5,10", "--duration", "60",
                            "--snapshot-every", "20", "--repeat", "1"});
    REQUIRE(r.code == tsc::cli::kExitOk);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "scenario,P,C,problems,mean_solve_ms,sd_solve_ms,max_solve_ms,mean_nodes");
    CHECK(rows[1].rfind("fourway,20,5,3,", 0) == 0);
    CHECK(rows[2].rfind("fourway,20,10,3,", 0) == 0);
    CHECK(tsc_cli({"bench", "--paired", "--horizon", "20", "--control-horizon", "25"}).code == tsc::cli::kExitUsage);
}

TEST_CASE("export-milp") {
    const auto a = scratch("a.lp");
    const auto b = scratch("b.lp");
    const auto r = tsc_cli({"export-milp", "--horizon", "2", "--control-horizon", "2", "--at-second", "0", "--out",
                            a.string()});
    REQUIRE(r.code == tsc::cli::kExitOk);
    CHECK(r.out.find("variables") != std::string::npos);
    REQUIRE(tsc_cli({"export-milp", "--horizon", "2", "--control-horizon", "2", "--out", b.string()}).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a).rfind("\\ traffic signal horizon problem", 0) == 0);
    CHECK(tsc_cli({"export-milp", "--horizon", "2", "--control-horizon", "2", "--out", "/nonexistent/dir/x.lp"})
              .code != tsc::cli::kExitOk);
    CHECK(tsc_cli({"export-milp", "--horizon", "2", "--control-horizon", "3", "--out", b.string()}).code ==
          tsc::cli::kExitUsage);
    CHECK(tsc_cli({"export-milp", "--horizon", "2"}).code == tsc::cli::kExitUsage);
}

TEST_CASE("program and verify") {
    const auto schedule = scratch("program.txt");
    REQUIRE(tsc_cli({"program", "--cycles", "1", "--out", schedule.string()}).code == 0);
    CHECK(lines(slurp(schedule)).size() == 72);
    auto r = tsc_cli({"verify", schedule.string()});
    CHECK(r.code == tsc::cli::kExitOk);
    CHECK(r.out.find("72 steps, 0 violations") != std::string::npos);
    CHECK(tsc_cli({"verify", schedule.string(), "--scenario", kScenario}).code == tsc::cli::kExitOk);

    const auto bad = scratch("bad.txt");
    std::ofstream(bad) << "R R R R\nY R R R\n";
    r = tsc_cli({"verify", bad.string()});
    CHECK(r.code == tsc::cli::kExitViolation);
    CHECK(r.out.find("Transition") != std::string::npos);

    const auto malformed = scratch("malformed.txt");
    std::ofstream(malformed) << "R R R R\nR X R R\n";
    r = tsc_cli({"verify", malformed.string()});
    CHECK(r.code == tsc::cli::kExitUsage);
    CHECK(r.err.find("line 2") != std::string::npos);
    CHECK(tsc_cli({"verify", "/nonexistent/schedule.txt"}).code == tsc::cli::kExitUsage);
}
