#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run crown(const std::string& args) {
    fs::create_directories(CLI_WORK);
    const std::string err_path = std::string(CLI_WORK) + "/stderr.txt";
    const std::string cmd = std::string(CROWN_BIN) + " " + args + " 2>" + err_path;
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream e(err_path);
    std::stringstream ss;
    ss << e.rdbuf();
    r.err = ss.str();
    return r;
}

std::string data(const std::string& name) { return std::string(CLI_DATA) + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("help lists every flag and exits 0") {
    const auto r = crown("--help");
    CHECK(r.code == 0);
    for (const char* flag : {"simulate", "backtest", "estimate", "--config", "--seed", "--reps", "--p", "--t",
                             "--te", "--regime", "--omega", "--restricted", "--out", "--threads", "--returns",
                             "--factors", "--benchmark", "CROWN_LOG"}) {
        CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
    }
}

TEST_CASE("usage errors exit 2 with help on stderr") {
    const auto r = crown("simulate --bogus");
    CHECK(r.code == 2);
    CHECK(r.err.find("UsageError") != std::string::npos);
    CHECK(r.err.find("Usage:") != std::string::npos);
    CHECK(r.out.empty());
    CHECK(crown("").code == 2);
    CHECK(crown("simulate --reps abc").code == 2);
}

TEST_CASE("config errors exit 3") {
    fs::create_directories(CLI_WORK);
    const std::string bad = std::string(CLI_WORK) + "/bad.json";
    std::ofstream(bad) << R"({"reps": 2, "unknown_key": true})";
    const auto r = crown("simulate --config " + bad);
    CHECK(r.code == 3);
    CHECK(r.err.find("ConfigError") != std::string::npos);
    CHECK(crown("simulate --p 10 --t 30 --reps 1 --regime sideways").code == 3);
}

TEST_CASE("simulate writes CSV and JSON, determined by the seed") {
    const std::string out1 = std::string(CLI_WORK) + "/sim1";
    const std::string out2 = std::string(CLI_WORK) + "/sim2";
    fs::remove_all(out1);
    fs::remove_all(out2);
    const std::string args = "simulate --config " + data("tables.json") + " --reps 2 --seed 1 ";
    const auto a = crown(args + "--out " + out1);
    const auto b = crown(args + "--out " + out2 + " --threads 2");
    CHECK(a.code == 0);
    CHECK(b.code == 0);
    CHECK(fs::exists(fs::path(out1) / "simulation.csv"));
    CHECK(fs::exists(fs::path(out1) / "simulation.json"));
    CHECK(slurp(fs::path(out1) / "simulation.csv") == slurp(fs::path(out2) / "simulation.csv"));
    CHECK(slurp(fs::path(out1) / "simulation.json") == slurp(fs::path(out2) / "simulation.json"));
    CHECK(slurp(fs::path(out1) / "simulation.json").find("\"reps\": 2") != std::string::npos);

    const auto c = crown("simulate --config " + data("tables.json") + " --reps 2 --seed 2");
    CHECK(c.code == 0);
    CHECK(c.out != slurp(fs::path(out1) / "simulation.csv"));
}

TEST_CASE("estimate prints p weights summing to one") {
    const auto r = crown("estimate --returns " + data("returns.csv") + " --factors " + data("factors.csv") +
                         " --regime te --te 0.1");
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    int count = 0;
    double sum = 0;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        sum += std::stod(line.substr(comma + 1));
        ++count;
    }
    CHECK(count == 6);
    CHECK(std::abs(sum - 1.0) < 1e-8);
}

TEST_CASE("backtest on a small panel") {
    const std::string cfg = std::string(CLI_WORK) + "/bt.json";
    std::ofstream(cfg) << R"({"window": 20, "nodewise": {"folds": 4}})";
    const std::string out = std::string(CLI_WORK) + "/bt";
    fs::remove_all(out);
    const auto r = crown("backtest --config " + cfg + " --returns " + data("returns.csv") + " --factors " +
                         data("factors.csv") + " --out " + out);
    CHECK(r.code == 0);
    const std::string summary = slurp(fs::path(out) / "summary.csv");
    CHECK(summary.rfind("AVR,TE,Risk,SR,TO,p-val,Max Weight,Min Weight,Total Short\n", 0) == 0);
    CHECK(fs::exists(fs::path(out) / "backtest.json"));
    CHECK(fs::exists(fs::path(out) / "series.csv"));
}

TEST_CASE("missing input file is a usage error") {
    CHECK(crown("estimate --returns /nonexistent.csv --factors " + data("factors.csv")).code == 2);
}
