#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(QSDM_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.exit_code = WEXITSTATUS(status);
    return r;
}

std::vector<std::string> split_lines(const std::string& s) {
    std::vector<std::string> lines;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("solve command") {
    const RunResult r = run("solve --gamma 0 --margin 1");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"domain\": \"minimum_error\"") != std::string::npos);
    CHECK(r.out.find("\"p_success\": 0.60549886") != std::string::npos);
    CHECK(r.out.find("\"povm_source\": \"analytic\"") != std::string::npos);

    const RunResult lin = run("solve --gamma 0 --margin 0.10");
    CHECK(lin.exit_code == 0);
    CHECK(lin.out.find("\"domain\": \"linear\"") != std::string::npos);
    CHECK(lin.out.find("\"p_success\": 0.2") != std::string::npos);

    CHECK(run("solve --gamma 2 --margin 0.5").exit_code == 2);
    CHECK(run("solve --gamma 0 --margin 1.5").exit_code == 2);
    CHECK(run("solve --gamma 0").exit_code == 2);  // missing required flag
}

TEST_CASE("byte-identical output across invocations") {
    const RunResult a = run("solve --gamma 0.3 --margin 0.2");
    const RunResult b = run("solve --gamma 0.3 --margin 0.2");
    CHECK(a.out == b.out);

    const RunResult sa = run("simulate --gamma 0 --margin 0.25 --shots 20000 --seed 5");
    const RunResult sb = run("simulate --gamma 0 --margin 0.25 --shots 20000 --seed 5");
    CHECK(sa.out == sb.out);
}

TEST_CASE("sweep command") {
    const RunResult r = run("sweep --gamma 0 --steps 200");
    REQUIRE(r.exit_code == 0);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() == 202);
    CHECK(lines[0] == "m,p_max,p_error,p_inconclusive,domain");
    CHECK(lines[1].rfind("0.000000,0.000000,0.000000,1.000000,linear", 0) == 0);
    CHECK(lines.back().rfind("1.000000,0.605499,", 0) == 0);
    CHECK(lines.back().find(",0.000000,minimum_error") != std::string::npos);

    // exactly three contiguous domain segments, in order
    std::vector<std::string> segments;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string dom = lines[i].substr(lines[i].rfind(',') + 1);
        if (segments.empty() || segments.back() != dom) segments.push_back(dom);
    }
    REQUIRE(segments.size() == 3);
    CHECK(segments[0] == "linear");
    CHECK(segments[1] == "intermediate");
    CHECK(segments[2] == "minimum_error");
}

TEST_CASE("trine sweep has no intermediate segment") {
    const RunResult r = run("sweep --gamma -0.5 --steps 120");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("intermediate") == std::string::npos);
    CHECK(r.out.find("linear") != std::string::npos);
    CHECK(r.out.find("minimum_error") != std::string::npos);
}

TEST_CASE("sweep to unwritable path fails with exit 3") {
    CHECK(run("sweep --gamma 0 --out /nonexistent-dir/x.csv").exit_code == 3);
}

TEST_CASE("verify command") {
    const RunResult r = run("verify --gamma 0 --margin 0.25");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"pass\": true") != std::string::npos);

    const RunResult degenerate = run("verify --gamma 1 --margin 0.5");
    CHECK(degenerate.exit_code == 0);

    const RunResult mixed = run("verify --r 0.8 --gamma 0.1 --margin 0.2");
    CHECK(mixed.exit_code == 0);
    CHECK(mixed.out.find("\"povm_source\": \"numeric\"") != std::string::npos);
}

TEST_CASE("simulate command") {
    const RunResult r = run("simulate --gamma 0 --margin 0 --shots 100");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"p_inconclusive_hat\": 1") != std::string::npos);

    const RunResult bad = run("simulate --gamma 3 --margin 0.5");
    CHECK(bad.exit_code == 2);
}
