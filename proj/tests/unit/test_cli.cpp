#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "generators.hpp"
#include "treedual/cli.hpp"
#include "treedual/io.hpp"

using namespace treedual;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "treedual");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string inst(const std::string& name) { return testing::data_dir() + "/instances/" + name + ".json"; }

std::string tmp(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "treedual_cli_test";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("solve the LQ instance") {
    const Run r = run({"solve", "--in", inst("lq")});
    CHECK(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("status") == "certified-optimal");
    CHECK(std::abs(j.at("gap").get<double>()) <= 1e-6);
}

TEST_CASE("stopping command reports the value") {
    const Run r = run({"stopping", "--in", inst("reward")});
    CHECK(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("stopping").at("value").get<double>() == Catch::Approx(1.5));
    CHECK(j.at("stopping").at("report").at("certified") == true);
    CHECK(run({"stopping", "--in", inst("lq")}).code == 4);
}

TEST_CASE("qualify flags the non-adapted domain") {
    const Run bad = run({"qualify", "--in", inst("nonadapted")});
    CHECK(bad.code == 2);
    const json j = json::parse(bad.out);
    CHECK(j.at("checks").at("bounded_recourse").at("status") == "fails");
    CHECK(j.at("checks").at("bounded_recourse").at("failing_node") == 0);
    CHECK(run({"qualify", "--in", inst("adapted")}).code == 0);
}

TEST_CASE("text report names each check") {
    const Run r = run({"control", "--in", inst("lq"), "--report", "text"});
    CHECK(r.code == 0);
    CHECK(r.out.find("zero duality gap") != std::string::npos);
    CHECK(r.out.find("riccati dynamic program agrees") != std::string::npos);
}

TEST_CASE("certify round trip and determinism") {
    const std::string a = tmp("mathprog.a.json"), b = tmp("mathprog.b.json");
    CHECK(run({"mathprog", "--in", inst("mathprog"), "--out", a}).code == 0);
    CHECK(run({"mathprog", "--in", inst("mathprog"), "--out", b}).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(run({"certify", "--in", inst("mathprog"), "--cert", a}).code == 0);
    CHECK(run({"certify", "--in", inst("lq"), "--cert", a}).code == 4);
}

TEST_CASE("tampered certificates fail") {
    const std::string a = tmp("two_leaf.json"), b = tmp("two_leaf.bad.json");
    REQUIRE(run({"solve", "--in", inst("two_leaf"), "--out", a}).code == 0);
    json j = read_json_file(a);
    j["x"][0] = json::array({5.0});
    std::ofstream(b) << j.dump();
    CHECK(run({"certify", "--in", inst("two_leaf"), "--cert", b}).code == 2);
}

TEST_CASE("oracle command") {
    CHECK(run({"oracle", "--in", inst("reward_3stage")}).code == 0);
    CHECK(run({"oracle", "--in", inst("lq")}).code == 0);
    CHECK(run({"oracle", "--in", inst("two_leaf")}).code == 0);
}

TEST_CASE("usage and input errors exit with 4") {
    CHECK(run({}).code == 4);
    CHECK(run({"solve"}).code == 4);
    CHECK(run({"solve", "--in", inst("lq"), "--report", "xml"}).code == 4);
    CHECK(run({"solve", "--in", "/nonexistent.json"}).code == 4);
    const std::string bad = tmp("bad.json");
    std::ofstream(bad) << "{\"format_version\": 1, \"kind\": ";
    const Run r = run({"solve", "--in", bad});
    CHECK(r.code == 4);
    CHECK(r.err.find("byte") != std::string::npos);
    CHECK(run({"--help"}).code == 0);
}
