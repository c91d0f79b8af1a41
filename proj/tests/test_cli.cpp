#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rtspn/cli.hpp"
#include "rtspn/feasibility.hpp"
#include "rtspn/spec_io.hpp"
#include "support.hpp"

using namespace rtspn;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string write_spec(const SystemSpec& spec, const std::string& name) {
    const auto path = fs::temp_directory_path() / ("rtspn_test_" + name + ".json");
    std::ofstream(path) << spec_to_json(spec).dump();
    return path.string();
}

}  // namespace

TEST_CASE("check exit codes") {
    const auto ok = invoke({"check", "--spec", write_spec(testing::single({{1, 1.0, 0.6}}), "ok")});
    CHECK(ok.code == cli::kOk);
    CHECK(ok.out.find("verdict: feasible") != std::string::npos);

    const auto bad = invoke({"check", "--spec", write_spec(testing::single({{1, 1.0, 0.64}}), "bad")});
    CHECK(bad.code == cli::kInfeasible);
    CHECK(bad.out.find("violation: {1}") != std::string::npos);

    const auto csv = invoke({"check", "--spec", write_spec(testing::single({{1, 1.0, 0.6}}), "ok"), "--format", "csv"});
    CHECK(csv.out.rfind("subset,workload,idle,idle_stderr,load,slack,status\n1,", 0) == 0);
}

TEST_CASE("usage errors") {
    const auto missing = invoke({"simulate"});
    CHECK(missing.code == cli::kUsage);
    CHECK(missing.err.find("Usage") != std::string::npos);
    CHECK(invoke({}).code == cli::kUsage);
    CHECK(invoke({"check", "--spec", "/nonexistent/spec.json"}).code == cli::kUsage);

    const auto path = fs::temp_directory_path() / "rtspn_test_typo.json";
    std::ofstream(path) << R"({"frame_length": 1, "resources": ["cpu"], "tasks": [], "arival": {}})";
    CHECK(invoke({"check", "--spec", path.string()}).code == cli::kUsage);

    const auto spec = write_spec(testing::single({{1, 1.0, 0.1}}), "usage");
    CHECK(invoke({"simulate", "--spec", spec, "--policy", "ldf", "--policy-arg", "bogus"}).code == cli::kUsage);
    CHECK(invoke({"sweep", "--spec", spec, "--task", "1", "--from", "0", "--to", "1", "--steps", "1"}).code ==
          cli::kUsage);
}

TEST_CASE("simulate writes csv and sidecar") {
    const auto spec = write_spec(testing::single({{1, 2.0, 0.3}, {2, 3.0, 0.3}}), "sim");
    const auto out = (fs::temp_directory_path() / "rtspn_test_metrics.csv").string();
    const auto r = invoke({"simulate", "--spec", spec, "--frames", "500", "--seed", "4", "--out", out});
    REQUIRE(r.code == cli::kOk);
    std::ifstream csv(out);
    std::string header;
    std::getline(csv, header);
    CHECK(header == "task_id,arrivals,completions,service_time,throughput,throughput_stderr,required_q,met");
    std::ifstream side(out + ".json");
    const auto doc = nlohmann::json::parse(side);
    CHECK(doc.at("seed") == 4);
    CHECK(doc.contains("config_digest"));
    CHECK(doc.contains("idle_time"));
    CHECK(doc.contains("wall_clock_seconds"));
}

TEST_CASE("reduce and idle") {
    const auto spec = write_spec(testing::two_resource({{1, 3.0, 0.2}, {2, 1.0, 0.1}, {3, 2.0, 0.1}}), "two");
    const auto r = invoke({"reduce", "--spec", spec});
    REQUIRE(r.code == cli::kOk);
    auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.at("task_map").at("c*") == 4);
    doc.erase("task_map");
    CHECK(spec_from_json(doc).single_resource());

    const auto idle = invoke({"idle", "--spec", write_spec(testing::single({{1, 1.0, 0.0}}), "idle"),
                              "--samples", "10000"});
    CHECK(idle.out.rfind("subset,analytic_value,mc_value,mc_stderr,samples\n1,0.3678794412,", 0) == 0);
}

TEST_CASE("sweep") {
    const auto spec = testing::single({{1, 1.0, 0.0}});
    cli::ExperimentConfig config;
    config.axis = {{1}, "requirement", 0.0, 1.0, 11};
    std::ostringstream csv, err;
    REQUIRE(cli::sweep(config, spec, csv, err) == cli::kOk);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "param_value,feasible,min_slack,q_hat_1,met");
    std::vector<std::string> flags;
    while (std::getline(lines, line)) flags.push_back(line.substr(line.find(',') + 1, 1));
    REQUIRE(flags.size() == 11);
    CHECK(flags[6] == "1");
    CHECK(flags[7] == "0");

    config.axis = {{1}, "requirement", 0.1, 0.5, 2};
    std::ostringstream ends;
    cli::sweep(config, spec, ends, err);
    CHECK(ends.str().find("\n0.1,1,") != std::string::npos);
    CHECK(ends.str().find("\n0.5,1,") != std::string::npos);

    config.axis = {{1}, "rate", -1.0, 1.0, 3};  // rate -1 fails validation
    std::ostringstream partial, perr;
    CHECK(cli::sweep(config, spec, partial, perr) == cli::kRuntimeFailure);
    CHECK(partial.str().find("partial=true") != std::string::npos);
}

TEST_CASE("parallel sweep matches serial") {
    const auto spec = testing::single({{1, 1.0, 0.0}, {2, 2.0, 0.2}});
    cli::ExperimentConfig config;
    config.simulate = true;
    config.frames = 2000;
    config.axis = {{1}, "requirement", 0.0, 0.5, 5};
    std::ostringstream serial, parallel, err;
    cli::sweep(config, spec, serial, err);
    config.jobs = 3;
    cli::sweep(config, spec, parallel, err);
    CHECK(serial.str() == parallel.str());
}
