#include "rtspn/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "rtspn/feasibility.hpp"
#include "rtspn/idle.hpp"
#include "rtspn/rng.hpp"
#include "rtspn/simulator.hpp"
#include "rtspn/spec_io.hpp"

namespace rtspn::cli {

namespace {

std::string num(double v) { return fmt::format("{:.10g}", v); }

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<TaskId> parse_ids(const std::string& text) {
    std::vector<TaskId> ids;
    for (const auto& s : split(text, ',')) {
        try {
            std::size_t used = 0;
            ids.push_back(std::stoi(s, &used));
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw Error(Errc::BadConfig, fmt::format("'{}' is not a task id", s));
        }
    }
    return ids;
}

std::map<std::string, std::string> parse_policy_args(const std::vector<std::string>& items) {
    std::map<std::string, std::string> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw Error(Errc::BadConfig, fmt::format("policy argument '{}' is not key=value", item));
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

AttributionConvention parse_convention(const std::string& name) {
    if (name == "exact") return AttributionConvention::Exact;
    if (name == "published") return AttributionConvention::AsPublished;
    throw Error(Errc::BadConfig, fmt::format("unknown convention '{}'", name));
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Feasible: return "feasible";
        case Verdict::Infeasible: return "infeasible";
        case Verdict::BoundaryUncertain: return "boundary_uncertain";
    }
    return "unknown";
}

int exit_for(Verdict v) {
    switch (v) {
        case Verdict::Feasible: return kOk;
        case Verdict::Infeasible: return kInfeasible;
        case Verdict::BoundaryUncertain: return kBoundaryUncertain;
    }
    return kRuntimeFailure;
}

// Writes to the named file, or to `fallback` when the path is empty.
class Output {
public:
    Output(const std::string& path, std::ostream& fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw Error(Errc::BadConfig, fmt::format("cannot write '{}'", path));
        }
        stream_ = path.empty() ? &fallback : &file_;
    }
    std::ostream& stream() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

FeasibilityOptions feasibility_options(const ExperimentConfig& config) {
    FeasibilityOptions o;
    o.convention = config.convention;
    return o;
}

std::string label(const FeasibilityVerdict& v, TaskId id) {
    if (!v.reduced) return std::to_string(id);
    const auto& r = *v.reduced;
    if (id == r.combined) return "c*";
    if (id == r.first_star || id == r.second_star) return std::to_string(id) + "*";
    return std::to_string(id);
}

int do_check(const ExperimentConfig& config, std::ostream& out) {
    const auto spec = load_spec(config.spec_path);
    const auto v = check_feasibility(spec, feasibility_options(config));
    Output sink(config.out_path, out);
    auto& os = sink.stream();
    if (config.format == "csv") {
        os << "subset,workload,idle,idle_stderr,load,slack,status\n";
        for (const auto& s : v.slack_table) {
            const bool violated = std::any_of(v.violations.begin(), v.violations.end(),
                                              [&](const SubsetSlack& x) { return x.subset == s.subset; });
            os << format_subset(s.subset) << ',' << num(s.workload) << ',' << num(s.idle.value) << ','
               << num(s.idle.std_error) << ',' << num(s.load) << ',' << num(s.slack) << ','
               << (s.uncertain ? "uncertain" : violated ? "violated" : "ok") << '\n';
        }
    } else {
        os << "verdict: " << verdict_name(v.verdict) << '\n';
        os << "topology: " << (v.reduced ? "two-resource" : "single-resource") << '\n';
        os << "subsets_checked: " << v.slack_table.size() << '\n';
        os << "min_slack: " << num(v.margin) << '\n';
        for (const auto& s : v.violations) {
            std::string names;
            for (auto id : s.subset) names += (names.empty() ? "" : ";") + label(v, id);
            os << "violation: {" << names << "} load=" << num(s.load) << " slack=" << num(s.slack) << '\n';
        }
        for (const auto& s : v.slack_table) {
            if (s.uncertain) os << "uncertain: {" << format_subset(s.subset) << "} slack=" << num(s.slack) << '\n';
        }
        if (v.witness) {
            os << "witness:";
            for (const auto& [id, q] : *v.witness) os << ' ' << label(v, id) << '=' << num(q);
            os << '\n';
        }
    }
    return exit_for(v.verdict);
}

int do_simulate(const ExperimentConfig& config, std::ostream& out) {
    const auto spec = load_spec(config.spec_path);
    const auto started = std::chrono::steady_clock::now();
    const auto rep = replicate(spec, config.policy, config.frames, config.seed, config.replications, config.jobs);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    {
        Output sink(config.out_path, out);
        auto& os = sink.stream();
        os << "task_id,arrivals,completions,service_time,throughput,throughput_stderr,required_q,met\n";
        for (const auto& t : rep.tasks) {
            os << t.task << ',' << t.arrivals << ',' << t.completions << ',' << num(t.service) << ','
               << num(t.throughput) << ',' << num(t.throughput_stderr) << ',' << num(t.required) << ','
               << (t.met ? 1 : 0) << '\n';
        }
    }
    if (!config.out_path.empty()) {
        nlohmann::json side = {{"seed", config.seed},
                               {"config_digest", rep.config_digest},
                               {"policy", config.policy.name},
                               {"policy_args", config.policy.args},
                               {"frames", config.frames},
                               {"replications", config.replications},
                               {"idle_time", rep.idle_mean},
                               {"wall_clock_seconds", wall}};
        std::ofstream(config.out_path + ".json") << side.dump(2) << '\n';
    }
    return kOk;
}

int do_reduce(const ExperimentConfig& config, bool with_witness, std::ostream& out) {
    const auto spec = load_spec(config.spec_path);
    auto reduced = reduce(spec, config.convention);
    if (with_witness) {
        const auto v = check_two_resource(spec, feasibility_options(config));
        if (!v.witness) throw Error(Errc::BadConfig, "system is infeasible; no witness to write");
        for (auto& t : reduced.spec.tasks) t.requirement = v.witness->at(t.id);
    }
    auto doc = spec_to_json(reduced.spec);
    nlohmann::json shared = nlohmann::json::object();
    for (auto id : reduced.roles.shared) shared[std::to_string(id)] = id;
    doc["task_map"] = {{"1*", reduced.first_star},
                       {"2*", reduced.second_star},
                       {"c*", reduced.combined},
                       {"first_task", reduced.roles.first},
                       {"second_task", reduced.roles.second},
                       {"shared", shared},
                       {"convention", config.convention == AttributionConvention::Exact ? "exact" : "published"}};
    Output sink(config.out_path, out);
    sink.stream() << doc.dump(2) << '\n';
    return kOk;
}

int do_idle(const ExperimentConfig& config, std::uint64_t samples, const std::string& only, std::ostream& out) {
    const auto spec = load_spec(config.spec_path);
    std::vector<TaskSet> subsets;
    if (!only.empty()) {
        auto ids = parse_ids(only);
        std::sort(ids.begin(), ids.end());
        subsets.push_back(ids);
    } else {
        const auto ids = spec.task_ids();
        subsets = enumerate_subsets(ids, false);
    }
    Output sink(config.out_path, out);
    auto& os = sink.stream();
    os << "subset,analytic_value,mc_value,mc_stderr,samples\n";
    for (std::size_t i = 0; i < subsets.size(); ++i) {
        const auto analytic = idle_time_expected(subsets[i], spec);
        const auto mc = idle_time_monte_carlo(subsets[i], spec, samples, split_seed(config.seed, i));
        os << format_subset(subsets[i]) << ',' << num(analytic.value) << ',' << num(mc.value) << ','
           << num(mc.std_error) << ',' << samples << '\n';
    }
    return kOk;
}

}  // namespace

double SweepAxis::value(std::size_t i) const {
    return from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);
}

void SweepAxis::validate() const {
    if (steps < 2) throw Error(Errc::BadConfig, "sweep needs at least 2 steps");
    if (!std::isfinite(from) || !std::isfinite(to)) throw Error(Errc::BadConfig, "sweep range must be finite");
    if (parameter != "requirement" && parameter != "rate" && parameter != "frame_length")
        throw Error(Errc::BadConfig, fmt::format("cannot sweep '{}'", parameter));
    if (parameter != "frame_length" && tasks.empty())
        throw Error(Errc::BadConfig, fmt::format("sweeping {} needs --task", parameter));
}

SystemSpec apply_axis(const SystemSpec& spec, const SweepAxis& axis, double value) {
    SystemSpec copy = spec;
    if (axis.parameter == "frame_length") {
        copy.frame_length = value;
    } else {
        for (auto id : axis.tasks) {
            auto it = std::find_if(copy.tasks.begin(), copy.tasks.end(), [&](const TaskSpec& t) { return t.id == id; });
            if (it == copy.tasks.end()) throw Error(Errc::UnknownTask, fmt::format("task {}", id));
            (axis.parameter == "rate" ? it->rate : it->requirement) = value;
        }
    }
    return validate_spec(std::move(copy));
}

int sweep(const ExperimentConfig& config, const SystemSpec& spec, std::ostream& csv, std::ostream& err) {
    config.axis.validate();
    const auto ids = spec.task_ids();

    csv << "param_value,feasible,min_slack";
    for (auto id : ids) csv << ",q_hat_" << id;
    csv << ",met\n";

    auto point = [&](std::size_t i) -> std::string {
        const double x = config.axis.value(i);
        const auto s = apply_axis(spec, config.axis, x);
        const auto v = check_feasibility(s, feasibility_options(config));
        std::string row = num(x) + ',' +
                          (v.verdict == Verdict::Feasible ? "1" : v.verdict == Verdict::Infeasible ? "0" : "-1") +
                          ',' + num(v.margin);
        if (config.simulate) {
            const auto m = run(s, config.policy, config.frames, split_seed(config.seed, i));
            for (const auto& t : m.tasks) row += ',' + num(t.throughput());
            row += m.all_met() ? ",1" : ",0";
        } else {
            for (std::size_t k = 0; k < ids.size(); ++k) row += ',';
            row += ',';
        }
        return row + '\n';
    };

    const std::size_t steps = config.axis.steps;
    const std::size_t jobs = std::max<std::size_t>(1, config.jobs);
    for (std::size_t start = 0; start < steps; start += jobs) {
        const std::size_t stop = std::min(steps, start + jobs);
        std::vector<std::future<std::string>> rows;
        for (std::size_t i = start; i < stop; ++i)
            rows.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, point, i));
        for (std::size_t i = start; i < stop; ++i) {
            try {
                csv << rows[i - start].get();
            } catch (const std::exception& e) {
                err << "sweep point " << i << ": " << e.what() << '\n';
                csv << "partial=true\n";
                return kRuntimeFailure;
            }
        }
    }
    return kOk;
}

void init_logging() {
    static std::once_flag once;
    std::call_once(once, [] {
        auto logger = spdlog::get("rtspn");
        if (!logger) logger = spdlog::stderr_color_mt("rtspn");
        spdlog::set_default_logger(logger);
        spdlog::set_level(spdlog::level::warn);
        if (const char* env = std::getenv("RTSPN_LOG")) spdlog::set_level(spdlog::level::from_str(env));
    });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    init_logging();
    CLI::App app{"Feasibility checks, reduction and simulation for frame-based real-time processing networks",
                 "rtspn"};
    app.require_subcommand(1);

    ExperimentConfig config;
    std::vector<std::string> policy_args;
    std::string convention = "exact";
    std::string task_list;
    std::uint64_t samples = 1'000'000;
    std::string subset;
    bool witness = false;

    auto add_spec = [&](CLI::App* sub) {
        sub->add_option("--spec", config.spec_path, "System specification (JSON)")->required();
    };
    auto add_policy = [&](CLI::App* sub) {
        sub->add_option("--policy", config.policy.name, "ldf | ltdf | static | random | share")
            ->check(CLI::IsMember({"ldf", "ltdf", "static", "random", "share"}));
        sub->add_option("--policy-arg", policy_args, "Policy parameter key=value (repeatable)");
        sub->add_option("--frames", config.frames, "Frames per run")->check(CLI::PositiveNumber);
        sub->add_option("--seed", config.seed, "Base seed");
        sub->add_option("--jobs", config.jobs, "Concurrent runs")->check(CLI::PositiveNumber);
    };
    auto add_convention = [&](CLI::App* sub) {
        sub->add_option("--convention", convention, "Pair attribution law: exact | published")
            ->check(CLI::IsMember({"exact", "published"}));
    };

    auto* check = app.add_subcommand("check", "Verify feasibility of the requirements");
    add_spec(check);
    add_convention(check);
    check->add_option("--format", config.format, "text | csv")->check(CLI::IsMember({"text", "csv"}));
    check->add_option("--out", config.out_path, "Output file (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "Simulate a scheduling policy");
    add_spec(simulate);
    add_policy(simulate);
    simulate->add_option("--replications", config.replications, "Independent replications")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--out", config.out_path, "Metrics CSV (a .json sidecar is written next to it)");

    auto* reduce_cmd = app.add_subcommand("reduce", "Reduce a two-resource system to a single resource");
    add_spec(reduce_cmd);
    add_convention(reduce_cmd);
    reduce_cmd->add_flag("--witness", witness, "Fill reduced requirements with the feasibility witness");
    reduce_cmd->add_option("--out", config.out_path, "Output file (default stdout)");

    auto* idle = app.add_subcommand("idle", "Expected forced idle time per subset");
    add_spec(idle);
    idle->add_option("--samples", samples, "Monte Carlo samples per subset")->check(CLI::PositiveNumber);
    idle->add_option("--seed", config.seed, "Monte Carlo seed");
    idle->add_option("--subset", subset, "Only this subset, e.g. 1,3");
    idle->add_option("--out", config.out_path, "Output file (default stdout)");

    auto* sweep_cmd = app.add_subcommand("sweep", "Feasibility (and optionally simulation) over a parameter grid");
    add_spec(sweep_cmd);
    add_policy(sweep_cmd);
    add_convention(sweep_cmd);
    sweep_cmd->add_option("--task", task_list, "Task id(s) to vary, comma separated");
    sweep_cmd->add_option("--param", config.axis.parameter, "requirement | rate | frame_length")
        ->check(CLI::IsMember({"requirement", "rate", "frame_length"}));
    sweep_cmd->add_option("--from", config.axis.from, "Grid start")->required();
    sweep_cmd->add_option("--to", config.axis.to, "Grid end")->required();
    sweep_cmd->add_option("--steps", config.axis.steps, "Grid points (>= 2)");
    sweep_cmd->add_flag("--simulate", config.simulate, "Simulate every grid point");
    sweep_cmd->add_option("--out", config.out_path, "Output file (default stdout)");

    std::vector<std::string> argv_store{"rtspn"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kUsage;
    }

    try {
        config.policy.args = parse_policy_args(policy_args);
        config.convention = parse_convention(convention);
        if (!task_list.empty()) config.axis.tasks = parse_ids(task_list);

        if (check->parsed()) {
            config.command = "check";
            return do_check(config, out);
        }
        if (simulate->parsed()) {
            config.command = "simulate";
            return do_simulate(config, out);
        }
        if (reduce_cmd->parsed()) {
            config.command = "reduce";
            return do_reduce(config, witness, out);
        }
        if (idle->parsed()) {
            config.command = "idle";
            return do_idle(config, samples, subset, out);
        }
        config.command = "sweep";
        config.axis.validate();
        const auto spec = load_spec(config.spec_path);
        Output sink(config.out_path, out);
        return sweep(config, spec, sink.stream(), err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        switch (e.code()) {
            case Errc::ParseError:
            case Errc::BadConfig:
            case Errc::UnknownTask:
            case Errc::NotSingleResource:
            case Errc::NotTwoResourceTopology:
            case Errc::UnsupportedTopology:
            case Errc::TooManyTasks:
                return kUsage;
            default:
                break;
        }
        return dynamic_cast<const ValidationError*>(&e) != nullptr ? kUsage : kRuntimeFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
}

}  // namespace rtspn::cli
