#include "rtspn/spec_io.hpp"

#include <fstream>
#include <initializer_list>

#include <fmt/format.h>

namespace rtspn {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(Errc::ParseError, msg); }

void only_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!obj.is_object()) fail(fmt::format("{} must be an object", where));
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) fail(fmt::format("unknown key '{}' in {}", key, where));
    }
}

const json& require(const json& obj, const char* key, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(fmt::format("missing key '{}' in {}", key, where));
    return *it;
}

double number(const json& v, std::string_view what) {
    if (!v.is_number()) fail(fmt::format("{} must be a number", what));
    return v.get<double>();
}

TaskId task_id(const json& v, std::string_view what) {
    if (!v.is_number_integer()) fail(fmt::format("{} must be an integer task id", what));
    return v.get<TaskId>();
}

TaskSet id_list(const json& v, std::string_view what) {
    if (!v.is_array()) fail(fmt::format("{} must be an array of task ids", what));
    TaskSet out;
    for (const auto& e : v) out.push_back(task_id(e, what));
    return out;
}

ArrivalModel arrivals_from_json(const json& a) {
    if (!a.is_object()) fail("arrivals must be an object");
    const auto& kind_v = require(a, "kind", "arrivals");
    if (!kind_v.is_string()) fail("arrivals.kind must be a string");
    const auto kind = kind_v.get<std::string>();

    if (kind == "every_frame") {
        only_keys(a, {"kind"}, "arrivals");
        return EveryFrame{};
    }
    if (kind == "bernoulli") {
        only_keys(a, {"kind", "p"}, "arrivals");
        const auto& p = require(a, "p", "arrivals");
        if (!p.is_object()) fail("arrivals.p must be an object keyed by task id");
        IndependentBernoulli model;
        for (const auto& [key, value] : p.items()) {
            TaskId id{};
            try {
                std::size_t used = 0;
                id = std::stoi(key, &used);
                if (used != key.size()) throw std::invalid_argument(key);
            } catch (const std::exception&) {
                fail(fmt::format("arrivals.p key '{}' is not a task id", key));
            }
            model.probability[id] = number(value, "arrivals.p entry");
        }
        return model;
    }
    if (kind == "subset") {
        only_keys(a, {"kind", "dist"}, "arrivals");
        const auto& dist = require(a, "dist", "arrivals");
        if (!dist.is_array()) fail("arrivals.dist must be an array");
        SubsetDistribution model;
        for (const auto& e : dist) {
            only_keys(e, {"subset", "prob"}, "arrivals.dist entry");
            model.entries.emplace_back(id_list(require(e, "subset", "arrivals.dist entry"), "subset"),
                                       number(require(e, "prob", "arrivals.dist entry"), "prob"));
        }
        return model;
    }
    if (kind == "markov") {
        only_keys(a, {"kind", "states", "transition"}, "arrivals");
        const auto& states = require(a, "states", "arrivals");
        const auto& transition = require(a, "transition", "arrivals");
        if (!states.is_array() || !transition.is_array()) fail("arrivals.states and transition must be arrays");
        MarkovArrivals model;
        for (const auto& s : states) model.state_arrivals.push_back(id_list(s, "arrivals.states entry"));
        for (const auto& row : transition) {
            if (!row.is_array()) fail("transition rows must be arrays");
            std::vector<double> r;
            for (const auto& x : row) r.push_back(number(x, "transition entry"));
            model.transition.push_back(std::move(r));
        }
        return model;
    }
    fail(fmt::format("unknown arrivals.kind '{}'", kind));
}

}  // namespace

SystemSpec spec_from_json(const json& doc) {
    // task_map is an annotation written by `reduce`; it is accepted and ignored.
    only_keys(doc, {"frame_length", "resources", "tasks", "arrivals", "task_map"}, "spec");
    SystemSpec spec;
    spec.frame_length = number(require(doc, "frame_length", "spec"), "frame_length");

    const auto& resources = require(doc, "resources", "spec");
    if (!resources.is_array()) fail("resources must be an array");
    for (const auto& r : resources) {
        if (!r.is_string()) fail("resource ids must be strings");
        spec.resources.insert(r.get<std::string>());
    }

    const auto& tasks = require(doc, "tasks", "spec");
    if (!tasks.is_array()) fail("tasks must be an array");
    for (const auto& t : tasks) {
        only_keys(t, {"id", "rate", "requirement", "resources"}, "task");
        TaskSpec task;
        task.id = task_id(require(t, "id", "task"), "task.id");
        task.rate = number(require(t, "rate", "task"), "task.rate");
        task.requirement = number(require(t, "requirement", "task"), "task.requirement");
        const auto& rs = require(t, "resources", "task");
        if (!rs.is_array()) fail("task.resources must be an array");
        for (const auto& r : rs) {
            if (!r.is_string()) fail("resource ids must be strings");
            task.resources.insert(r.get<std::string>());
        }
        spec.tasks.push_back(std::move(task));
    }

    spec.arrivals = arrivals_from_json(require(doc, "arrivals", "spec"));
    return validate_spec(std::move(spec));
}

SystemSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(fmt::format("cannot open '{}'", path.string()));
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(fmt::format("{}: {}", path.string(), e.what()));
    }
    return spec_from_json(doc);
}

namespace {

struct ArrivalsToJson {
    json operator()(const EveryFrame&) const { return {{"kind", "every_frame"}}; }
    json operator()(const IndependentBernoulli& m) const {
        json p = json::object();
        for (const auto& [id, prob] : m.probability) p[std::to_string(id)] = prob;
        return {{"kind", "bernoulli"}, {"p", p}};
    }
    json operator()(const SubsetDistribution& m) const {
        json dist = json::array();
        for (const auto& [subset, prob] : m.entries) dist.push_back({{"subset", subset}, {"prob", prob}});
        return {{"kind", "subset"}, {"dist", dist}};
    }
    json operator()(const MarkovArrivals& m) const {
        return {{"kind", "markov"}, {"states", m.state_arrivals}, {"transition", m.transition}};
    }
};

}  // namespace

json spec_to_json(const SystemSpec& spec) {
    json tasks = json::array();
    for (const auto& t : spec.tasks) {
        tasks.push_back({{"id", t.id},
                         {"rate", t.rate},
                         {"requirement", t.requirement},
                         {"resources", std::vector<std::string>(t.resources.begin(), t.resources.end())}});
    }
    return {{"frame_length", spec.frame_length},
            {"resources", std::vector<std::string>(spec.resources.begin(), spec.resources.end())},
            {"tasks", tasks},
            {"arrivals", std::visit(ArrivalsToJson{}, spec.arrivals)}};
}

std::string digest_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

}  // namespace rtspn
