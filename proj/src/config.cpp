#include "phrl/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace phrl {

Seconds parse_clock_time(const std::string& hhmm) {
    int h = -1, m = -1;
    char tail = 0;
    if (std::sscanf(hhmm.c_str(), "%d:%d%c", &h, &m, &tail) != 2 || h < 0 || h > 23 || m < 0 || m > 59)
        throw ConfigError("expected HH:MM, got '" + hhmm + "'");
    return h * 3600 + m * 60;
}

std::string format_clock_time(Seconds s) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d:%02d", static_cast<int>(s / 3600), static_cast<int>(s % 3600 / 60));
    return buf;
}

ServiceConfig service_config_from_json(const Json& j) {
    static const std::set<std::string> known{
        "mode",   "k",       "seed",           "exploration_days", "clustering_day", "decision_times",
        "training_time", "gamma", "epsilon", "max_iterations", "stop_epsilon", "ridge",
        "min_user_experiences", "warm_start", "reward", "mood", "api_token", "timezone"};
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("unknown configuration key " + key);

    ServiceConfig cfg;
    auto& e = cfg.engine;
    try {
        if (j.contains("mode")) {
            const auto m = mode_from_string(j["mode"].get<std::string>());
            if (!m) throw ConfigError("mode must be pooled, grouped or separate");
            e.mode = *m;
        }
        e.k = j.value("k", e.k);
        e.seed = j.value("seed", e.seed);
        e.exploration_days = j.value("exploration_days", e.exploration_days);
        e.clustering_day = j.value("clustering_day", e.clustering_day);
        if (j.contains("decision_times")) {
            const auto& t = j["decision_times"];
            if (!t.is_array() || t.size() != kDayParts) throw ConfigError("decision_times needs three HH:MM entries");
            for (std::size_t i = 0; i < kDayParts; ++i) e.schedule.decision_time[i] = parse_clock_time(t[i].get<std::string>());
        }
        if (j.contains("training_time")) e.training_time = parse_clock_time(j["training_time"].get<std::string>());
        e.solver.gamma = j.value("gamma", e.solver.gamma);
        e.solver.epsilon = j.value("epsilon", e.solver.epsilon);
        e.solver.max_iterations = j.value("max_iterations", e.solver.max_iterations);
        e.solver.stop_epsilon = j.value("stop_epsilon", e.solver.stop_epsilon);
        e.solver.ridge = j.value("ridge", e.solver.ridge);
        e.min_user_experiences = j.value("min_user_experiences", e.min_user_experiences);
        e.warm_start = j.value("warm_start", e.warm_start);
        if (j.contains("reward")) {
            const auto& r = j["reward"];
            e.reward.w_read = r.value("w_read", e.reward.w_read);
            e.reward.w_ratings = r.value("w_ratings", e.reward.w_ratings);
            e.reward.zero_sent_fraction = r.value("zero_sent_fraction", e.reward.zero_sent_fraction);
        }
        if (j.contains("mood")) {
            const auto& m = j["mood"];
            e.mood.positive_threshold = m.value("positive_threshold", e.mood.positive_threshold);
            const auto src = m.value("source", std::string("latest"));
            if (src == "latest")
                e.mood.source = MoodSource::latest;
            else if (src == "median")
                e.mood.source = MoodSource::median;
            else
                throw ConfigError("mood.source must be latest or median");
        }
        cfg.api_token = j.value("api_token", cfg.api_token);
        cfg.timezone = j.value("timezone", cfg.timezone);
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("configuration: ") + ex.what());
    }
    cfg.validate();
    return cfg;
}

Json to_json(const ServiceConfig& cfg) {
    const auto& e = cfg.engine;
    Json times = Json::array();
    for (Seconds t : e.schedule.decision_time) times.push_back(format_clock_time(t));
    return Json{{"mode", std::string(to_string(e.mode))},
                {"k", e.k},
                {"seed", e.seed},
                {"exploration_days", e.exploration_days},
                {"clustering_day", e.clustering_day},
                {"decision_times", std::move(times)},
                {"training_time", format_clock_time(e.training_time)},
                {"gamma", e.solver.gamma},
                {"epsilon", e.solver.epsilon},
                {"max_iterations", e.solver.max_iterations},
                {"stop_epsilon", e.solver.stop_epsilon},
                {"ridge", e.solver.ridge},
                {"min_user_experiences", e.min_user_experiences},
                {"warm_start", e.warm_start},
                {"reward", Json{{"w_read", e.reward.w_read},
                                {"w_ratings", e.reward.w_ratings},
                                {"zero_sent_fraction", e.reward.zero_sent_fraction}}},
                {"mood", Json{{"positive_threshold", e.mood.positive_threshold},
                              {"source", e.mood.source == MoodSource::latest ? "latest" : "median"}}},
                {"api_token", cfg.api_token},
                {"timezone", cfg.timezone}};
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return service_config_from_json(parse_json(ss.str()));
    } catch (const FormatError& e) {
        throw ConfigError(std::string("configuration: ") + e.what());
    }
}

}  // namespace phrl
