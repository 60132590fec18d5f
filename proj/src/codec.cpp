#include "phrl/codec.hpp"

namespace phrl {

namespace {

template <typename F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string(what) + ": " + e.what());
    } catch (const std::logic_error& e) {
        throw FormatError(std::string(what) + ": " + e.what());
    }
}

void expect_schema(const Json& j, const char* schema, int version) {
    if (!j.is_object() || j.value("schema", std::string{}) != schema)
        throw FormatError(std::string("expected schema ") + schema);
    const int v = j.at("schema_version").get<int>();
    if (v != version)
        throw FormatError(std::string(schema) + ": unsupported schema_version " + std::to_string(v));
}

}  // namespace

std::string encode_line(const Json& j) { return j.dump(); }

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(e.what());
    }
}

Json to_json(const Event& e) {
    Json j;
    j["user_id"] = e.user_id;
    j["ts"] = e.ts;
    j["kind"] = std::string(to_string(e.kind));
    if (e.kind == EventKind::rating)
        j["value"] = e.rating;
    else
        j["value"] = e.message_id;
    return j;
}

Event event_from_json(const Json& j) {
    return guarded("event", [&] {
        Event e;
        e.user_id = j.at("user_id").get<std::string>();
        e.ts = j.at("ts").get<Seconds>();
        const auto kind = event_kind_from_string(j.at("kind").get<std::string>());
        if (!kind) throw FormatError("event: unknown kind " + j.at("kind").dump());
        e.kind = *kind;
        const auto& v = j.at("value");
        if (e.kind == EventKind::rating) {
            if (!v.is_number_integer()) throw FormatError("event: rating value must be an integer");
            e.rating = v.get<int>();
        } else {
            e.message_id = v.get<std::string>();
        }
        return e;
    });
}

Json to_json(const StateVector& s) {
    Json j;
    j["day_part"] = code(s.day_part);
    j["number_rating"] = s.number_rating;
    j["highest_rating"] = s.highest_rating;
    j["lowest_rating"] = s.lowest_rating;
    j["median_rating"] = s.median_rating;
    j["sd_rating"] = s.sd_rating;
    j["number_low_rating"] = s.number_low_rating;
    j["number_medium_rating"] = s.number_medium_rating;
    j["number_high_rating"] = s.number_high_rating;
    j["number_message_received"] = s.number_message_received;
    j["number_message_read"] = s.number_message_read;
    j["read_all_message"] = s.read_all_message;
    return j;
}

StateVector state_from_json(const Json& j) {
    return guarded("state", [&] {
        StateVector s;
        s.day_part = day_part_from_code(j.at("day_part").get<int>());
        s.number_rating = j.at("number_rating").get<int>();
        s.highest_rating = j.at("highest_rating").get<int>();
        s.lowest_rating = j.at("lowest_rating").get<int>();
        s.median_rating = j.at("median_rating").get<double>();
        s.sd_rating = j.at("sd_rating").get<double>();
        s.number_low_rating = j.at("number_low_rating").get<int>();
        s.number_medium_rating = j.at("number_medium_rating").get<int>();
        s.number_high_rating = j.at("number_high_rating").get<int>();
        s.number_message_received = j.at("number_message_received").get<int>();
        s.number_message_read = j.at("number_message_read").get<int>();
        s.read_all_message = j.at("read_all_message").get<int>();
        return s;
    });
}

Json to_json(const MessageEntry& m) {
    Json j;
    j["id"] = m.id;
    j["category"] = std::string(to_string(m.category));
    j["bucket"] = std::string(to_string(m.bucket));
    j["text"] = m.text;
    return j;
}

MessageEntry message_from_json(const Json& j) {
    return guarded("message", [&] {
        MessageEntry m;
        m.id = j.at("id").get<std::string>();
        const auto c = category_from_string(j.at("category").get<std::string>());
        const auto b = mood_bucket_from_string(j.at("bucket").get<std::string>());
        if (!c || !b) throw FormatError("message: unknown category or bucket");
        m.category = *c;
        m.bucket = *b;
        m.text = j.at("text").get<std::string>();
        return m;
    });
}

Json to_json(const Decision& d) {
    Json j;
    j["user_id"] = d.user_id;
    j["day"] = d.day;
    j["day_part"] = code(d.day_part);
    j["decided_at"] = d.decided_at;
    j["state"] = to_json(d.state);
    j["action"] = code(d.action);
    j["greedy_action"] = d.greedy_action ? Json(code(*d.greedy_action)) : Json(nullptr);
    j["message"] = d.message ? to_json(*d.message) : Json(nullptr);
    j["policy_key"] = d.policy_key;
    j["policy_version"] = d.policy_version;
    j["explored"] = d.explored;
    j["catalog_exhausted"] = d.catalog_exhausted;
    j["fallback_random"] = d.fallback_random;
    return j;
}

Decision decision_from_json(const Json& j) {
    return guarded("decision", [&] {
        Decision d;
        d.user_id = j.at("user_id").get<std::string>();
        d.day = j.at("day").get<int>();
        d.day_part = day_part_from_code(j.at("day_part").get<int>());
        d.decided_at = j.at("decided_at").get<Seconds>();
        d.state = state_from_json(j.at("state"));
        d.action = action_from_code(j.at("action").get<int>());
        if (!j.at("greedy_action").is_null()) d.greedy_action = action_from_code(j.at("greedy_action").get<int>());
        if (!j.at("message").is_null()) d.message = message_from_json(j.at("message"));
        d.policy_key = j.at("policy_key").get<std::string>();
        d.policy_version = j.at("policy_version").get<std::uint64_t>();
        d.explored = j.at("explored").get<bool>();
        d.catalog_exhausted = j.at("catalog_exhausted").get<bool>();
        d.fallback_random = j.at("fallback_random").get<bool>();
        return d;
    });
}

Json to_json(const Trace& t) {
    Json days = Json::array();
    for (const auto& [day, steps] : t.days) {
        Json js = Json::array();
        for (const auto& s : steps) js.push_back(Json{{"state", to_json(s.state)}, {"reward", s.reward}});
        days.push_back(Json{{"day", day}, {"steps", js}});
    }
    Json j;
    j["user_id"] = t.user_id;
    j["days"] = days;
    return j;
}

Trace trace_from_json(const Json& j) {
    return guarded("trace", [&] {
        Trace t;
        t.user_id = j.at("user_id").get<std::string>();
        for (const auto& d : j.at("days")) {
            auto& steps = t.days[d.at("day").get<int>()];
            for (const auto& s : d.at("steps"))
                steps.push_back({state_from_json(s.at("state")), s.at("reward").get<double>()});
        }
        t.validate();
        return t;
    });
}

namespace {

Json to_json(const SolverConfig& c) {
    Json j;
    j["gamma"] = c.gamma;
    j["epsilon"] = c.epsilon;
    j["max_iterations"] = c.max_iterations;
    j["stop_epsilon"] = c.stop_epsilon;
    j["ridge"] = c.ridge;
    j["tie_break"] = "first_wins";
    return j;
}

SolverConfig solver_config_from_json(const Json& j) {
    SolverConfig c;
    c.gamma = j.at("gamma").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.max_iterations = j.at("max_iterations").get<int>();
    c.stop_epsilon = j.at("stop_epsilon").get<double>();
    c.ridge = j.at("ridge").get<double>();
    if (j.at("tie_break").get<std::string>() != "first_wins") throw FormatError("policy: unknown tie_break");
    c.tie_break = TieBreak::first_wins;
    c.validate();
    return c;
}

Json to_json(const BinningScheme& s) {
    Json j = Json::array();
    for (int f = 0; f < kFeatureCount; ++f) {
        const auto& b = s.features[static_cast<std::size_t>(f)];
        Json e;
        e["feature"] = std::string(feature_name(static_cast<Feature>(f)));
        e["kind"] = b.kind == FeatureKind::categorical ? "categorical" : "continuous";
        e["cuts"] = b.cuts;
        j.push_back(e);
    }
    return j;
}

BinningScheme scheme_from_json(const Json& j) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(kFeatureCount))
        throw FormatError("policy: scheme must list " + std::to_string(kFeatureCount) + " features");
    BinningScheme s;
    for (int f = 0; f < kFeatureCount; ++f) {
        const auto& e = j[static_cast<std::size_t>(f)];
        if (e.at("feature").get<std::string>() != feature_name(static_cast<Feature>(f)))
            throw FormatError("policy: scheme features out of order");
        auto& b = s.features[static_cast<std::size_t>(f)];
        const auto kind = e.at("kind").get<std::string>();
        if (kind != "categorical" && kind != "continuous") throw FormatError("policy: unknown feature kind " + kind);
        b.kind = kind == "categorical" ? FeatureKind::categorical : FeatureKind::continuous;
        b.cuts = e.at("cuts").get<std::array<double, 3>>();
    }
    s.validate();
    return s;
}

}  // namespace

Json to_json(const Policy& p) {
    Json j;
    j["schema"] = "phrl.policy";
    j["schema_version"] = kPolicySchemaVersion;
    j["key"] = p.cluster_id ? Json(*p.cluster_id) : Json(nullptr);
    j["version"] = p.version;
    j["dimension"] = p.weights.dimension();
    j["weights"] = p.weights.w;
    j["config"] = to_json(p.config);
    j["scheme"] = to_json(p.scheme);
    j["converged"] = p.converged;
    j["iterations"] = p.iterations;
    j["watermark"] = Json{{"as_of_day", p.watermark.as_of_day}, {"experiences", p.watermark.experiences}};
    j["delta_history"] = p.delta_history;
    return j;
}

Policy policy_from_json(const Json& j) {
    return guarded("policy", [&] {
        expect_schema(j, "phrl.policy", kPolicySchemaVersion);
        Policy p;
        if (!j.at("key").is_null()) p.cluster_id = j.at("key").get<std::string>();
        p.version = j.at("version").get<std::uint64_t>();
        const auto dim = j.at("dimension").get<std::size_t>();
        p.weights.w = j.at("weights").get<std::vector<double>>();
        if (dim != static_cast<std::size_t>(kBasisDimension) || p.weights.dimension() != dim)
            throw FormatError("policy: dimension " + std::to_string(dim) + " with " +
                              std::to_string(p.weights.dimension()) + " weights, expected " +
                              std::to_string(kBasisDimension));
        if (!p.weights.all_finite()) throw FormatError("policy: non-finite weight");
        p.config = solver_config_from_json(j.at("config"));
        p.scheme = scheme_from_json(j.at("scheme"));
        p.converged = j.at("converged").get<bool>();
        p.iterations = j.at("iterations").get<int>();
        p.watermark.as_of_day = j.at("watermark").at("as_of_day").get<int>();
        p.watermark.experiences = j.at("watermark").at("experiences").get<std::size_t>();
        p.delta_history = j.at("delta_history").get<std::vector<double>>();
        return p;
    });
}

Json to_json(const ClusterModel& m) {
    Json j;
    j["schema"] = "phrl.cluster_model";
    j["schema_version"] = kClusterSchemaVersion;
    j["k"] = m.k;
    j["seed"] = m.seed;
    j["config_hash"] = m.config_hash;
    j["medoid_users"] = m.medoid_users;
    Json assignment = Json::object();
    for (const auto& [u, c] : m.assignment) assignment[u] = c;
    j["assignment"] = assignment;
    j["total_cost"] = m.total_cost;
    j["ranges"] = Json{{"feature_max", m.ranges.feature_max}, {"reward_cap", m.ranges.reward_cap}};
    Json traces = Json::array();
    for (const auto& t : m.medoid_traces) traces.push_back(to_json(t));
    j["medoid_traces"] = traces;
    return j;
}

ClusterModel cluster_model_from_json(const Json& j) {
    return guarded("cluster model", [&] {
        expect_schema(j, "phrl.cluster_model", kClusterSchemaVersion);
        ClusterModel m;
        m.k = j.at("k").get<int>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.config_hash = j.at("config_hash").get<std::string>();
        m.medoid_users = j.at("medoid_users").get<std::vector<UserId>>();
        for (const auto& [u, c] : j.at("assignment").items()) m.assignment[u] = c.get<int>();
        m.total_cost = j.at("total_cost").get<double>();
        m.ranges.feature_max = j.at("ranges").at("feature_max").get<std::array<double, kFeatureCount>>();
        m.ranges.reward_cap = j.at("ranges").at("reward_cap").get<double>();
        m.ranges.validate();
        for (const auto& t : j.at("medoid_traces")) m.medoid_traces.push_back(trace_from_json(t));
        if (m.config_hash != cluster_config_hash(m.k, m.seed, m.ranges))
            throw FormatError("cluster model: config hash does not match k, seed and ranges");
        m.validate();
        return m;
    });
}

}  // namespace phrl
