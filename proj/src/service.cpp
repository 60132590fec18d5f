#include "phrl/service.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace phrl {

namespace {

const std::string kUsersLog = "users.jsonl";
const std::string kEventsLog = "events.jsonl";
const std::string kDecisionsLog = "decisions.jsonl";
const std::string kJobsLog = "jobs.jsonl";
const std::string kIdempotencyLog = "idempotency.jsonl";
const std::string kPoliciesBlob = "policies.json";
const std::string kClusterBlob = "cluster_model.json";

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string url_decode(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
            std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
            out += static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16));
            i += 2;
        } else {
            out += s[i] == '+' ? ' ' : s[i];
        }
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

std::optional<long long> parse_int(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::size_t pos = 0;
    try {
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

int status_for(const std::string& code) {
    if (code == "UNKNOWN_MESSAGE" || code == "UNKNOWN_USER") return 404;
    return 400;
}

DayPart part_at(const DayPartSchedule& sched, Seconds ts) {
    const Seconds tod = ts - static_cast<Seconds>(day_of(ts)) * kSecondsPerDay;
    DayPart part = DayPart::morning;
    for (DayPart p : kAllDayParts)
        if (tod >= sched.decision_time[static_cast<std::size_t>(code(p))]) part = p;
    return part;
}

}  // namespace

void ServiceConfig::validate() const {
    if (timezone != "UTC") throw ConfigError("only the UTC timezone is supported, got " + timezone);
    engine.validate();
}

ApiResponse api_error(int status, const std::string& code, const std::string& message) {
    return {status, Json{{"error", Json{{"code", code}, {"message", message}}}}};
}

void LoopbackAdapter::queue(Event e) {
    std::lock_guard lock(mu_);
    inbox_.push_back(std::move(e));
}

std::vector<Event> LoopbackAdapter::fetch_events() {
    std::lock_guard lock(mu_);
    return std::exchange(inbox_, {});
}

void LoopbackAdapter::post_message(const UserId& user, const MessageEntry& message, Seconds sent_ts) {
    std::lock_guard lock(mu_);
    posted_.push_back({user, message.id, sent_ts});
}

std::vector<LoopbackAdapter::Posted> LoopbackAdapter::posted() const {
    std::lock_guard lock(mu_);
    return posted_;
}

Service::Service(ServiceConfig cfg, MessageCatalog catalog, std::shared_ptr<BlobStore> store,
                 std::shared_ptr<const Clock> clock)
    : cfg_(std::move(cfg)),
      store_(std::move(store)),
      clock_(std::move(clock)),
      engine_((cfg_.validate(), cfg_.engine), std::move(catalog)) {
    if (!store_ || !clock_) throw ContractViolation("service needs a blob store and a clock");
    replay();
}

void Service::set_outbound(std::shared_ptr<OutboundAdapter> adapter) {
    std::lock_guard lock(mu_);
    outbound_ = std::move(adapter);
}

void Service::replay() {
    std::lock_guard lock(mu_);
    auto lines_of = [&](const std::string& log) {
        if (store_->drop_torn_tail(log)) replay_.torn_logs.push_back(log);
        return store_->read_log(log).lines;
    };
    auto each = [&](const std::string& log, auto&& fn) {
        const auto lines = lines_of(log);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            try {
                fn(parse_json(lines[i]));
            } catch (const std::exception& e) {
                replay_.skipped.push_back(log + ":" + std::to_string(i + 1) + ": " + e.what());
            }
        }
    };

    each(kUsersLog, [&](const Json& j) {
        if (engine_.register_user(j.at("user_id").get<std::string>(), j.at("join_day").get<int>())) ++replay_.users;
    });
    each(kEventsLog, [&](const Json& j) {
        const auto r = engine_.events().ingest(event_from_json(j));
        if (!r.accepted) throw FormatError(r.code + ": " + r.reason);
        if (!r.duplicate) ++replay_.events;
    });
    each(kDecisionsLog, [&](const Json& j) {
        const auto d = decision_from_json(j);
        engine_.restore_decision(d);
        ++replay_.decisions;
        if (d.message) {
            const Event sent{d.user_id, d.decided_at, EventKind::message_sent, 0, d.message->id};
            const auto r = engine_.events().ingest(sent);
            // the process stopped between the decision line and its event line
            if (r.accepted && !r.duplicate) store_->append_line(kEventsLog, encode_line(to_json(sent)));
        }
    });

    if (const auto blob = store_->get(kClusterBlob)) {
        try {
            engine_.set_cluster_model(cluster_model_from_json(parse_json(*blob)));
            cluster_assignments_ = engine_.cluster_model()->assignment.size();
            replay_.cluster_model = true;
        } catch (const std::exception& e) {
            replay_.skipped.push_back(kClusterBlob + ": " + e.what());
        }
    }
    if (const auto blob = store_->get(kPoliciesBlob)) {
        try {
            const auto j = parse_json(*blob);
            for (const auto& run : j.at("runs")) runs_.insert(run.get<std::string>());
            std::map<std::string, Policy> loaded;
            for (const auto& pj : j.at("policies")) {
                auto p = policy_from_json(pj);
                if (!p.cluster_id) throw FormatError("policy without key");
                loaded.emplace(*p.cluster_id, std::move(p));
            }
            replay_.policies = loaded.size();
            engine_.policies().publish(loaded);
        } catch (const std::exception& e) {
            replay_.skipped.push_back(kPoliciesBlob + ": " + e.what());
        }
    }

    Seconds horizon = 0;
    each(kJobsLog, [&](const Json& j) {
        ++replay_.jobs;
        horizon = std::max<Seconds>(horizon, j.at("at").get<Seconds>());
        if (j.at("status").get<std::string>() == "succeeded")
            succeeded_.insert(j.at("job").get<std::string>());
        else
            ++failures_;
    });
    each(kIdempotencyLog, [&](const Json& j) {
        idempotent_[j.at("key").get<std::string>()] = {j.at("status").get<int>(), j.at("body")};
        ++replay_.idempotency_keys;
    });

    for (const auto& u : engine_.users())
        for (const auto& d : engine_.decisions_of(u)) metrics_.on_decision(d);
    metrics_.close_until(engine_, horizon);
}

Seconds Service::sealed_until() const {
    std::lock_guard lock(mu_);
    return metrics_.horizon();
}

std::set<std::string> Service::succeeded_jobs() const {
    std::lock_guard lock(mu_);
    return succeeded_;
}

std::size_t Service::job_failures() const {
    std::lock_guard lock(mu_);
    return failures_;
}

void Service::record_job(const Job& job, bool ok, const std::string& error) {
    Json j{{"job", job.key}, {"status", ok ? "succeeded" : "failed"}, {"at", clock_->now()}};
    if (!error.empty()) j["error"] = error;
    store_->append_line(kJobsLog, encode_line(j));
    if (ok)
        succeeded_.insert(job.key);
    else
        ++failures_;
}

TickReport Service::tick() {
    std::lock_guard tick_lock(tick_mu_);
    TickReport report;
    const Seconds now = clock_->now();
    for (const auto& job : jobs_due(cfg_.engine, now)) {
        {
            std::lock_guard lock(mu_);
            if (succeeded_.count(job.key)) continue;
            metrics_.close_until(engine_, job.due);
        }
        try {
            run_job(job);
            std::lock_guard lock(mu_);
            record_job(job, true, {});
            report.fired.push_back(job.key);
        } catch (const std::exception& e) {
            std::lock_guard lock(mu_);
            record_job(job, false, e.what());
            report.failed[job.key] = e.what();
        }
    }
    std::lock_guard lock(mu_);
    metrics_.close_until(engine_, now);
    return report;
}

void Service::run_job(const Job& job) {
    switch (job.kind) {
        case JobKind::decide: {
            std::lock_guard lock(mu_);
            run_decisions(job.day, job.part);
            return;
        }
        case JobKind::train: {
            {
                std::lock_guard lock(mu_);
                if (runs_.count(job.key)) return;
            }
            train(job.day, job.key);
            return;
        }
        case JobKind::cluster: {
            {
                std::lock_guard lock(mu_);
                if (!engine_.cluster_model()) {
                    engine_.run_clustering_once(job.day);
                    persist_cluster_model();
                }
                if (cfg_.engine.mode != PersonalizationMode::grouped || job.day < 1 || runs_.count(job.key)) return;
            }
            train(job.day - 1, job.key);
            return;
        }
    }
}

void Service::run_decisions(int day, DayPart part) {
    for (const auto& user : engine_.users()) {
        if (engine_.join_day(user) > day || engine_.logged_decision(user, day, part)) continue;
        const auto d = engine_.decide(user, day, part);
        store_->append_line(kDecisionsLog, encode_line(to_json(d)));
        if (d.message) {
            const Event sent{user, d.decided_at, EventKind::message_sent, 0, d.message->id};
            store_->append_line(kEventsLog, encode_line(to_json(sent)));
            if (outbound_) outbound_->post_message(user, *d.message, d.decided_at);
        }
        metrics_.on_decision(d);
    }
    if (engine_.cluster_model() && engine_.cluster_model()->assignment.size() != cluster_assignments_)
        persist_cluster_model();
}

TrainingReport Service::train(int as_of_day, const std::string& run_id) {
    std::lock_guard train_lock(train_mu_);
    TrainingJob job;
    {
        std::lock_guard lock(mu_);
        job = engine_.prepare_training(as_of_day);
    }
    auto report = engine_.run_training(job);
    std::lock_guard lock(mu_);
    engine_.publish(report);
    if (!run_id.empty()) runs_.insert(run_id);
    persist_policies();
    return report;
}

void Service::persist_policies() {
    Json runs = Json::array();
    for (const auto& r : runs_) runs.push_back(r);
    Json policies = Json::array();
    for (const auto& [key, p] : *engine_.policies().snapshot()) policies.push_back(to_json(*p));
    store_->put(kPoliciesBlob, encode_line(Json{{"runs", std::move(runs)}, {"policies", std::move(policies)}}));
}

void Service::persist_cluster_model() {
    const auto& model = engine_.cluster_model();
    if (!model) return;
    store_->put(kClusterBlob, encode_line(to_json(*model)));
    cluster_assignments_ = model->assignment.size();
}

std::size_t Service::pull_events() {
    std::shared_ptr<OutboundAdapter> adapter;
    {
        std::lock_guard lock(mu_);
        adapter = outbound_;
    }
    if (!adapter) return 0;
    std::size_t fresh = 0;
    for (const auto& e : adapter->fetch_events()) {
        std::lock_guard lock(mu_);
        fresh += ingest_locked(e).status == 201;
    }
    return fresh;
}

ApiResponse Service::ingest_locked(const Event& e) {
    if (!engine_.is_registered(e.user_id)) return api_error(404, "UNKNOWN_USER", "unknown user " + e.user_id);
    auto& store = engine_.events();
    if (e.ts >= 0 && e.ts < metrics_.horizon()) {
        const auto& mine = store.events_of(e.user_id);
        if (std::find(mine.begin(), mine.end(), e) != mine.end()) {
            const auto& log = store.log();
            const auto id = static_cast<EventId>(std::find(log.begin(), log.end(), e) - log.begin());
            return {200, Json{{"event_id", id}, {"duplicate", true}}};
        }
        return api_error(409, "LATE_EVENT",
                         "timestamp " + std::to_string(e.ts) + " precedes the closed window ending at " +
                             std::to_string(metrics_.horizon()));
    }
    const auto r = store.ingest(e);
    if (!r.accepted) return api_error(status_for(r.code), r.code, r.reason);
    if (!r.duplicate) store_->append_line(kEventsLog, encode_line(to_json(store.log()[r.id])));
    return {r.duplicate ? 200 : 201, Json{{"event_id", r.id}, {"duplicate", r.duplicate}}};
}

ApiResponse Service::handle(const std::string& method, const std::string& target, const std::string& body,
                            const Headers& headers) {
    Headers h;
    for (const auto& [k, v] : headers) h[lower(k)] = v;

    const auto qpos = target.find('?');
    const std::string path = target.substr(0, qpos);
    std::map<std::string, std::string> query;
    if (qpos != std::string::npos)
        for (const auto& kv : split(target.substr(qpos + 1), '&')) {
            const auto eq = kv.find('=');
            query[url_decode(kv.substr(0, eq))] = eq == std::string::npos ? "" : url_decode(kv.substr(eq + 1));
        }

    if (!cfg_.api_token.empty() && path != "/health") {
        auto it = h.find("authorization");
        if (it == h.end() || it->second != "Bearer " + cfg_.api_token)
            return api_error(401, "UNAUTHORIZED", "missing or invalid bearer token");
    }

    std::string idem_key;
    if (method == "POST")
        if (auto it = h.find("idempotency-key"); it != h.end() && !it->second.empty()) {
            idem_key = it->second;
            std::lock_guard lock(mu_);
            if (auto hit = idempotent_.find(idem_key); hit != idempotent_.end()) return hit->second;
        }

    ApiResponse resp;
    try {
        resp = route(method, path, query, body);
    } catch (const FormatError& e) {
        resp = api_error(400, "BAD_REQUEST", e.what());
    } catch (const nlohmann::json::exception& e) {
        resp = api_error(400, "BAD_REQUEST", e.what());
    } catch (const std::logic_error& e) {
        resp = api_error(409, "CONFLICT", e.what());
    } catch (const std::exception& e) {
        resp = api_error(500, "INTERNAL", e.what());
    }

    if (!idem_key.empty() && resp.status < 500) {
        std::lock_guard lock(mu_);
        if (idempotent_.emplace(idem_key, resp).second)
            store_->append_line(kIdempotencyLog,
                                encode_line(Json{{"key", idem_key}, {"status", resp.status}, {"body", resp.body}}));
    }
    return resp;
}

ApiResponse Service::route(const std::string& method, const std::string& path,
                           const std::map<std::string, std::string>& query, const std::string& body) {
    std::vector<std::string> seg;
    for (const auto& s : split(path, '/'))
        if (!s.empty()) seg.push_back(url_decode(s));

    auto body_json = [&] {
        if (body.empty()) return Json::object();
        auto j = parse_json(body);
        if (!j.is_object()) throw FormatError("request body must be a JSON object");
        return j;
    };
    auto query_int = [&](const std::string& name) -> std::optional<long long> {
        auto it = query.find(name);
        if (it == query.end()) return std::nullopt;
        auto v = parse_int(it->second);
        if (!v) throw FormatError("query parameter " + name + " must be an integer");
        return v;
    };
    auto optional_int = [](const Json& j, const char* name) -> std::optional<long long> {
        if (!j.contains(name) || j[name].is_null()) return std::nullopt;
        if (!j[name].is_number_integer()) throw FormatError(std::string(name) + " must be an integer");
        return j[name].get<long long>();
    };
    auto allow = [&](const char* m) { return method == m; };
    auto wrong_method = [&] { return api_error(405, "METHOD_NOT_ALLOWED", method + " " + path); };

    if (seg.size() == 1 && seg[0] == "health") {
        if (!allow("GET")) return wrong_method();
        std::lock_guard lock(mu_);
        const Seconds now = clock_->now();
        return {200, Json{{"status", "ok"},
                          {"now", now},
                          {"day", day_of(now)},
                          {"users", engine_.users().size()},
                          {"events", engine_.events().log().size()},
                          {"decisions", engine_.decision_count()},
                          {"jobs_succeeded", succeeded_.size()},
                          {"job_failures", failures_},
                          {"policies", engine_.policies().snapshot()->size()}}};
    }
    if (seg.size() == 1 && seg[0] == "users") {
        if (!allow("POST")) return wrong_method();
        return post_user(body_json());
    }
    if (seg.size() == 2 && seg[0] == "events") {
        if (!allow("POST")) return wrong_method();
        const auto j = body_json();
        Event e;
        if (!j.contains("user_id") || !j["user_id"].is_string())
            return api_error(400, "BAD_EVENT", "user_id must be a string");
        e.user_id = j["user_id"].get<std::string>();
        std::optional<long long> ts;
        try {
            ts = optional_int(j, "ts");
        } catch (const FormatError& err) {
            return api_error(400, "BAD_EVENT", err.what());
        }
        e.ts = ts ? *ts : clock_->now();
        if (seg[1] == "rating") {
            e.kind = EventKind::rating;
            if (!j.contains("rating") || !j["rating"].is_number_integer())
                return api_error(400, "BAD_EVENT", "rating must be an integer");
            const auto r = j["rating"].get<long long>();
            if (r < 1 || r > 7) return api_error(400, "OUT_OF_RANGE", "rating must lie in 1..7");
            e.rating = static_cast<int>(r);
        } else if (seg[1] == "message-read") {
            e.kind = EventKind::message_read;
            if (!j.contains("message_id") || !j["message_id"].is_string())
                return api_error(400, "BAD_EVENT", "message_id must be a string");
            e.message_id = j["message_id"].get<std::string>();
        } else {
            return api_error(404, "NOT_FOUND", path);
        }
        return post_event(e);
    }
    if (seg.size() == 2 && seg[0] == "inbox") {
        if (!allow("GET")) return wrong_method();
        return get_inbox(seg[1], query_int("since").value_or(0));
    }
    if (seg.size() == 2 && seg[0] == "decisions") {
        if (!allow("GET")) return wrong_method();
        return get_decisions(seg[1]);
    }
    if (seg.size() == 1 && seg[0] == "metrics") {
        if (!allow("GET")) return wrong_method();
        const int today = std::max(0, day_of(clock_->now()));
        const auto from = query_int("from_day").value_or(0);
        const auto to = query_int("to_day").value_or(today);
        if (from < 0 || to < from || to > 100000)
            return api_error(400, "OUT_OF_RANGE", "need 0 <= from_day <= to_day");
        return {200, metrics(static_cast<int>(from), static_cast<int>(to))};
    }
    if (!seg.empty() && seg[0] == "policies" && seg.size() <= 2) {
        if (!allow("GET")) return wrong_method();
        if (seg.size() == 1) return get_policies();
        std::lock_guard lock(mu_);
        if (!engine_.policies().get(seg[1])) return api_error(404, "NOT_FOUND", "no policy " + seg[1]);
        return {200, parse_json(engine_.export_policy(seg[1]))};
    }
    if (seg.size() == 1 && seg[0] == "clusters") {
        if (!allow("GET")) return wrong_method();
        std::lock_guard lock(mu_);
        const auto& model = engine_.cluster_model();
        if (!model) return api_error(404, "NO_MODEL", "clustering has not run");
        return {200, to_json(*model)};
    }
    if (seg.size() == 2 && seg[0] == "admin") {
        if (!allow("POST")) return wrong_method();
        const auto j = body_json();
        const auto day = optional_int(j, "as_of_day");
        if (day && (*day < 0 || *day > 100000)) return api_error(400, "OUT_OF_RANGE", "as_of_day out of range");
        const std::optional<int> as_of = day ? std::optional<int>(static_cast<int>(*day)) : std::nullopt;
        if (seg[1] == "train") return admin_train(as_of);
        if (seg[1] == "cluster") return admin_cluster(as_of, j.value("force", false));
        if (seg[1] == "tick") {
            const auto r = tick();
            Json failed = Json::object();
            for (const auto& [k, v] : r.failed) failed[k] = v;
            return {200, Json{{"fired", r.fired}, {"failed", failed}}};
        }
    }
    return api_error(404, "NOT_FOUND", path);
}

ApiResponse Service::post_user(const Json& body) {
    if (!body.contains("user_id") || !body["user_id"].is_string() || body["user_id"].get<std::string>().empty())
        return api_error(400, "BAD_REQUEST", "user_id must be a nonempty string");
    const auto user = body["user_id"].get<std::string>();
    std::lock_guard lock(mu_);
    int join = std::max(0, day_of(clock_->now()));
    if (body.contains("join_day")) {
        if (!body["join_day"].is_number_integer() || body["join_day"].get<int>() < 0)
            return api_error(400, "OUT_OF_RANGE", "join_day must be a nonnegative integer");
        join = body["join_day"].get<int>();
    }
    if (!engine_.register_user(user, join))
        return {200, Json{{"user_id", user}, {"join_day", engine_.join_day(user)}, {"created", false}}};
    store_->append_line(kUsersLog, encode_line(Json{{"user_id", user}, {"join_day", join}}));
    return {201, Json{{"user_id", user}, {"join_day", join}, {"created", true}}};
}

ApiResponse Service::post_event(const Event& e) {
    std::lock_guard lock(mu_);
    return ingest_locked(e);
}

ApiResponse Service::get_inbox(const UserId& user, Seconds since) const {
    std::lock_guard lock(mu_);
    if (!engine_.is_registered(user)) return api_error(404, "UNKNOWN_USER", "unknown user " + user);
    Json messages = Json::array();
    for (const auto& d : engine_.events().deliveries(user, since)) {
        Json m{{"message_id", d.message_id}, {"sent_ts", d.sent_ts}};
        m["read_ts"] = d.read_ts ? Json(*d.read_ts) : Json(nullptr);
        m["day"] = day_of(d.sent_ts);
        m["day_part"] = std::string(to_string(part_at(cfg_.engine.schedule, d.sent_ts)));
        if (const auto* entry = engine_.catalog().find(d.message_id)) {
            m["category"] = std::string(to_string(entry->category));
            m["text"] = entry->text;
        }
        messages.push_back(std::move(m));
    }
    return {200, Json{{"user_id", user}, {"messages", std::move(messages)}}};
}

ApiResponse Service::get_decisions(const UserId& user) const {
    std::lock_guard lock(mu_);
    if (!engine_.is_registered(user)) return api_error(404, "UNKNOWN_USER", "unknown user " + user);
    Json out = Json::array();
    for (const auto& d : engine_.decisions_of(user)) out.push_back(to_json(d));
    return {200, Json{{"user_id", user}, {"decisions", std::move(out)}}};
}

ApiResponse Service::get_policies() const {
    std::lock_guard lock(mu_);
    Json out = Json::array();
    for (const auto& [key, p] : *engine_.policies().snapshot())
        out.push_back(Json{{"key", key},
                           {"version", p->version},
                           {"as_of_day", p->watermark.as_of_day},
                           {"experiences", p->watermark.experiences},
                           {"converged", p->converged},
                           {"iterations", p->iterations}});
    return {200, Json{{"policies", std::move(out)}}};
}

ApiResponse Service::admin_train(std::optional<int> as_of_day) {
    if (!as_of_day) {
        const Seconds now = clock_->now();
        const int today = std::max(0, day_of(now));
        as_of_day = now >= engine_.training_cutoff(today) ? today : today - 1;
    }
    if (*as_of_day < 0) return api_error(409, "NO_DATA", "no complete study day to train on");
    {
        std::lock_guard lock(mu_);
        if (engine_.prepare_training(*as_of_day).experiences == 0)
            return api_error(409, "NO_DATA", "no experiences available up to day " + std::to_string(*as_of_day));
    }
    const auto report = train(*as_of_day, {});
    Json trained = Json::object();
    for (const auto& [key, p] : report.trained) trained[key] = p.version;
    Json failures = Json::object();
    for (const auto& [key, msg] : report.failures) failures[key] = msg;
    return {200, Json{{"as_of_day", report.as_of_day},
                      {"experiences", report.experiences},
                      {"trained", std::move(trained)},
                      {"skipped", report.skipped},
                      {"failures", std::move(failures)},
                      {"missing_decisions", report.quality.missing_decisions},
                      {"pending", report.quality.pending}}};
}

ApiResponse Service::admin_cluster(std::optional<int> as_of_day, bool force) {
    std::lock_guard lock(mu_);
    const int day = as_of_day.value_or(std::max(0, day_of(clock_->now())));
    try {
        engine_.run_clustering_once(day, force);
    } catch (const std::logic_error& e) {
        return api_error(409, "CLUSTERING_UNAVAILABLE", e.what());
    }
    persist_cluster_model();
    const auto& m = *engine_.cluster_model();
    Json assignment = Json::object();
    for (const auto& [u, c] : m.assignment) assignment[u] = c;
    return {200, Json{{"k", m.k}, {"medoid_users", m.medoid_users}, {"assignment", std::move(assignment)},
                      {"total_cost", m.total_cost}}};
}

Json Service::metrics(int from_day, int to_day) const {
    std::lock_guard lock(mu_);
    return metrics_report(metrics_.data(), from_day, to_day);
}

Json Service::metrics_from_logs(int from_day, int to_day) const {
    std::lock_guard lock(mu_);
    return metrics_report(collect_metrics(engine_, metrics_.horizon()), from_day, to_day);
}

}  // namespace phrl
