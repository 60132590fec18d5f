#include "phrl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace phrl {

namespace {

template <std::size_t N>
std::array<double, N> prob_array(const Json& j, const char* name) {
    const auto& a = j.at(name);
    if (!a.is_array() || a.size() != N)
        throw ConfigError(std::string(name) + " must hold " + std::to_string(N) + " probabilities");
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = a[i].get<double>();
    return out;
}

void check_prob(double p, const std::string& what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(what + " must lie in [0, 1]");
}

UserProfile make_profile(std::array<double, kActions> read, std::array<double, kDayParts> rating, double mood,
                         double sd, std::array<double, kActions> coupling) {
    UserProfile p;
    p.read_prob = read;
    p.rating_prob = rating;
    p.mood_mean = mood;
    p.mood_sd = sd;
    p.coupling = coupling;
    return p;
}

Seconds draw_time(Rng& rng, Seconds from, Seconds window_end) {
    const Seconds lo = from + 60, hi = window_end - 60;
    if (hi <= lo) return from + (window_end - from) / 2;
    return lo + static_cast<Seconds>(rng.uniform_index(static_cast<std::size_t>(hi - lo)));
}

StepContext context_for(const DecisionEngine& eng, const Decision& d) {
    StepContext ctx;
    const auto& sched = eng.config().schedule;
    ctx.window_end = sched.reward_boundary_ts(d.day, d.day_part);
    std::optional<Decision> prev;
    if (d.day_part != DayPart::morning)
        prev = eng.logged_decision(d.user_id, d.day, day_part_from_code(code(d.day_part) - 1));
    else if (d.day > 0)
        prev = eng.logged_decision(d.user_id, d.day - 1, DayPart::evening);
    const auto deliveries = eng.events().deliveries(d.user_id, static_cast<Seconds>(d.day - 1) * kSecondsPerDay);
    for (const auto& del : deliveries) {
        if (prev && prev->message && del.message_id == prev->message->id && del.sent_ts == prev->decided_at &&
            del.read_ts && *del.read_ts < d.decided_at)
            ctx.prior_read_category = prev->action;
        if (day_of(del.sent_ts) == d.day && del.sent_ts < d.decided_at && !del.read_ts)
            ctx.unread_today.push_back(del.message_id);
    }
    return ctx;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string pm(const Json& s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%5.2f +- %4.2f", s.at("mean").get<double>(), s.at("sd").get<double>());
    return buf;
}

}  // namespace

void UserProfile::validate() const {
    for (double p : read_prob) check_prob(p, "read_prob");
    for (double p : rating_prob) check_prob(p, "rating_prob");
    for (double p : coupling) check_prob(p, "coupling");
    check_prob(read_rating_lift, "read_rating_lift");
    if (!(mood_sd >= 0.0) || !std::isfinite(mood_mean)) throw ConfigError("mood parameters must be finite, sd >= 0");
    if (dropout_day && *dropout_day < 0) throw ConfigError("dropout_day must be nonnegative");
}

Json to_json(const UserProfile& p) {
    Json j{{"read_prob", p.read_prob}, {"rating_prob", p.rating_prob}, {"mood_mean", p.mood_mean},
           {"mood_sd", p.mood_sd}};
    if (p.dropout_day) j["dropout_day"] = *p.dropout_day;
    j["coupling"] = p.coupling;
    j["read_rating_lift"] = p.read_rating_lift;
    return j;
}

UserProfile profile_from_json(const Json& j) {
    UserProfile p;
    p.read_prob = prob_array<kActions>(j, "read_prob");
    p.rating_prob = prob_array<kDayParts>(j, "rating_prob");
    p.mood_mean = j.value("mood_mean", 4.0);
    p.mood_sd = j.value("mood_sd", 1.0);
    if (j.contains("dropout_day") && !j["dropout_day"].is_null()) p.dropout_day = j["dropout_day"].get<int>();
    if (j.contains("coupling")) p.coupling = prob_array<kActions>(j, "coupling");
    p.read_rating_lift = j.value("read_rating_lift", 0.0);
    p.validate();
    return p;
}

void CohortSpec::validate() const {
    if (groups.empty()) throw ConfigError("cohort needs at least one group");
    std::set<std::string> prefixes;
    for (const auto& g : groups) {
        if (!profiles.count(g.profile)) throw ConfigError("cohort group uses unknown profile " + g.profile);
        if (g.count < 0) throw ConfigError("cohort group count must be nonnegative");
        if (!prefixes.insert(g.prefix).second) throw ConfigError("duplicate cohort prefix " + g.prefix);
    }
    for (const auto& [_, p] : profiles) p.validate();
}

std::vector<std::pair<UserId, std::string>> CohortSpec::users() const {
    std::vector<std::pair<UserId, std::string>> out;
    for (const auto& g : groups)
        for (int i = 0; i < g.count; ++i) {
            char idx[16];
            std::snprintf(idx, sizeof idx, "%02d", i);
            out.emplace_back(g.prefix + idx, g.profile);
        }
    return out;
}

Json to_json(const CohortSpec& c) {
    Json profiles = Json::object();
    for (const auto& [name, p] : c.profiles) profiles[name] = to_json(p);
    Json users = Json::array();
    for (const auto& g : c.groups) users.push_back(Json{{"profile", g.profile}, {"count", g.count}, {"prefix", g.prefix}});
    return Json{{"profiles", std::move(profiles)}, {"users", std::move(users)}};
}

CohortSpec cohort_from_json(const Json& j) {
    CohortSpec c;
    try {
        for (const auto& [name, pj] : j.at("profiles").items()) c.profiles[name] = profile_from_json(pj);
        for (const auto& g : j.at("users")) {
            CohortGroup group;
            group.profile = g.at("profile").get<std::string>();
            group.count = g.at("count").get<int>();
            group.prefix = g.value("prefix", group.profile);
            c.groups.push_back(std::move(group));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("cohort spec: ") + e.what());
    }
    c.validate();
    return c;
}

CohortSpec load_cohort(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read cohort spec " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return cohort_from_json(parse_json(ss.str()));
    } catch (const FormatError& e) {
        throw ConfigError(std::string("cohort spec: ") + e.what());
    }
}

CohortSpec default_cohort() {
    CohortSpec c;
    auto responder = [](std::array<double, kActions> read, double mood, Action favourite) {
        std::array<double, kActions> coupling{};
        coupling[static_cast<std::size_t>(code(favourite))] = 0.2;
        auto p = make_profile(read, {0.30, 0.35, 0.60}, mood, 0.6, coupling);
        p.read_rating_lift = 0.6;
        return p;
    };
    const auto enc = responder({0.20, 0.85, 0.30, 0.10}, 6.5, Action::encouraging);
    const auto inf = responder({0.20, 0.30, 0.85, 0.10}, 4.5, Action::informing);
    const auto aff = responder({0.20, 0.10, 0.30, 0.85}, 2.0, Action::affirming);
    const auto dormant = make_profile({0.0, 0.02, 0.02, 0.02}, {0.01, 0.01, 0.02}, 4.0, 1.5, {});
    auto dropout = [](UserProfile p) {
        p.dropout_day = 7;
        return p;
    };
    c.profiles = {{"encouraging", enc},           {"informing", inf},
                  {"affirming", aff},             {"encouraging_dropout", dropout(enc)},
                  {"informing_dropout", dropout(inf)}, {"affirming_dropout", dropout(aff)},
                  {"dormant", dormant}};
    c.groups = {{"encouraging", 7, "enc"},          {"informing", 4, "inf"},
                {"affirming", 2, "aff"},            {"encouraging_dropout", 4, "enc-drop"},
                {"informing_dropout", 2, "inf-drop"}, {"affirming_dropout", 2, "aff-drop"},
                {"dormant", 6, "dormant"}};
    return c;
}

CohortSpec indifferent_cohort(int users) {
    CohortSpec c;
    c.profiles["indifferent"] = make_profile({0.0, 0.0, 0.0, 0.0}, {0.5, 0.5, 0.5}, 4.0, 1.5, {});
    c.groups = {{"indifferent", users, "ind"}};
    return c;
}

CohortSpec responder_cohort(Action favourite, int users) {
    std::array<double, kActions> read{0.3, 0.4, 0.4, 0.4};
    std::array<double, kActions> coupling{};
    read[static_cast<std::size_t>(code(favourite))] = 0.9;
    coupling[static_cast<std::size_t>(code(favourite))] = 0.15;
    CohortSpec c;
    c.profiles["responder"] = make_profile(read, {0.5, 0.55, 0.8}, 4.5, 1.2, coupling);
    c.groups = {{"responder", users, "resp"}};
    return c;
}

std::vector<Event> simulate_user_step(const UserProfile& profile, const Decision& d, const StepContext& ctx, Rng& rng) {
    std::vector<Event> out;
    if (profile.dropout_day && d.day >= *profile.dropout_day) return out;
    const double boost = ctx.prior_read_category ? profile.coupling[static_cast<std::size_t>(code(*ctx.prior_read_category))] : 0.0;
    auto chance = [&](double p) { return rng.bernoulli(std::min(1.0, p + boost)); };

    if (d.message) {
        if (chance(profile.read_prob[static_cast<std::size_t>(code(d.action))]))
            out.push_back({d.user_id, draw_time(rng, d.decided_at, ctx.window_end), EventKind::message_read, 0,
                           d.message->id});
    } else if (!ctx.unread_today.empty() && chance(profile.read_prob[0])) {
        out.push_back({d.user_id, draw_time(rng, d.decided_at, ctx.window_end), EventKind::message_read, 0,
                       ctx.unread_today.front()});
    }
    const double lift = out.empty() ? 0.0 : profile.read_rating_lift;
    if (chance(profile.rating_prob[static_cast<std::size_t>(code(d.day_part))] + lift)) {
        const long v = std::lround(rng.normal(profile.mood_mean, profile.mood_sd));
        out.push_back({d.user_id, draw_time(rng, d.decided_at, ctx.window_end), EventKind::rating,
                       static_cast<int>(std::clamp(v, 1L, 7L)), {}});
    }
    return out;
}

ExperimentReport run_experiment(const CohortSpec& cohort, const ExperimentOptions& opts) {
    cohort.validate();
    if (opts.days < 1) throw ConfigError("experiment needs at least one day");
    ServiceConfig sc;
    sc.engine.mode = opts.mode;
    sc.engine.k = opts.k;
    sc.engine.seed = opts.seed;
    sc.engine.reward = opts.reward;
    auto store = opts.store ? opts.store : std::make_shared<MemoryBlobStore>();
    auto clock = std::make_shared<VirtualClock>(0);
    auto svc_ptr = std::make_unique<Service>(sc, MessageCatalog::builtin(), store, clock);
    auto restarts = opts.restarts;
    std::sort(restarts.begin(), restarts.end());
    auto next_restart = restarts.begin();

    auto svc = [&]() -> Service& { return *svc_ptr; };
    ExperimentReport report;
    for (const auto& [user, profile] : cohort.users()) {
        svc().handle("POST", "/users", Json{{"user_id", user}, {"join_day", 0}}.dump());
        report.profile_of[user] = profile;
    }

    auto respond = [&](const std::string& key) {
        if (key.rfind("decide:", 0) != 0) return;
        const auto colon = key.find(':', 7);
        const int day = std::stoi(key.substr(7, colon - 7));
        const DayPart part = day_part_from_code(std::stoi(key.substr(colon + 1)));
        std::vector<std::pair<Decision, StepContext>> moments = svc().inspect([&](const DecisionEngine& eng) {
            std::vector<std::pair<Decision, StepContext>> out;
            for (const auto& u : eng.users())
                if (auto d = eng.logged_decision(u, day, part)) out.emplace_back(*d, context_for(eng, *d));
            return out;
        });
        for (const auto& [d, ctx] : moments) {
            Rng rng(mix_seed(opts.seed, 0x51u, hash_string(d.user_id), static_cast<std::uint64_t>(day),
                             static_cast<std::uint64_t>(code(part))));
            const auto& profile = cohort.profiles.at(report.profile_of.at(d.user_id));
            for (const auto& e : simulate_user_step(profile, d, ctx, rng)) {
                Json body{{"user_id", e.user_id}, {"ts", e.ts}};
                if (e.kind == EventKind::rating) {
                    body["rating"] = e.rating;
                    svc().handle("POST", "/events/rating", body.dump());
                } else {
                    body["message_id"] = e.message_id;
                    svc().handle("POST", "/events/message-read", body.dump());
                }
            }
        }
    };

    const Seconds end = static_cast<Seconds>(opts.days) * kSecondsPerDay;
    auto advance_to = [&](Seconds t) {
        for (; next_restart != restarts.end() && *next_restart <= t; ++next_restart) {
            if (*next_restart > clock->now()) clock->set(*next_restart);
            svc_ptr.reset();
            svc_ptr = std::make_unique<Service>(sc, MessageCatalog::builtin(), store, clock);
            ++report.restarts;
        }
        clock->set(t);
    };
    for (Seconds t = next_due_after(sc.engine, 0); t <= end; t = next_due_after(sc.engine, t)) {
        advance_to(t);
        for (const auto& key : svc().tick().fired) respond(key);
    }
    advance_to(end);
    svc().tick();

    report.metrics = svc().metrics(0, opts.days - 1);
    report.job_failures = svc().job_failures();
    svc().inspect([&](const DecisionEngine& eng) {
        report.clusters = eng.cluster_model();
        report.events = eng.events().log().size();
        report.decisions = eng.decision_count();
        for (const auto& u : eng.users()) {
            std::set<std::pair<int, std::string>> seen;
            for (const auto& d : eng.decisions_of(u))
                if (d.message && !seen.insert({d.day, d.message->id}).second) ++report.repeated_messages;
        }
        return 0;
    });
    return report;
}

Json to_json(const ExperimentReport& r) {
    Json profiles = Json::object();
    for (const auto& [u, p] : r.profile_of) profiles[u] = p;
    Json clusters = nullptr;
    if (r.clusters) {
        clusters = Json::object();
        for (const auto& [u, c] : r.clusters->assignment) clusters[u] = c;
    }
    return Json{{"decisions", r.decisions},
                {"events", r.events},
                {"repeated_messages", r.repeated_messages},
                {"job_failures", r.job_failures},
                {"profiles", std::move(profiles)},
                {"clusters", std::move(clusters)},
                {"metrics", r.metrics}};
}

std::string report_tables(const ExperimentReport& r) {
    std::ostringstream out;
    const auto& weeks = r.metrics.at("weeks");
    out << "Executed and greedy actions per week (share of decisions)\n";
    out << "week  kind      none   encour inform affirm\n";
    for (const auto& w : weeks)
        for (const auto* kind : {"actions", "greedy"}) {
            const auto& c = w.at(kind);
            double total = 0;
            for (Action a : kAllActions) total += c.at(std::string(to_string(a))).get<double>();
            char line[128];
            std::snprintf(line, sizeof line, "%-5d %-8s", w.at("week").get<int>(), kind);
            out << line;
            for (Action a : kAllActions) {
                std::snprintf(line, sizeof line, " %6.3f",
                              total > 0 ? c.at(std::string(to_string(a))).get<double>() / total : 0.0);
                out << line;
            }
            out << '\n';
        }
    out << "\nMean +- SD reward per user per day part (active = without dormant and inactive users)\n";
    out << "week  variant  morning        afternoon      evening        all\n";
    for (const auto& w : weeks)
        for (const auto* variant : {"reward", "reward_active"}) {
            char line[64];
            std::snprintf(line, sizeof line, "%-5d %-8s", w.at("week").get<int>(),
                          std::string(variant) == "reward" ? "all" : "active");
            out << line;
            for (const auto* part : {"morning", "afternoon", "evening", "all"}) out << ' ' << pm(w.at(variant).at(part));
            out << '\n';
        }
    out << "\ndecisions " << r.decisions << ", events " << r.events << ", repeated messages " << r.repeated_messages
        << ", dormant users " << r.metrics.at("dormant_users").size() << '\n';
    return out.str();
}

void write_report_files(const ExperimentReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
        return f;
    };
    open("report.json") << to_json(r).dump(2) << '\n';
    open("tables.txt") << report_tables(r);

    auto actions = open("actions_per_day.csv");
    actions << "day,daypart,none,encouraging,informing,affirming\n";
    auto engagement = open("engagement_per_day.csv");
    engagement << "day,users,active_users,ratings_0,ratings_1,ratings_2,ratings_3plus,messages_sent,messages_read,"
                  "fraction_read,fraction_users_read_all\n";
    auto row = [](const Json& c) {
        std::string s;
        for (Action a : kAllActions) s += "," + std::to_string(c.at(std::string(to_string(a))).get<int>());
        return s;
    };
    for (const auto& d : r.metrics.at("days")) {
        const int day = d.at("day").get<int>();
        actions << day << ",all" << row(d.at("actions")) << '\n';
        for (const auto& [part, c] : d.at("actions_by_daypart").items()) actions << day << ',' << part << row(c) << '\n';
        if (!d.at("closed").get<bool>()) continue;
        const auto& rp = d.at("ratings_per_user");
        engagement << day << ',' << d.at("users").get<int>() << ',' << d.at("active_users").get<int>() << ','
                   << fmt(rp.at("0").get<double>()) << ',' << fmt(rp.at("1").get<double>()) << ','
                   << fmt(rp.at("2").get<double>()) << ',' << fmt(rp.at("3+").get<double>()) << ','
                   << d.at("messages_sent").get<int>() << ',' << d.at("messages_read").get<int>() << ','
                   << fmt(d.at("fraction_read").get<double>()) << ','
                   << fmt(d.at("fraction_users_read_all").get<double>()) << '\n';
    }

    auto rewards = open("rewards_by_week.csv");
    rewards << "week,variant,daypart,n,mean,sd,min,max\n";
    auto greedy = open("greedy_by_week.csv");
    greedy << "week,none,encouraging,informing,affirming\n";
    for (const auto& w : r.metrics.at("weeks")) {
        const int week = w.at("week").get<int>();
        greedy << week << row(w.at("greedy")) << '\n';
        for (const auto* variant : {"reward", "reward_active"})
            for (const auto& [part, s] : w.at(variant).items())
                rewards << week << ',' << (std::string(variant) == "reward" ? "all" : "active") << ',' << part << ','
                        << s.at("n").get<int>() << ',' << fmt(s.at("mean").get<double>()) << ','
                        << fmt(s.at("sd").get<double>()) << ',' << fmt(s.at("min").get<double>()) << ','
                        << fmt(s.at("max").get<double>()) << '\n';
    }

    auto clusters = open("clusters.csv");
    clusters << "user,profile,cluster\n";
    for (const auto& [u, p] : r.profile_of) {
        clusters << u << ',' << p << ',';
        if (r.clusters)
            if (auto it = r.clusters->assignment.find(u); it != r.clusters->assignment.end()) clusters << it->second;
        clusters << '\n';
    }
}

Json sensitivity_sweep(const CohortSpec& cohort, ExperimentOptions opts, const std::vector<double>& fractions) {
    Json out = Json::array();
    for (double v : fractions) {
        opts.reward.zero_sent_fraction = v;
        opts.store = nullptr;
        const auto r = run_experiment(cohort, opts);
        Json weeks = Json::array();
        for (const auto& w : r.metrics.at("weeks"))
            weeks.push_back(Json{{"week", w.at("week")},
                                 {"greedy", w.at("greedy")},
                                 {"reward", w.at("reward").at("all")},
                                 {"reward_active", w.at("reward_active").at("all")}});
        out.push_back(Json{{"zero_sent_fraction", v}, {"weeks", std::move(weeks)}});
    }
    return out;
}

}  // namespace phrl
