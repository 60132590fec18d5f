#include "phrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace phrl {

namespace {

UserDayStats day_stats(const DecisionEngine& engine, const UserId& user, int day) {
    const auto& store = engine.events();
    const auto act = store.activity(user, day, static_cast<Seconds>(day + 1) * kSecondsPerDay);
    UserDayStats s;
    s.ratings = act.ratings_today;
    s.sent = act.messages_sent;
    s.read = act.messages_read;
    s.active = store.active_days(user).count(day) > 0;
    return s;
}

void count_decision(MetricsData& m, const Decision& d) {
    auto& by_part = m.actions[d.day];
    ++by_part[static_cast<std::size_t>(code(d.day_part))][static_cast<std::size_t>(code(d.action))];
    if (d.greedy_action) ++m.greedy[d.day][static_cast<std::size_t>(code(*d.greedy_action))];
}

void close_day(MetricsData& m, const DecisionEngine& engine, int day) {
    auto& users = m.days[day];
    for (const auto& u : engine.users())
        if (engine.join_day(u) <= day) users[u] = day_stats(engine, u, day);
}

Json action_json(const ActionCounts& c) {
    Json j = Json::object();
    for (Action a : kAllActions) j[std::string(to_string(a))] = c[static_cast<std::size_t>(code(a))];
    return j;
}

void add(ActionCounts& into, const ActionCounts& c) {
    for (std::size_t i = 0; i < into.size(); ++i) into[i] += c[i];
}

Json summary_json(const Summary& s) {
    return Json{{"n", s.n}, {"mean", s.mean}, {"sd", s.sd}, {"min", s.min}, {"max", s.max}};
}

double fraction(double num, double den) { return den > 0 ? num / den : 0.0; }

}  // namespace

MetricsData collect_metrics(const DecisionEngine& engine, Seconds horizon) {
    MetricsData m;
    const auto& sched = engine.config().schedule;
    for (const auto& u : engine.users())
        for (const auto& d : engine.decisions_of(u)) {
            if (d.decided_at > horizon) continue;
            count_decision(m, d);
            if (sched.reward_boundary_ts(d.day, d.day_part) <= horizon)
                m.rewards[{u, d.day, code(d.day_part)}] =
                    engine.events().compute_reward(u, d.day, d.day_part, engine.config().reward);
        }
    for (int day = 0; static_cast<Seconds>(day + 1) * kSecondsPerDay <= horizon; ++day) close_day(m, engine, day);
    return m;
}

void MetricsAccumulator::on_decision(const Decision& d) {
    uncounted_.insert({d.user_id, d.day, code(d.day_part)});
    pending_.insert({d.user_id, d.day, code(d.day_part)});
}

void MetricsAccumulator::close_until(const DecisionEngine& engine, Seconds t) {
    if (t < horizon_) return;
    const auto& sched = engine.config().schedule;
    auto logged = [&](const std::tuple<UserId, int, int>& key) {
        auto d = engine.logged_decision(std::get<0>(key), std::get<1>(key), day_part_from_code(std::get<2>(key)));
        if (!d) throw ContractViolation("metrics: decision vanished for " + std::get<0>(key));
        return *d;
    };
    for (auto it = uncounted_.begin(); it != uncounted_.end();) {
        const auto d = logged(*it);
        if (d.decided_at > t) {
            ++it;
            continue;
        }
        count_decision(data_, d);
        it = uncounted_.erase(it);
    }
    for (auto it = pending_.begin(); it != pending_.end();) {
        const auto& [user, day, part] = *it;
        const DayPart p = day_part_from_code(part);
        if (sched.reward_boundary_ts(day, p) > t) {
            ++it;
            continue;
        }
        data_.rewards[*it] = engine.events().compute_reward(user, day, p, engine.config().reward);
        it = pending_.erase(it);
    }
    for (; static_cast<Seconds>(next_open_day_ + 1) * kSecondsPerDay <= t; ++next_open_day_)
        close_day(data_, engine, next_open_day_);
    horizon_ = t;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    s.n = values.size();
    if (values.empty()) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    if (s.n > 1) {
        double ss = 0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

Json metrics_report(const MetricsData& data, int from_day, int to_day) {
    if (from_day < 0 || to_day < from_day) throw ContractViolation("metrics: bad day range");
    auto in_range = [&](int d) { return d >= from_day && d <= to_day; };

    std::map<UserId, int> active_days;
    for (const auto& [day, users] : data.days)
        if (in_range(day))
            for (const auto& [u, s] : users) active_days[u] += s.active ? 1 : 0;
    std::set<UserId> dormant;
    for (const auto& [u, n] : active_days)
        if (n <= kDormantMaxActiveDays) dormant.insert(u);

    Json days = Json::array();
    for (int day = from_day; day <= to_day; ++day) {
        const auto a = data.actions.find(day);
        const auto c = data.days.find(day);
        if (a == data.actions.end() && c == data.days.end()) continue;
        Json j{{"day", day}, {"week", week_of(day)}};
        ActionCounts total{};
        Json by_part = Json::object();
        if (a != data.actions.end())
            for (DayPart p : kAllDayParts) {
                const auto& counts = a->second[static_cast<std::size_t>(code(p))];
                add(total, counts);
                by_part[std::string(to_string(p))] = action_json(counts);
            }
        j["actions"] = action_json(total);
        j["actions_by_daypart"] = std::move(by_part);
        const auto g = data.greedy.find(day);
        j["greedy"] = action_json(g == data.greedy.end() ? ActionCounts{} : g->second);
        j["closed"] = c != data.days.end();
        if (c != data.days.end()) {
            std::array<int, 4> ratings_hist{};
            int sent = 0, read = 0, receivers = 0, read_all = 0, active = 0;
            for (const auto& [u, s] : c->second) {
                ++ratings_hist[static_cast<std::size_t>(std::min(s.ratings, 3))];
                sent += s.sent;
                read += s.read;
                active += s.active;
                if (s.sent > 0) {
                    ++receivers;
                    read_all += s.read == s.sent;
                }
            }
            const double n = static_cast<double>(c->second.size());
            j["users"] = c->second.size();
            j["active_users"] = active;
            j["ratings_per_user"] = Json{{"0", fraction(ratings_hist[0], n)},
                                         {"1", fraction(ratings_hist[1], n)},
                                         {"2", fraction(ratings_hist[2], n)},
                                         {"3+", fraction(ratings_hist[3], n)}};
            j["messages_sent"] = sent;
            j["messages_read"] = read;
            j["fraction_read"] = fraction(read, sent);
            j["fraction_users_read_all"] = fraction(read_all, receivers);
        }
        days.push_back(std::move(j));
    }

    Json weeks = Json::array();
    for (int w = week_of(from_day); w <= week_of(to_day); ++w) {
        const int lo = std::max(from_day, (w - 1) * 7), hi = std::min(to_day, w * 7 - 1);
        std::set<UserId> quiet;  // no activity in any closed day of the week
        std::map<UserId, bool> seen_active;
        for (const auto& [day, users] : data.days)
            if (day >= lo && day <= hi)
                for (const auto& [u, s] : users) seen_active[u] = seen_active[u] || s.active;
        for (const auto& [u, act] : seen_active)
            if (!act) quiet.insert(u);

        ActionCounts actions{}, greedy{};
        for (int d = lo; d <= hi; ++d) {
            if (auto a = data.actions.find(d); a != data.actions.end())
                for (const auto& c : a->second) add(actions, c);
            if (auto g = data.greedy.find(d); g != data.greedy.end()) add(greedy, g->second);
        }

        // per-user mean reward by day part (index 3 = all day parts)
        std::map<UserId, std::array<std::pair<double, int>, kDayParts + 1>> sums;
        for (const auto& [key, r] : data.rewards) {
            const auto& [u, day, part] = key;
            if (day < lo || day > hi) continue;
            auto& s = sums[u];
            s[static_cast<std::size_t>(part)].first += r;
            ++s[static_cast<std::size_t>(part)].second;
            s[kDayParts].first += r;
            ++s[kDayParts].second;
        }
        auto reward_block = [&](bool active_only) {
            Json block = Json::object();
            for (int p = 0; p <= kDayParts; ++p) {
                std::vector<double> means;
                for (const auto& [u, s] : sums) {
                    if (active_only && (dormant.count(u) || quiet.count(u))) continue;
                    const auto& [sum, n] = s[static_cast<std::size_t>(p)];
                    if (n > 0) means.push_back(sum / n);
                }
                const std::string name = p < kDayParts ? std::string(to_string(day_part_from_code(p))) : "all";
                block[name] = summary_json(summarize(means));
            }
            return block;
        };

        Json inactive = Json::array();
        for (const auto& u : quiet) inactive.push_back(u);
        weeks.push_back(Json{{"week", w},
                             {"first_day", lo},
                             {"last_day", hi},
                             {"actions", action_json(actions)},
                             {"greedy", action_json(greedy)},
                             {"reward", reward_block(false)},
                             {"reward_active", reward_block(true)},
                             {"inactive_users", std::move(inactive)}});
    }

    Json dormant_list = Json::array();
    for (const auto& u : dormant) dormant_list.push_back(u);
    return Json{{"from_day", from_day},
                {"to_day", to_day},
                {"users", active_days.size()},
                {"dormant_users", std::move(dormant_list)},
                {"days", std::move(days)},
                {"weeks", std::move(weeks)}};
}

}  // namespace phrl
