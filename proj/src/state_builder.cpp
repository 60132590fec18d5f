#include "phrl/state_builder.hpp"

#include <algorithm>
#include <cmath>

namespace phrl {

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::rating: return "rating";
        case EventKind::message_sent: return "message_sent";
        case EventKind::message_read: return "message_read";
    }
    return "?";
}

std::optional<EventKind> event_kind_from_string(std::string_view s) {
    if (s == "rating") return EventKind::rating;
    if (s == "message_sent") return EventKind::message_sent;
    if (s == "message_read") return EventKind::message_read;
    return std::nullopt;
}

bool event_order(const Event& a, const Event& b) {
    return std::tie(a.ts, a.kind, a.rating, a.message_id) < std::tie(b.ts, b.kind, b.rating, b.message_id);
}

void DayPartSchedule::validate() const {
    Seconds prev = -1;
    for (Seconds t : decision_time) {
        if (t <= prev || t >= kSecondsPerDay) throw ConfigError("decision times must be increasing within one day");
        prev = t;
    }
}

Seconds DayPartSchedule::reward_boundary_ts(int day, DayPart p) const {
    if (p == DayPart::evening) return static_cast<Seconds>(day + 1) * kSecondsPerDay;
    return decision_ts(day, day_part_from_code(code(p) + 1));
}

void RewardConfig::validate() const {
    auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!ok(w_read) || !ok(w_ratings)) throw ConfigError("reward weights must be finite and nonnegative");
    if (!ok(zero_sent_fraction) || zero_sent_fraction > 1.0)
        throw ConfigError("zero_sent_fraction must lie in [0, 1]");
}

double reward_from_counts(int sent, int read, int ratings, const RewardConfig& cfg) {
    const double fraction = sent > 0 ? static_cast<double>(read) / static_cast<double>(sent) : cfg.zero_sent_fraction;
    return cfg.w_read * fraction + cfg.w_ratings * static_cast<double>(ratings);
}

EventStore::EventStore(DayPartSchedule schedule) : schedule_(schedule) { schedule_.validate(); }

namespace {

IngestResult reject(std::string code, std::string reason) {
    IngestResult r;
    r.code = std::move(code);
    r.reason = std::move(reason);
    return r;
}

}  // namespace

IngestResult EventStore::ingest(const Event& raw) {
    Event e = raw;
    if (e.kind == EventKind::rating)
        e.message_id.clear();
    else
        e.rating = 0;

    if (e.user_id.empty()) return reject("BAD_EVENT", "user_id must be nonempty");
    if (e.ts < 0) return reject("OUT_OF_RANGE", "timestamp precedes the start of the study");
    if (e.kind == EventKind::rating && (e.rating < 1 || e.rating > 7))
        return reject("OUT_OF_RANGE", "rating " + std::to_string(e.rating) + " is outside 1..7");
    if (e.kind != EventKind::rating && e.message_id.empty())
        return reject("BAD_EVENT", "message events need a message_id");

    const Key key{e.user_id, e.ts, e.kind, e.rating, e.message_id};
    if (auto it = seen_.find(key); it != seen_.end()) {
        IngestResult r;
        r.accepted = true;
        r.duplicate = true;
        r.id = it->second;
        return r;
    }

    if (e.kind == EventKind::message_read) {
        bool sent_before = false;
        if (auto it = by_user_.find(e.user_id); it != by_user_.end())
            for (const auto& prior : it->second)
                if (prior.kind == EventKind::message_sent && prior.message_id == e.message_id && prior.ts <= e.ts) {
                    sent_before = true;
                    break;
                }
        if (!sent_before)
            return reject("UNKNOWN_MESSAGE", "message " + e.message_id + " was never sent to " + e.user_id);
    }

    const EventId id = log_.size();
    log_.push_back(e);
    seen_.emplace(key, id);
    auto& events = by_user_[e.user_id];
    events.insert(std::upper_bound(events.begin(), events.end(), e, event_order), e);

    IngestResult r;
    r.accepted = true;
    r.id = id;
    return r;
}

const std::vector<Event>& EventStore::events_of(const UserId& user) const {
    static const std::vector<Event> none;
    auto it = by_user_.find(user);
    return it == by_user_.end() ? none : it->second;
}

std::vector<UserId> EventStore::users() const {
    std::vector<UserId> out;
    out.reserve(by_user_.size());
    for (const auto& [u, _] : by_user_) out.push_back(u);
    return out;
}

std::vector<Delivery> EventStore::deliveries(const UserId& user, Seconds since) const {
    std::vector<Delivery> all;
    std::map<std::string, std::size_t> latest;
    for (const auto& e : events_of(user)) {
        if (e.kind == EventKind::message_sent) {
            latest[e.message_id] = all.size();
            all.push_back({e.message_id, e.ts, std::nullopt});
        } else if (e.kind == EventKind::message_read) {
            auto it = latest.find(e.message_id);
            if (it != latest.end() && !all[it->second].read_ts) all[it->second].read_ts = e.ts;
        }
    }
    std::erase_if(all, [&](const Delivery& d) { return d.sent_ts < since; });
    return all;
}

std::set<std::string> EventStore::sent_on_day(const UserId& user, int day) const {
    std::set<std::string> out;
    for (const auto& e : events_of(user))
        if (e.kind == EventKind::message_sent && day_of(e.ts) == day) out.insert(e.message_id);
    return out;
}

std::set<int> EventStore::active_days(const UserId& user) const {
    std::set<int> out;
    for (const auto& e : events_of(user))
        if (e.kind != EventKind::message_sent) out.insert(day_of(e.ts));
    return out;
}

DayActivity EventStore::activity(const UserId& user, int day, Seconds cutoff) const {
    const Seconds start = static_cast<Seconds>(day) * kSecondsPerDay;
    DayActivity a;
    for (const auto& e : events_of(user)) {
        if (e.ts >= cutoff) break;
        if (e.kind == EventKind::rating && e.ts >= start) {
            ++a.ratings_today;
            a.latest_rating = e.rating;
        }
    }
    for (const auto& d : deliveries(user, start)) {
        if (d.sent_ts >= cutoff) continue;
        ++a.messages_sent;
        if (d.read_ts && *d.read_ts < cutoff) ++a.messages_read;
    }
    return a;
}

StateVector EventStore::state_at(const UserId& user, int day, Seconds cutoff, DayPart part) const {
    const Seconds start = static_cast<Seconds>(day) * kSecondsPerDay;
    StateVector s;
    s.day_part = part;

    std::vector<int> today;
    for (const auto& e : events_of(user)) {
        if (e.ts >= cutoff) break;
        if (e.kind != EventKind::rating) continue;
        ++s.number_rating;
        if (e.ts >= start) today.push_back(e.rating);
    }

    if (!today.empty()) {
        std::sort(today.begin(), today.end());
        const std::size_t n = today.size();
        s.lowest_rating = today.front();
        s.highest_rating = today.back();
        s.median_rating = n % 2 == 1 ? today[n / 2] : 0.5 * (today[n / 2 - 1] + today[n / 2]);
        double mean = 0.0;
        for (int r : today) mean += r;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (int r : today) ss += (r - mean) * (r - mean);
        s.sd_rating = std::sqrt(ss / static_cast<double>(n));  // population sd
        for (int r : today) {
            if (r <= 2)
                ++s.number_low_rating;
            else if (r <= 5)
                ++s.number_medium_rating;
            else
                ++s.number_high_rating;
        }
    }

    const auto a = activity(user, day, cutoff);
    s.number_message_received = a.messages_sent;
    s.number_message_read = a.messages_read;
    s.read_all_message = (a.messages_sent > 0 && a.messages_read == a.messages_sent) ? 1 : 0;
    return s;
}

StateVector EventStore::build_state(const UserId& user, int day, DayPart part) const {
    return state_at(user, day, schedule_.decision_ts(day, part), part);
}

double EventStore::compute_reward(const UserId& user, int day, DayPart part, const RewardConfig& cfg) const {
    const auto a = activity(user, day, schedule_.reward_boundary_ts(day, part));
    return reward_from_counts(a.messages_sent, a.messages_read, a.ratings_today, cfg);
}

AssembledExperiences EventStore::assemble_experiences(const UserId& user, int first_day, int last_day, Seconds cutoff,
                                                      const DecisionLookup& decisions,
                                                      const RewardConfig& reward) const {
    AssembledExperiences out;
    for (int day = first_day; day <= last_day; ++day) {
        for (DayPart p : kAllDayParts) {
            if (schedule_.decision_ts(day, p) >= cutoff) return out;
            const auto rec = decisions(user, day, p);
            if (!rec) {
                ++out.quality.missing_decisions;
                continue;
            }
            const int next_day = p == DayPart::evening ? day + 1 : day;
            const DayPart next_part = p == DayPart::evening ? DayPart::morning : day_part_from_code(code(p) + 1);
            if (schedule_.decision_ts(next_day, next_part) > cutoff) {
                ++out.quality.pending;
                continue;
            }
            Experience e;
            e.user_id = user;
            e.s = rec->state;
            e.a = rec->action;
            e.r = compute_reward(user, day, p, reward);
            const auto next = decisions(user, next_day, next_part);
            e.s_prime = next ? next->state : build_state(user, next_day, next_part);
            e.day_index = day;
            e.day_part = p;
            out.data.append(std::move(e));
            ++out.quality.emitted;
        }
    }
    return out;
}

}  // namespace phrl
