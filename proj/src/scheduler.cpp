#include "phrl/scheduler.hpp"

#include <algorithm>

namespace phrl {

void VirtualClock::set(Seconds t) {
    if (t < now_.load()) throw ContractViolation("virtual clock cannot move backwards");
    now_.store(t);
}

Seconds WallClock::now() const {
    using namespace std::chrono;
    return duration_cast<seconds>(system_clock::now().time_since_epoch()).count() - start_;
}

std::string_view to_string(JobKind k) {
    switch (k) {
        case JobKind::decide: return "decide";
        case JobKind::train: return "train";
        case JobKind::cluster: return "cluster";
    }
    return "?";
}

namespace {

std::vector<Job> jobs_of_day(const EngineConfig& cfg, int day) {
    std::vector<Job> out;
    if (day == cfg.clustering_day)
        out.push_back({JobKind::cluster, day, DayPart::morning, static_cast<Seconds>(day) * kSecondsPerDay,
                       "cluster:" + std::to_string(day)});
    for (DayPart p : kAllDayParts)
        out.push_back({JobKind::decide, day, p, cfg.schedule.decision_ts(day, p),
                       "decide:" + std::to_string(day) + ":" + std::to_string(code(p))});
    out.push_back({JobKind::train, day, DayPart::morning, static_cast<Seconds>(day) * kSecondsPerDay + cfg.training_time,
                   "train:" + std::to_string(day)});
    return out;
}

}  // namespace

std::vector<Job> jobs_due(const EngineConfig& cfg, Seconds now) {
    std::vector<Job> out;
    if (now < 0) return out;
    for (int day = 0; day <= day_of(now); ++day)
        for (auto& j : jobs_of_day(cfg, day))
            if (j.due <= now) out.push_back(std::move(j));
    return out;
}

Seconds next_due_after(const EngineConfig& cfg, Seconds t) {
    for (int day = std::max(0, day_of(t));; ++day)
        for (const auto& j : jobs_of_day(cfg, day))
            if (j.due > t) return j.due;
}

}  // namespace phrl
