#pragma once

// Clocks and the calendar of recurring jobs: one decision job per day part,
// one nightly training job and a single clustering job.

#include "phrl/engine.hpp"

#include <atomic>
#include <chrono>
#include <string>
#include <vector>

namespace phrl {

class Clock {
public:
    virtual ~Clock() = default;
    /// Seconds since 00:00 of study day 0.
    virtual Seconds now() const = 0;
};

/// Manually advanced; never moves backwards.
class VirtualClock : public Clock {
public:
    explicit VirtualClock(Seconds start = 0) : now_(start) {}
    Seconds now() const override { return now_.load(); }
    void set(Seconds t);
    void advance(Seconds dt) { set(now_.load() + dt); }

private:
    std::atomic<Seconds> now_;
};

/// Wall time in UTC relative to a study start given in Unix seconds.
class WallClock : public Clock {
public:
    explicit WallClock(std::int64_t study_start_unix) : start_(study_start_unix) {}
    Seconds now() const override;

private:
    std::int64_t start_;
};

enum class JobKind : std::uint8_t { decide, train, cluster };

std::string_view to_string(JobKind k);

struct Job {
    JobKind kind = JobKind::decide;
    int day = 0;
    DayPart part = DayPart::morning;  // decide only
    Seconds due = 0;
    /// "decide:<day>:<part>", "train:<day>" or "cluster:<day>".
    std::string key;

    bool operator==(const Job&) const = default;
};

/// Every job due at or before `now`, in firing order. Ties at one instant put
/// clustering before decisions (it is due at midnight, decisions never are).
std::vector<Job> jobs_due(const EngineConfig& cfg, Seconds now);

/// Due time of the next job strictly after `t`.
Seconds next_due_after(const EngineConfig& cfg, Seconds t);

}  // namespace phrl
