#pragma once

// Study metrics: action counts per day and day part, rating and reading
// engagement per day, and weekly reward summaries per day part.
//
// Raw counts are collected either online (MetricsAccumulator, fed as the
// service runs) or in one pass over the logs (collect_metrics); both produce
// the same MetricsData, and metrics_report() turns it into a document.

#include "phrl/codec.hpp"
#include "phrl/engine.hpp"

#include <array>
#include <map>
#include <set>
#include <tuple>

namespace phrl {

struct UserDayStats {
    int ratings = 0;
    int sent = 0;
    /// Messages sent this day and read before midnight.
    int read = 0;
    /// Rated or read anything this day.
    bool active = false;

    bool operator==(const UserDayStats&) const = default;
};

using ActionCounts = std::array<int, kActions>;

struct MetricsData {
    /// Executed actions per day, by day part.
    std::map<int, std::array<ActionCounts, kDayParts>> actions;
    /// Greedy actions of the consulted policy per day.
    std::map<int, ActionCounts> greedy;
    /// (user, day, day part) -> reward, for rewards final at the horizon.
    std::map<std::tuple<UserId, int, int>, double> rewards;
    /// Closed days only; one entry per user registered by that day.
    std::map<int, std::map<UserId, UserDayStats>> days;

    bool operator==(const MetricsData&) const = default;
};

/// Everything the logs say at `horizon`: rewards whose boundary is <= horizon
/// and days that ended by then.
MetricsData collect_metrics(const DecisionEngine& engine, Seconds horizon);

class MetricsAccumulator {
public:
    void on_decision(const Decision& d);
    /// Finalizes pending rewards and closed days up to `t`; never revisits them.
    void close_until(const DecisionEngine& engine, Seconds t);

    const MetricsData& data() const { return data_; }
    Seconds horizon() const { return horizon_; }

private:
    MetricsData data_;
    std::set<std::tuple<UserId, int, int>> uncounted_;  // decided after the horizon
    std::set<std::tuple<UserId, int, int>> pending_;    // reward not final yet
    int next_open_day_ = 0;
    Seconds horizon_ = 0;
};

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    /// Sample standard deviation; 0 for fewer than two values.
    double sd = 0.0;
    double min = 0.0;
    double max = 0.0;
};

Summary summarize(const std::vector<double>& values);

inline int week_of(int day) { return day / 7 + 1; }

/// Users active on at most this many days of the range count as dormant.
inline constexpr int kDormantMaxActiveDays = 2;

/// Report over days [from_day, to_day]. Weekly reward summaries come in two
/// flavours: all users, and active users only, which leaves out dormant users
/// and users without any activity during that week.
Json metrics_report(const MetricsData& data, int from_day, int to_day);

}  // namespace phrl
