#pragma once

// Raw interaction events -> decision-time states, rewards and experiences.

#include "phrl/mdp.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace phrl {

/// Declaration order is the secondary sort key for same-timestamp events.
enum class EventKind : std::uint8_t { rating = 0, message_sent = 1, message_read = 2 };

std::string_view to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(std::string_view s);

struct Event {
    UserId user_id;
    Seconds ts = 0;
    EventKind kind = EventKind::rating;
    int rating = 0;          // kind == rating
    std::string message_id;  // message kinds

    bool operator==(const Event&) const = default;
};

/// Time order, then kind, then payload.
bool event_order(const Event& a, const Event& b);

using EventId = std::uint64_t;

struct IngestResult {
    bool accepted = false;
    bool duplicate = false;
    EventId id = 0;
    std::string code;  // machine-readable rejection code
    std::string reason;
};

/// Decision moments inside a day, in seconds after midnight.
struct DayPartSchedule {
    std::array<Seconds, kDayParts> decision_time{10 * 3600, 14 * 3600, 21 * 3600};

    void validate() const;

    Seconds decision_ts(int day, DayPart p) const {
        return static_cast<Seconds>(day) * kSecondsPerDay + decision_time[static_cast<std::size_t>(code(p))];
    }
    /// Rewards for a day part are read at the next decision moment of the same
    /// day; the evening's at midnight.
    Seconds reward_boundary_ts(int day, DayPart p) const;

    bool operator==(const DayPartSchedule&) const = default;
};

struct RewardConfig {
    double w_read = 0.5;
    double w_ratings = 0.5;
    /// Read fraction used when nothing was sent today; 0 is the default,
    /// other values exist for sensitivity sweeps.
    double zero_sent_fraction = 0.0;

    void validate() const;

    bool operator==(const RewardConfig&) const = default;
};

/// One delivered message and when (if ever) it was first read.
struct Delivery {
    std::string message_id;
    Seconds sent_ts = 0;
    std::optional<Seconds> read_ts;
};

/// Counters over [midnight, cutoff) of one day.
struct DayActivity {
    int ratings_today = 0;
    int messages_sent = 0;
    int messages_read = 0;
    std::optional<int> latest_rating;
};

/// What assemble_experiences needs from the decision log.
struct DecisionRecord {
    Action action = Action::none;
    StateVector state;
};

using DecisionLookup = std::function<std::optional<DecisionRecord>(const UserId&, int day, DayPart)>;

struct DataQualityReport {
    std::size_t emitted = 0;
    std::size_t missing_decisions = 0;  // decision moment passed without a logged decision
    std::size_t pending = 0;            // next state not observable before the cutoff

    DataQualityReport& operator+=(const DataQualityReport& o) {
        emitted += o.emitted;
        missing_decisions += o.missing_decisions;
        pending += o.pending;
        return *this;
    }
};

struct AssembledExperiences {
    Dataset data;
    DataQualityReport quality;
};

/// Per-user, time-ordered, append-only event log with idempotent ingestion.
///
/// Not thread-safe; callers serialize mutation.
class EventStore {
public:
    explicit EventStore(DayPartSchedule schedule = {});

    /// Validates and appends; an exact duplicate returns the original id.
    IngestResult ingest(const Event& e);

    const DayPartSchedule& schedule() const { return schedule_; }

    /// All accepted events in ingestion order; position = event id.
    const std::vector<Event>& log() const { return log_; }
    const std::vector<Event>& events_of(const UserId& user) const;
    std::vector<UserId> users() const;
    bool knows(const UserId& user) const { return by_user_.count(user) > 0; }

    /// Features from events strictly before `cutoff` on `day`.
    StateVector state_at(const UserId& user, int day, Seconds cutoff, DayPart part) const;
    StateVector build_state(const UserId& user, int day, DayPart part) const;

    DayActivity activity(const UserId& user, int day, Seconds cutoff) const;
    double compute_reward(const UserId& user, int day, DayPart part, const RewardConfig& cfg) const;

    std::vector<Delivery> deliveries(const UserId& user, Seconds since = 0) const;
    /// Messages sent to the user during `day` (any time), ids only.
    std::set<std::string> sent_on_day(const UserId& user, int day) const;

    /// Days on which the user rated or read at least once.
    std::set<int> active_days(const UserId& user) const;

    /// Experiences for decisions taken on days [first_day, last_day] whose
    /// successor state is observable at `cutoff`.
    AssembledExperiences assemble_experiences(const UserId& user, int first_day, int last_day, Seconds cutoff,
                                              const DecisionLookup& decisions,
                                              const RewardConfig& reward = {}) const;

private:
    using Key = std::tuple<UserId, Seconds, EventKind, int, std::string>;

    DayPartSchedule schedule_;
    std::vector<Event> log_;
    std::map<UserId, std::vector<Event>> by_user_;
    std::map<Key, EventId> seen_;
};

double reward_from_counts(int sent, int read, int ratings, const RewardConfig& cfg);

}  // namespace phrl
