#pragma once

// Domain types for the intervention MDP and the binned exact basis shared by
// the solver and the decision engine.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace phrl {

using UserId = std::string;

/// Seconds since 00:00 of study day 0.
using Seconds = std::int64_t;

inline constexpr Seconds kSecondsPerDay = 86400;

inline constexpr int day_of(Seconds ts) {
    return static_cast<int>(ts >= 0 ? ts / kSecondsPerDay : (ts - kSecondsPerDay + 1) / kSecondsPerDay);
}

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class DayPart : std::uint8_t { morning = 0, afternoon = 1, evening = 2 };

inline constexpr int kDayParts = 3;
inline constexpr std::array<DayPart, kDayParts> kAllDayParts{DayPart::morning, DayPart::afternoon,
                                                            DayPart::evening};

inline constexpr int code(DayPart p) { return static_cast<int>(p); }
DayPart day_part_from_code(int code);
std::string_view to_string(DayPart p);

enum class Action : std::uint8_t { none = 0, encouraging = 1, informing = 2, affirming = 3 };

inline constexpr int kActions = 4;
inline constexpr std::array<Action, kActions> kAllActions{Action::none, Action::encouraging,
                                                         Action::informing, Action::affirming};

inline constexpr int code(Action a) { return static_cast<int>(a); }
Action action_from_code(int code);
std::string_view to_string(Action a);

/// The twelve user features observed at a decision moment.
///
/// Counting features named "today" are scoped to the current study day and
/// reset at midnight. `number_rating` is the lifetime count of ratings.
struct StateVector {
    DayPart day_part = DayPart::morning;
    int number_rating = 0;
    int highest_rating = 0;  // 0 when no rating today
    int lowest_rating = 0;
    double median_rating = 0.0;
    double sd_rating = 0.0;
    int number_low_rating = 0;
    int number_medium_rating = 0;
    int number_high_rating = 0;
    int number_message_received = 0;
    int number_message_read = 0;
    int read_all_message = 0;

    int ratings_today() const { return number_low_rating + number_medium_rating + number_high_rating; }

    /// Throws ContractViolation when any structural invariant is broken.
    void validate() const;

    bool operator==(const StateVector&) const = default;
};

inline constexpr int kFeatureCount = 12;
inline constexpr int kBinsPerFeature = 4;
inline constexpr int kFeatureBlock = kFeatureCount * kBinsPerFeature;  // 48
inline constexpr int kBasisDimension = kActions * kFeatureBlock;        // 192

enum class Feature : std::uint8_t {
    day_part,
    number_rating,
    highest_rating,
    lowest_rating,
    median_rating,
    sd_rating,
    number_low_rating,
    number_medium_rating,
    number_high_rating,
    number_message_received,
    number_message_read,
    read_all_message,
};

std::string_view feature_name(Feature f);
std::array<double, kFeatureCount> feature_values(const StateVector& s);

struct Experience {
    UserId user_id;
    StateVector s;
    Action a = Action::none;
    double r = 0.0;
    StateVector s_prime;
    int day_index = 0;
    DayPart day_part = DayPart::morning;
};

/// One (state, reward) step of a user's trace; actions are not part of it.
struct TraceStep {
    StateVector state;
    double reward = 0.0;

    bool operator==(const TraceStep&) const = default;
};

struct Trace {
    UserId user_id;
    /// day index -> steps ordered by day part (at most three)
    std::map<int, std::vector<TraceStep>> days;

    void validate() const;

    bool operator==(const Trace&) const = default;
};

/// Append-only batch of experiences with a per-user index.
class Dataset {
public:
    void append(Experience e);
    void append(const Dataset& other);

    const std::vector<Experience>& experiences() const { return experiences_; }
    std::size_t size() const { return experiences_.size(); }
    bool empty() const { return experiences_.empty(); }

    /// Positions into experiences() for one user, in insertion order.
    std::span<const std::size_t> indices_of(const UserId& user) const;
    std::vector<UserId> users() const;

    /// Subset containing only the given users' experiences, original order kept.
    Dataset filter_users(std::span<const UserId> users) const;

    /// Per-user traces built from the experiences (states and rewards only).
    std::vector<Trace> traces() const;

private:
    std::vector<Experience> experiences_;
    std::map<UserId, std::vector<std::size_t>> by_user_;
};

enum class FeatureKind : std::uint8_t { categorical, continuous };

struct FeatureBinning {
    FeatureKind kind = FeatureKind::continuous;
    /// Ignored for categorical features.
    std::array<double, 3> cuts{1.0, 2.0, 3.0};

    bool operator==(const FeatureBinning&) const = default;
};

/// Four-bin discretization of every state feature.
struct BinningScheme {
    std::array<FeatureBinning, kFeatureCount> features;

    /// Fixed defaults on the 1..7 rating scale and per-day counters.
    static BinningScheme defaults();

    /// Throws ConfigError on non-increasing cuts.
    void validate() const;

    int bin(Feature f, double value) const;

    bool operator==(const BinningScheme&) const = default;
};

/// Number of cut points <= value; bins are [-inf,c1), [c1,c2), [c2,c3), [c3,inf).
int bin_index(double value, const std::array<double, 3>& cuts);

/// Slot offset of feature f within an action block.
inline constexpr int feature_offset(Feature f) { return static_cast<int>(f) * kBinsPerFeature; }
inline constexpr int action_offset(Action a) { return code(a) * kFeatureBlock; }

/// Indices of the twelve active basis entries for (s, a), ascending.
std::array<int, kFeatureCount> active_indices(const StateVector& s, Action a, const BinningScheme& scheme);

/// Dense block-structured basis vector of length 192.
std::vector<double> basis(const StateVector& s, Action a, const BinningScheme& scheme);

}  // namespace phrl
