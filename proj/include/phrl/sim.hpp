#pragma once

// Synthetic participants and complete study runs on a virtual clock.
//
// Behaviour model: each decision moment draws independently whether the user
// reads the delivered message and whether they rate their mood before the
// next moment. Reading a message of category c raises both propensities in
// the next day part by coupling[c]; reading anything also lifts the chance of
// a rating in the same day part by read_rating_lift. From the dropout day on a
// user is silent.
//
// Cohort spec file:
//   {"profiles": {"<name>": {"read_prob": [p0, p1, p2, p3],
//                            "rating_prob": [morning, afternoon, evening],
//                            "mood_mean": 5.5, "mood_sd": 1.0,
//                            "dropout_day": 7,            (optional)
//                            "coupling": [c0, c1, c2, c3],
//                            "read_rating_lift": 0.3}},     (optional)
//    "users": [{"profile": "<name>", "count": 10, "prefix": "enc"}]}
// read_prob is indexed by action; p0 is the chance of opening an unread
// message from earlier in the day when nothing new arrives.

#include "phrl/service.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace phrl {

struct UserProfile {
    std::array<double, kActions> read_prob{};
    std::array<double, kDayParts> rating_prob{};
    double mood_mean = 4.0;
    double mood_sd = 1.0;
    std::optional<int> dropout_day;
    std::array<double, kActions> coupling{};
    /// Added to the rating propensity of a day part in which a message is read.
    double read_rating_lift = 0.0;

    /// Throws ConfigError when a probability leaves [0, 1] or mood_sd < 0.
    void validate() const;

    bool operator==(const UserProfile&) const = default;
};

Json to_json(const UserProfile& p);
UserProfile profile_from_json(const Json& j);

struct CohortGroup {
    std::string profile;
    int count = 0;
    std::string prefix;

    bool operator==(const CohortGroup&) const = default;
};

struct CohortSpec {
    std::map<std::string, UserProfile> profiles;
    std::vector<CohortGroup> groups;

    void validate() const;
    /// (user id, profile name) in registration order; ids are prefix + index.
    std::vector<std::pair<UserId, std::string>> users() const;

    bool operator==(const CohortSpec&) const = default;
};

Json to_json(const CohortSpec& c);
CohortSpec cohort_from_json(const Json& j);
CohortSpec load_cohort(const std::filesystem::path& path);

/// 27 users: 11 encouraging, 6 informing and 4 affirming responders (8 of
/// them drop out after week 1) plus 6 near-dormant users.
CohortSpec default_cohort();
/// Users whose behaviour ignores which message (if any) they get.
CohortSpec indifferent_cohort(int users);
/// Everyone prefers `favourite`.
CohortSpec responder_cohort(Action favourite, int users);

/// What the behaviour model may know besides the decision itself.
struct StepContext {
    /// Previous decision moment: the category delivered and whether it was read.
    std::optional<Action> prior_read_category;
    /// Messages delivered earlier today and still unread, oldest first.
    std::vector<std::string> unread_today;
    /// Events fall strictly between the decision time and this boundary.
    Seconds window_end = 0;
};

std::vector<Event> simulate_user_step(const UserProfile& profile, const Decision& decision, const StepContext& ctx,
                                      Rng& rng);

struct ExperimentOptions {
    int days = 21;
    PersonalizationMode mode = PersonalizationMode::grouped;
    int k = 2;
    std::uint64_t seed = 7;
    RewardConfig reward;
    /// Defaults to an in-memory store.
    std::shared_ptr<BlobStore> store;
    /// Moments at which the service is dropped and rebuilt from the store,
    /// as after a crash.
    std::vector<Seconds> restarts;
};

struct ExperimentReport {
    Json metrics;
    std::map<UserId, std::string> profile_of;
    std::optional<ClusterModel> clusters;
    std::size_t decisions = 0;
    std::size_t events = 0;
    /// (user, day) pairs that received one message id twice.
    std::size_t repeated_messages = 0;
    std::size_t job_failures = 0;
    std::size_t restarts = 0;
};

ExperimentReport run_experiment(const CohortSpec& cohort, const ExperimentOptions& opts);

/// Whole report as one document (metrics, profiles, clusters, counters).
Json to_json(const ExperimentReport& r);
/// Plain-text tables: weekly action shares and rewards per day part.
std::string report_tables(const ExperimentReport& r);
/// report.json, tables.txt and per-day / per-week CSV files under `dir`.
void write_report_files(const ExperimentReport& r, const std::filesystem::path& dir);

/// Reruns the experiment for each read fraction assumed on days without
/// messages; returns {"zero_sent_fraction": v, "weeks": [...]} per value.
Json sensitivity_sweep(const CohortSpec& cohort, ExperimentOptions opts, const std::vector<double>& fractions);

}  // namespace phrl
