#pragma once

// The personalization loop: exploration, per-mode policy training, decision
// serving with message resolution, and the policy registry.

#include "phrl/catalog.hpp"
#include "phrl/clustering.hpp"
#include "phrl/lspi.hpp"
#include "phrl/state_builder.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <tuple>
#include <string>
#include <vector>

namespace phrl {

enum class PersonalizationMode : std::uint8_t { pooled, grouped, separate };

std::string_view to_string(PersonalizationMode m);
std::optional<PersonalizationMode> mode_from_string(std::string_view s);

inline const std::string kPooledKey = "pooled";
std::string cluster_key(int cluster);
std::string user_key(const UserId& user);

struct EngineConfig {
    PersonalizationMode mode = PersonalizationMode::pooled;
    /// Study days [0, exploration_days) use random actions.
    int exploration_days = 7;
    std::vector<Action> exploration_actions{kAllActions.begin(), kAllActions.end()};
    /// Clustering runs at 00:00 of this study day.
    int clustering_day = 7;
    int k = 2;
    std::uint64_t seed = 0;
    /// Seconds after midnight of the nightly training run.
    Seconds training_time = 23 * 3600 + 59 * 60;
    bool warm_start = true;
    /// Separate mode: users with fewer experiences use the pooled policy.
    std::size_t min_user_experiences = 9;

    SolverConfig solver;
    BinningScheme scheme = BinningScheme::defaults();
    RewardConfig reward;
    MoodConfig mood;
    NormalizationRanges ranges = NormalizationRanges::defaults();
    DayPartSchedule schedule;

    void validate() const;
};

struct Decision {
    UserId user_id;
    int day = 0;
    DayPart day_part = DayPart::morning;
    Seconds decided_at = 0;
    StateVector state;
    Action action = Action::none;
    /// Greedy action of the consulted policy; absent when none is published.
    /// During exploration the policy is consulted but not followed.
    std::optional<Action> greedy_action;
    std::optional<MessageEntry> message;
    std::string policy_key;  // empty when no policy was consulted
    std::uint64_t policy_version = 0;
    bool explored = false;
    /// A message action found nothing eligible and degraded to sending nothing.
    bool catalog_exhausted = false;
    /// Exploration phase was over but no policy was published.
    bool fallback_random = false;

    bool operator==(const Decision&) const = default;
};

using PolicyMap = std::map<std::string, std::shared_ptr<const Policy>>;

/// Immutable policy snapshots behind an atomically swapped pointer.
class PolicyRegistry {
public:
    PolicyRegistry() = default;
    PolicyRegistry(PolicyRegistry&& other) noexcept : current_(other.snapshot()) {}
    PolicyRegistry& operator=(PolicyRegistry&& other) noexcept {
        auto snap = other.snapshot();
        std::lock_guard lock(mu_);
        current_ = std::move(snap);
        return *this;
    }

    std::shared_ptr<const PolicyMap> snapshot() const;
    std::shared_ptr<const Policy> get(const std::string& key) const;
    /// Replaces (or adds) the given policies in one publication.
    void publish(const std::map<std::string, Policy>& updates);

private:
    mutable std::mutex mu_;
    std::shared_ptr<const PolicyMap> current_ = std::make_shared<const PolicyMap>();
};

struct TrainingReport {
    int as_of_day = 0;
    std::map<std::string, Policy> trained;
    /// Partitions without experiences; their previous policy is kept.
    std::vector<std::string> skipped;
    std::map<std::string, std::string> failures;
    DataQualityReport quality;
    std::size_t experiences = 0;
};

/// Experiences grouped into training partitions, detached from the engine.
struct TrainingJob {
    int as_of_day = 0;
    std::map<std::string, Dataset> partitions;
    std::vector<std::string> empty_partitions;
    DataQualityReport quality;
    std::size_t experiences = 0;
};

/// Not internally synchronized except for the policy registry: callers
/// serialize decide / ingest / training bookkeeping and may run
/// run_training() off-lock.
class DecisionEngine {
public:
    DecisionEngine(EngineConfig cfg, MessageCatalog catalog);

    const EngineConfig& config() const { return cfg_; }
    const MessageCatalog& catalog() const { return catalog_; }
    EventStore& events() { return events_; }
    const EventStore& events() const { return events_; }
    PolicyRegistry& policies() { return policies_; }
    const PolicyRegistry& policies() const { return policies_; }

    /// Returns false if the user already exists. Experiences are assembled
    /// from the join day on.
    bool register_user(const UserId& user, int join_day = 0);
    bool is_registered(const UserId& user) const { return users_.count(user) > 0; }
    const std::set<UserId>& users() const { return users_; }
    int join_day(const UserId& user) const;

    /// Idempotent per (user, day, day part): a repeated call returns the
    /// logged decision. A sent message is ingested as a message_sent event.
    Decision decide(const UserId& user, int day, DayPart part);
    std::optional<Decision> logged_decision(const UserId& user, int day, DayPart part) const;
    std::vector<Decision> decisions_of(const UserId& user) const;
    std::size_t decision_count() const { return decisions_.size(); }
    /// Reinstates a decision read back from a log; no events are produced.
    void restore_decision(const Decision& d);

    /// Seconds since study start of the nightly training run on `day`.
    Seconds training_cutoff(int day) const { return day * kSecondsPerDay + cfg_.training_time; }

    TrainingJob prepare_training(int as_of_day) const;
    /// Pure computation over the job and the currently published policies.
    TrainingReport run_training(const TrainingJob& job) const;
    void publish(const TrainingReport& report);
    /// prepare + run + publish.
    TrainingReport train_all(int as_of_day);

    /// Per-user traces of decision-time states and rewards for decisions whose
    /// reward is final at `cutoff`.
    std::vector<Trace> traces(Seconds cutoff) const;
    Trace trace_of(const UserId& user, Seconds cutoff) const;

    const std::optional<ClusterModel>& cluster_model() const { return cluster_; }
    /// Computes and stores the model on first use, then returns the stored one.
    const ClusterModel& run_clustering_once(int as_of_day, bool force = false);
    void set_cluster_model(ClusterModel model);
    /// Cluster of a user, assigning users unknown to the model to the nearest
    /// medoid (the assignment is remembered in the model).
    int cluster_of(const UserId& user, int day);

    /// Key of the published policy serving this user; empty for random.
    std::string policy_key_for(const UserId& user, int day);

    std::string export_policy(const std::string& key) const;
    /// Refuses malformed snapshots and versions not above the current one.
    void load_policy(const std::string& snapshot);

private:
    using DecisionKey = std::tuple<UserId, int, int>;

    EngineConfig cfg_;
    MessageCatalog catalog_;
    EventStore events_;
    PolicyRegistry policies_;
    std::set<UserId> users_;
    std::map<UserId, int> join_day_;
    std::map<DecisionKey, Decision> decisions_;
    std::optional<ClusterModel> cluster_;
};

}  // namespace phrl
