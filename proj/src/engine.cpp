#include "phrl/engine.hpp"

#include "phrl/codec.hpp"

#include <algorithm>

namespace phrl {

std::string_view to_string(PersonalizationMode m) {
    switch (m) {
        case PersonalizationMode::pooled: return "pooled";
        case PersonalizationMode::grouped: return "grouped";
        case PersonalizationMode::separate: return "separate";
    }
    return "?";
}

std::optional<PersonalizationMode> mode_from_string(std::string_view s) {
    for (auto m : {PersonalizationMode::pooled, PersonalizationMode::grouped, PersonalizationMode::separate})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

std::string cluster_key(int cluster) { return "cluster:" + std::to_string(cluster); }
std::string user_key(const UserId& user) { return "user:" + user; }

void EngineConfig::validate() const {
    if (exploration_days < 0) throw ConfigError("exploration_days must be nonnegative");
    if (exploration_actions.empty()) throw ConfigError("exploration_actions must be nonempty");
    if (clustering_day < 0) throw ConfigError("clustering_day must be nonnegative");
    if (k < 1) throw ConfigError("k must be at least 1");
    schedule.validate();
    if (training_time <= schedule.decision_time.back() || training_time >= kSecondsPerDay)
        throw ConfigError("training_time must fall after the evening decision and before midnight");
    solver.validate();
    scheme.validate();
    reward.validate();
    mood.validate();
    ranges.validate();
}

std::shared_ptr<const PolicyMap> PolicyRegistry::snapshot() const {
    std::lock_guard lock(mu_);
    return current_;
}

std::shared_ptr<const Policy> PolicyRegistry::get(const std::string& key) const {
    const auto snap = snapshot();
    auto it = snap->find(key);
    return it == snap->end() ? nullptr : it->second;
}

void PolicyRegistry::publish(const std::map<std::string, Policy>& updates) {
    if (updates.empty()) return;
    std::lock_guard lock(mu_);
    auto next = std::make_shared<PolicyMap>(*current_);
    for (const auto& [key, p] : updates) {
        auto it = next->find(key);
        if (it != next->end() && p.version <= it->second->version)
            throw ContractViolation("policy " + key + ": version " + std::to_string(p.version) +
                                    " does not exceed published " + std::to_string(it->second->version));
        (*next)[key] = std::make_shared<const Policy>(p);
    }
    current_ = std::move(next);
}

DecisionEngine::DecisionEngine(EngineConfig cfg, MessageCatalog catalog)
    : cfg_(std::move(cfg)), catalog_(std::move(catalog)), events_(cfg_.schedule) {
    cfg_.validate();
}

bool DecisionEngine::register_user(const UserId& user, int join_day) {
    if (user.empty()) throw ContractViolation("user id must be nonempty");
    if (join_day < 0) throw ContractViolation("join day must be nonnegative");
    if (!users_.insert(user).second) return false;
    join_day_[user] = join_day;
    return true;
}

int DecisionEngine::join_day(const UserId& user) const {
    auto it = join_day_.find(user);
    if (it == join_day_.end()) throw ContractViolation("unknown user " + user);
    return it->second;
}

std::optional<Decision> DecisionEngine::logged_decision(const UserId& user, int day, DayPart part) const {
    auto it = decisions_.find({user, day, code(part)});
    if (it == decisions_.end()) return std::nullopt;
    return it->second;
}

std::vector<Decision> DecisionEngine::decisions_of(const UserId& user) const {
    std::vector<Decision> out;
    for (auto it = decisions_.lower_bound({user, std::numeric_limits<int>::min(), 0});
         it != decisions_.end() && std::get<0>(it->first) == user; ++it)
        out.push_back(it->second);
    return out;
}

void DecisionEngine::restore_decision(const Decision& d) {
    if (!is_registered(d.user_id)) throw ContractViolation("decision for unregistered user " + d.user_id);
    decisions_[{d.user_id, d.day, code(d.day_part)}] = d;
}

std::string DecisionEngine::policy_key_for(const UserId& user, int day) {
    auto published = [&](const std::string& key) { return policies_.get(key) != nullptr; };
    std::string preferred;
    switch (cfg_.mode) {
        case PersonalizationMode::pooled: break;
        case PersonalizationMode::grouped:
            if (cluster_) preferred = cluster_key(cluster_of(user, day));
            break;
        case PersonalizationMode::separate: preferred = user_key(user); break;
    }
    if (!preferred.empty() && published(preferred)) return preferred;
    return published(kPooledKey) ? kPooledKey : std::string{};
}

Decision DecisionEngine::decide(const UserId& user, int day, DayPart part) {
    if (auto logged = logged_decision(user, day, part)) return *logged;
    if (!is_registered(user)) throw ContractViolation("decide: unknown user " + user);

    Decision d;
    d.user_id = user;
    d.day = day;
    d.day_part = part;
    d.decided_at = cfg_.schedule.decision_ts(day, part);
    d.state = events_.build_state(user, day, part);

    Rng rng(mix_seed(cfg_.seed, hash_string(user), static_cast<std::uint64_t>(day), static_cast<std::uint64_t>(code(part))));
    auto random_action = [&] {
        return cfg_.exploration_actions[rng.uniform_index(cfg_.exploration_actions.size())];
    };

    const auto key = policy_key_for(user, day);
    if (day < cfg_.exploration_days) {
        d.action = random_action();
        d.explored = true;
        if (!key.empty()) {
            const auto policy = policies_.get(key);
            d.greedy_action = greedy_action(*policy, d.state);
            d.policy_key = key;
            d.policy_version = policy->version;
        }
    } else if (!key.empty()) {
        const auto policy = policies_.get(key);
        const auto draw = epsilon_greedy_draw(*policy, d.state, rng);
        d.action = draw.action;
        d.explored = draw.explored;
        d.greedy_action = greedy_action(*policy, d.state);
        d.policy_key = key;
        d.policy_version = policy->version;
    } else {
        d.action = random_action();
        d.explored = true;
        d.fallback_random = true;
    }

    const auto latest = events_.activity(user, day, d.decided_at).latest_rating;
    const auto bucket = mood_bucket(d.state, latest, cfg_.mood);
    const auto sel = catalog_.select(d.action, bucket, events_.sent_on_day(user, day), rng);
    d.catalog_exhausted = sel.status == SelectionStatus::exhausted;
    d.message = sel.message;
    if (d.message) {
        const auto r = events_.ingest({user, d.decided_at, EventKind::message_sent, 0, d.message->id});
        if (!r.accepted) throw ContractViolation("decide: message_sent rejected: " + r.reason);
    }
    decisions_[{user, day, code(part)}] = d;
    return d;
}

namespace {

DecisionLookup lookup_in(const std::map<std::tuple<UserId, int, int>, Decision>& decisions) {
    return [&decisions](const UserId& u, int day, DayPart p) -> std::optional<DecisionRecord> {
        auto it = decisions.find({u, day, code(p)});
        if (it == decisions.end()) return std::nullopt;
        return DecisionRecord{it->second.action, it->second.state};
    };
}

}  // namespace

Trace DecisionEngine::trace_of(const UserId& user, Seconds cutoff) const {
    Trace t;
    t.user_id = user;
    for (const auto& d : decisions_of(user)) {
        if (cfg_.schedule.reward_boundary_ts(d.day, d.day_part) > cutoff) continue;
        t.days[d.day].push_back({d.state, events_.compute_reward(user, d.day, d.day_part, cfg_.reward)});
    }
    return t;
}

std::vector<Trace> DecisionEngine::traces(Seconds cutoff) const {
    std::vector<Trace> out;
    for (const auto& user : users_) out.push_back(trace_of(user, cutoff));
    return out;
}

TrainingJob DecisionEngine::prepare_training(int as_of_day) const {
    TrainingJob job;
    job.as_of_day = as_of_day;
    const Seconds cutoff = training_cutoff(as_of_day);
    const auto lookup = lookup_in(decisions_);

    std::map<UserId, Dataset> per_user;
    for (const auto& user : users_) {
        auto assembled = events_.assemble_experiences(user, join_day(user), as_of_day, cutoff, lookup, cfg_.reward);
        job.quality += assembled.quality;
        job.experiences += assembled.data.size();
        per_user[user] = std::move(assembled.data);
    }

    auto& pooled = job.partitions[kPooledKey];
    for (const auto& [_, data] : per_user) pooled.append(data);

    if (cfg_.mode == PersonalizationMode::grouped && cluster_) {
        job.partitions.clear();
        std::map<UserId, int> assignment;
        for (const auto& user : users_) {
            auto it = cluster_->assignment.find(user);
            assignment[user] = it != cluster_->assignment.end()
                                   ? it->second
                                   : assign_user(trace_of(user, static_cast<Seconds>(as_of_day) * kSecondsPerDay),
                                                 *cluster_);
        }
        for (int c = 0; c < cluster_->k; ++c) job.partitions[cluster_key(c)];
        for (const auto& [user, data] : per_user) job.partitions[cluster_key(assignment[user])].append(data);
        // no experience may cross into another cluster's partition
        for (const auto& [key, data] : job.partitions)
            for (const auto& e : data.experiences())
                if (cluster_key(assignment.at(e.user_id)) != key)
                    throw ContractViolation("experience of " + e.user_id + " leaked into partition " + key);
    } else if (cfg_.mode == PersonalizationMode::separate) {
        for (const auto& [user, data] : per_user)
            if (data.size() >= cfg_.min_user_experiences) job.partitions[user_key(user)] = data;
    }

    for (const auto& [key, data] : job.partitions)
        if (data.empty()) job.empty_partitions.push_back(key);
    return job;
}

TrainingReport DecisionEngine::run_training(const TrainingJob& job) const {
    TrainingReport report;
    report.as_of_day = job.as_of_day;
    report.quality = job.quality;
    report.experiences = job.experiences;
    for (const auto& [key, data] : job.partitions) {
        if (data.empty()) {
            report.skipped.push_back(key);
            continue;
        }
        const auto prev = policies_.get(key);
        const bool warm = cfg_.warm_start && prev && prev->weights.dimension() == kBasisDimension;
        try {
            auto p = lspi(data, cfg_.solver, cfg_.scheme, warm ? prev->weights : QWeights::zeros(),
                          prev ? prev->version : 0);
            p.cluster_id = key;
            p.watermark.as_of_day = job.as_of_day;
            report.trained.emplace(key, std::move(p));
        } catch (const SolverFailure& e) {
            report.failures[key] = e.what();
        }
    }
    return report;
}

void DecisionEngine::publish(const TrainingReport& report) { policies_.publish(report.trained); }

TrainingReport DecisionEngine::train_all(int as_of_day) {
    auto report = run_training(prepare_training(as_of_day));
    publish(report);
    return report;
}

const ClusterModel& DecisionEngine::run_clustering_once(int as_of_day, bool force) {
    if (cluster_ && !force) return *cluster_;
    if (as_of_day < cfg_.exploration_days)
        throw ContractViolation("clustering requires the exploration phase to be complete (day " +
                                std::to_string(cfg_.exploration_days) + ")");
    const auto ts = traces(static_cast<Seconds>(as_of_day) * kSecondsPerDay);
    cluster_ = cluster_users(ts, cfg_.k, cfg_.seed, cfg_.ranges);
    return *cluster_;
}

void DecisionEngine::set_cluster_model(ClusterModel model) {
    model.validate();
    cluster_ = std::move(model);
}

int DecisionEngine::cluster_of(const UserId& user, int day) {
    if (!cluster_) throw ContractViolation("cluster_of: no cluster model");
    if (auto it = cluster_->assignment.find(user); it != cluster_->assignment.end()) return it->second;
    const int c = assign_user(trace_of(user, static_cast<Seconds>(day) * kSecondsPerDay), *cluster_);
    cluster_->assignment[user] = c;
    return c;
}

std::string DecisionEngine::export_policy(const std::string& key) const {
    const auto p = policies_.get(key);
    if (!p) throw ContractViolation("no published policy " + key);
    return encode_line(to_json(*p));
}

void DecisionEngine::load_policy(const std::string& snapshot) {
    auto p = policy_from_json(parse_json(snapshot));
    if (!p.cluster_id) throw FormatError("policy snapshot lacks a key");
    policies_.publish({{*p.cluster_id, p}});
}

}  // namespace phrl
