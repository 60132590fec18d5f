#pragma once

// The running service: durable logs, the job scheduler, the JSON API and the
// connection to the messaging platform.
//
// Persisted layout inside the BlobStore:
//   users.jsonl        {"user_id":..,"join_day":..}
//   events.jsonl       one event line per accepted event (message_sent included)
//   decisions.jsonl    one decision line per decision
//   jobs.jsonl         {"job":"train:5","status":"succeeded","at":..}
//   idempotency.jsonl  stored responses by Idempotency-Key
//   policies.json      snapshot of published policies and completed training runs
//   cluster_model.json the cluster model, rewritten whenever it changes
//
// A restarted service replays everything above and continues without
// re-firing completed jobs.

#include "phrl/codec.hpp"
#include "phrl/engine.hpp"
#include "phrl/metrics.hpp"
#include "phrl/scheduler.hpp"
#include "phrl/storage.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace phrl {

struct ServiceConfig {
    EngineConfig engine;
    /// Bearer token required on every endpoint except /health; empty disables auth.
    std::string api_token;
    /// Only UTC is supported; day boundaries are UTC midnights.
    std::string timezone = "UTC";

    void validate() const;
};

struct ApiResponse {
    int status = 200;
    Json body;
};

/// Header names are matched case-insensitively.
using Headers = std::map<std::string, std::string>;

ApiResponse api_error(int status, const std::string& code, const std::string& message);

/// Connection to the messaging platform: inbound user events, outbound messages.
class OutboundAdapter {
public:
    virtual ~OutboundAdapter() = default;
    /// Events that arrived since the previous call.
    virtual std::vector<Event> fetch_events() = 0;
    virtual void post_message(const UserId& user, const MessageEntry& message, Seconds sent_ts) = 0;
};

/// In-process adapter: events are queued by the caller, posted messages recorded.
class LoopbackAdapter : public OutboundAdapter {
public:
    struct Posted {
        UserId user;
        std::string message_id;
        Seconds sent_ts = 0;
    };

    void queue(Event e);
    std::vector<Event> fetch_events() override;
    void post_message(const UserId& user, const MessageEntry& message, Seconds sent_ts) override;
    std::vector<Posted> posted() const;

private:
    mutable std::mutex mu_;
    std::vector<Event> inbox_;
    std::vector<Posted> posted_;
};

struct ReplaySummary {
    std::size_t users = 0;
    std::size_t events = 0;
    std::size_t decisions = 0;
    std::size_t jobs = 0;
    std::size_t idempotency_keys = 0;
    std::size_t policies = 0;
    bool cluster_model = false;
    /// Logs whose torn trailing line was dropped.
    std::vector<std::string> torn_logs;
    /// Lines that failed to parse or were rejected on re-ingestion.
    std::vector<std::string> skipped;
};

struct TickReport {
    std::vector<std::string> fired;
    std::map<std::string, std::string> failed;
};

class Service {
public:
    Service(ServiceConfig cfg, MessageCatalog catalog, std::shared_ptr<BlobStore> store,
            std::shared_ptr<const Clock> clock);

    const ServiceConfig& config() const { return cfg_; }
    const ReplaySummary& replay_summary() const { return replay_; }
    void set_outbound(std::shared_ptr<OutboundAdapter> adapter);

    /// Runs every job due at the clock's current time that has not succeeded
    /// yet, oldest first. A failed job is recorded and retried on the next tick.
    TickReport tick();
    /// Ingests events from the outbound adapter; returns how many were new.
    std::size_t pull_events();

    /// Routes one request. `target` is the path with optional query string.
    ApiResponse handle(const std::string& method, const std::string& target, const std::string& body = {},
                       const Headers& headers = {});

    /// Metrics document from the online accumulator.
    Json metrics(int from_day, int to_day) const;
    /// The same document recomputed from the logs at the accumulator's horizon.
    Json metrics_from_logs(int from_day, int to_day) const;
    /// Events with an earlier timestamp are refused (their time window is closed).
    Seconds sealed_until() const;

    std::set<std::string> succeeded_jobs() const;
    std::size_t job_failures() const;

    /// Runs `f` on the engine under the service lock.
    template <class F>
    auto inspect(F&& f) const {
        std::lock_guard lock(mu_);
        return f(static_cast<const DecisionEngine&>(engine_));
    }

private:
    ApiResponse route(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& query, const std::string& body);
    ApiResponse post_user(const Json& body);
    ApiResponse post_event(const Event& e);
    ApiResponse get_inbox(const UserId& user, Seconds since) const;
    ApiResponse get_decisions(const UserId& user) const;
    ApiResponse get_policies() const;
    ApiResponse admin_train(std::optional<int> as_of_day);
    ApiResponse admin_cluster(std::optional<int> as_of_day, bool force);

    void replay();
    void run_job(const Job& job);
    void run_decisions(int day, DayPart part);
    TrainingReport train(int as_of_day, const std::string& run_id);
    void record_job(const Job& job, bool ok, const std::string& error);
    void persist_policies();
    void persist_cluster_model();
    ApiResponse ingest_locked(const Event& e);

    ServiceConfig cfg_;
    std::shared_ptr<BlobStore> store_;
    std::shared_ptr<const Clock> clock_;
    std::shared_ptr<OutboundAdapter> outbound_;

    mutable std::mutex mu_;     // engine, logs and bookkeeping
    std::mutex tick_mu_;        // one scheduler pass at a time
    std::mutex train_mu_;       // one training run at a time
    DecisionEngine engine_;
    MetricsAccumulator metrics_;
    std::set<std::string> succeeded_;
    std::size_t failures_ = 0;
    std::set<std::string> runs_;  // training runs whose result is published
    std::map<std::string, ApiResponse> idempotent_;
    std::size_t cluster_assignments_ = 0;
    ReplaySummary replay_;
};

}  // namespace phrl
