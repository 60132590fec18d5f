// phrl: run the personalization service, simulate a study, or operate on a
// data directory written by either.

#include "phrl/config.hpp"
#include "phrl/http_server.hpp"
#include "phrl/service.hpp"
#include "phrl/sim.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <chrono>
#include <fstream>
#include <iostream>
#include <thread>

using namespace phrl;

namespace {

constexpr int kExitNoData = 3;
const char* kStoredConfig = "service_config.json";
const char* kStudyFile = "study.json";

std::atomic<bool> g_stop{false};

struct Common {
    std::string config_path;
    std::string data_dir;
    std::optional<std::uint64_t> seed;
    std::string mode;
    std::optional<int> k;
};

void add_common(CLI::App* cmd, Common& c, bool data_dir_required) {
    cmd->add_option("--config", c.config_path, "service configuration JSON")->envname("PHRL_CONFIG");
    auto* dd = cmd->add_option("--data-dir", c.data_dir, "directory holding logs and snapshots")->envname("PHRL_DATA_DIR");
    if (data_dir_required) dd->required();
    cmd->add_option("--seed", c.seed, "random seed")->envname("PHRL_SEED");
    cmd->add_option("--mode", c.mode, "pooled, grouped or separate")
        ->envname("PHRL_MODE")
        ->check(CLI::IsMember({"pooled", "grouped", "separate"}));
    cmd->add_option("--k", c.k, "number of clusters")->envname("PHRL_K")->check(CLI::PositiveNumber);
}

/// Explicit --config, else the copy stored in the data directory, else defaults;
/// command-line and environment overrides win.
ServiceConfig resolve_config(const Common& c) {
    ServiceConfig cfg;
    const auto stored = c.data_dir.empty() ? std::filesystem::path{} : std::filesystem::path(c.data_dir) / kStoredConfig;
    if (!c.config_path.empty())
        cfg = load_service_config(c.config_path);
    else if (!stored.empty() && std::filesystem::exists(stored))
        cfg = load_service_config(stored);
    if (c.seed) cfg.engine.seed = *c.seed;
    if (!c.mode.empty()) cfg.engine.mode = *mode_from_string(c.mode);
    if (c.k) cfg.engine.k = *c.k;
    if (const char* tok = std::getenv("PHRL_TOKEN")) cfg.api_token = tok;
    cfg.validate();
    return cfg;
}

void store_config(const std::filesystem::path& dir, const ServiceConfig& cfg) {
    std::filesystem::create_directories(dir);
    const auto path = dir / kStoredConfig;
    if (std::filesystem::exists(path)) return;
    std::ofstream(path) << to_json(cfg).dump(2) << '\n';
}

MessageCatalog resolve_catalog(const std::string& path) {
    return path.empty() ? MessageCatalog::builtin() : MessageCatalog::load(path);
}

/// Offline operations run the service on a virtual clock parked at the end of
/// the replayed history.
struct Offline {
    std::shared_ptr<VirtualClock> clock = std::make_shared<VirtualClock>(0);
    std::unique_ptr<Service> svc;

    Offline(const Common& c, const std::string& catalog) {
        if (!std::filesystem::is_directory(c.data_dir)) throw ConfigError("no data directory " + c.data_dir);
        svc = std::make_unique<Service>(resolve_config(c), resolve_catalog(catalog),
                                        std::make_shared<FileBlobStore>(c.data_dir), clock);
        clock->set(svc->sealed_until());
    }
};

int print_response(const ApiResponse& r) {
    std::cout << r.body.dump(2) << '\n';
    if (r.status < 300) return 0;
    const auto code = r.body.at("error").at("code").get<std::string>();
    std::cerr << "error: " << code << ": " << r.body["error"]["message"].get<std::string>() << '\n';
    return code == "NO_DATA" ? kExitNoData : 1;
}

std::int64_t study_start(const std::filesystem::path& dir, std::optional<std::int64_t> requested) {
    const auto path = dir / kStudyFile;
    if (std::filesystem::exists(path)) {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_json(ss.str()).at("study_start_unix").get<std::int64_t>();
    }
    using namespace std::chrono;
    const auto now = duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
    const auto start = requested.value_or(now - now % kSecondsPerDay);
    std::ofstream(path) << Json{{"study_start_unix", start}}.dump() << '\n';
    return start;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reinforcement-learning personalization of intervention messages"};
    app.require_subcommand(1);

    Common common;
    std::string catalog_path;

    // run-server
    auto* server = app.add_subcommand("run-server", "serve the HTTP API and run scheduled jobs");
    add_common(server, common, true);
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string clock_kind = "wall";
    std::optional<std::int64_t> start_unix;
    double speed = 1.0;
    int tick_ms = 1000;
    server->add_option("--host", host)->envname("PHRL_HOST");
    server->add_option("--port", port)->envname("PHRL_PORT")->check(CLI::Range(0, 65535));
    server->add_option("--clock", clock_kind, "wall or virtual")->check(CLI::IsMember({"wall", "virtual"}));
    server->add_option("--study-start", start_unix, "Unix time of study day 0, 00:00 UTC (first start only)");
    server->add_option("--speed", speed, "virtual seconds per real second")->check(CLI::PositiveNumber);
    server->add_option("--tick-ms", tick_ms, "scheduler period")->check(CLI::Range(10, 600000));
    server->add_option("--catalog", catalog_path, "message catalog JSON");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run a synthetic study on a virtual clock");
    add_common(simulate, common, false);
    int days = 21;
    std::string profile_mix, out_dir = "sim_out";
    std::vector<double> sweep;
    simulate->add_option("--days", days)->check(CLI::Range(1, 3650));
    simulate->add_option("--profile-mix", profile_mix, "cohort spec JSON (default: built-in 27-user cohort)");
    simulate->add_option("--out", out_dir, "report directory");
    simulate->add_option("--zero-sent-fraction", sweep,
                         "reward read fraction on days without messages; several values run a sensitivity sweep");

    // offline admin commands
    auto* train_now = app.add_subcommand("train-now", "train and publish policies from a data directory");
    add_common(train_now, common, true);
    std::optional<int> as_of_day;
    train_now->add_option("--as-of-day", as_of_day)->check(CLI::NonNegativeNumber);

    auto* cluster_now = app.add_subcommand("cluster-now", "cluster users from a data directory");
    add_common(cluster_now, common, true);
    bool force = false;
    cluster_now->add_option("--as-of-day", as_of_day)->check(CLI::NonNegativeNumber);
    cluster_now->add_flag("--force", force, "recompute an existing model");

    auto* export_metrics = app.add_subcommand("export-metrics", "write the metrics document");
    add_common(export_metrics, common, true);
    std::string metrics_out;
    std::optional<int> from_day, to_day;
    export_metrics->add_option("--out", metrics_out, "output file (default stdout)");
    export_metrics->add_option("--from-day", from_day)->check(CLI::NonNegativeNumber);
    export_metrics->add_option("--to-day", to_day)->check(CLI::NonNegativeNumber);

    auto* replay_log = app.add_subcommand("replay-log", "replay a data directory and summarize it");
    add_common(replay_log, common, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (server->parsed()) {
            const auto cfg = resolve_config(common);
            const std::filesystem::path dir(common.data_dir);
            store_config(dir, cfg);
            std::shared_ptr<Clock> clock;
            std::shared_ptr<VirtualClock> vclock;
            if (clock_kind == "wall") {
                clock = std::make_shared<WallClock>(study_start(dir, start_unix));
            } else {
                vclock = std::make_shared<VirtualClock>(0);
                clock = vclock;
            }
            Service svc(cfg, resolve_catalog(catalog_path), std::make_shared<FileBlobStore>(dir), clock);
            if (vclock) vclock->set(std::max<Seconds>(0, svc.sealed_until()));
            HttpServer http(svc);
            const int bound = http.start(host, port);
            std::signal(SIGINT, [](int) { g_stop = true; });
            std::signal(SIGTERM, [](int) { g_stop = true; });
            std::cerr << "listening on " << host << ':' << bound << " (day " << day_of(clock->now()) << ")\n";
            http.start_scheduler(std::chrono::milliseconds(tick_ms));
            auto last = std::chrono::steady_clock::now();
            while (!g_stop) {
                std::this_thread::sleep_for(std::chrono::milliseconds(50));
                if (!vclock) continue;
                const auto now = std::chrono::steady_clock::now();
                const double dt = std::chrono::duration<double>(now - last).count() * speed;
                if (dt >= 1.0) {
                    vclock->advance(static_cast<Seconds>(dt));
                    last = now;
                }
            }
            http.stop();
            return 0;
        }
        if (simulate->parsed()) {
            const auto cfg = resolve_config(common);
            const auto cohort = profile_mix.empty() ? default_cohort() : load_cohort(profile_mix);
            ExperimentOptions opts;
            opts.days = days;
            opts.mode = common.mode.empty() && common.config_path.empty() ? PersonalizationMode::grouped : cfg.engine.mode;
            opts.k = cfg.engine.k;
            opts.seed = common.seed ? *common.seed : (common.config_path.empty() ? 7 : cfg.engine.seed);
            opts.reward = cfg.engine.reward;
            if (sweep.size() > 1) {
                const auto result = sensitivity_sweep(cohort, opts, sweep);
                std::filesystem::create_directories(out_dir);
                std::ofstream(std::filesystem::path(out_dir) / "sensitivity.json") << result.dump(2) << '\n';
                std::cout << result.dump(2) << '\n';
                return 0;
            }
            if (sweep.size() == 1) opts.reward.zero_sent_fraction = sweep[0];
            if (!common.data_dir.empty()) {
                ServiceConfig stored = cfg;
                stored.engine.mode = opts.mode;
                stored.engine.seed = opts.seed;
                stored.engine.reward = opts.reward;
                store_config(common.data_dir, stored);
                opts.store = std::make_shared<FileBlobStore>(common.data_dir);
            }
            const auto report = run_experiment(cohort, opts);
            write_report_files(report, out_dir);
            std::cout << report_tables(report);
            return report.job_failures == 0 ? 0 : 1;
        }
        if (train_now->parsed()) {
            Offline off(common, catalog_path);
            Json body = Json::object();
            if (as_of_day) body["as_of_day"] = *as_of_day;
            return print_response(off.svc->handle("POST", "/admin/train", body.dump()));
        }
        if (cluster_now->parsed()) {
            Offline off(common, catalog_path);
            Json body{{"force", force}};
            if (as_of_day) body["as_of_day"] = *as_of_day;
            return print_response(off.svc->handle("POST", "/admin/cluster", body.dump()));
        }
        if (export_metrics->parsed()) {
            Offline off(common, catalog_path);
            const int last = std::max(0, day_of(off.svc->sealed_until()) - 1);
            const int from = from_day.value_or(0), to = to_day.value_or(std::max(from, last));
            if (to < from) throw ConfigError("--to-day must not precede --from-day");
            const auto doc = off.svc->metrics_from_logs(from, to).dump(2);
            if (metrics_out.empty())
                std::cout << doc << '\n';
            else
                std::ofstream(metrics_out) << doc << '\n';
            return 0;
        }
        if (replay_log->parsed()) {
            Offline off(common, catalog_path);
            const auto& r = off.svc->replay_summary();
            Json out{{"users", r.users},
                     {"events", r.events},
                     {"decisions", r.decisions},
                     {"jobs", r.jobs},
                     {"idempotency_keys", r.idempotency_keys},
                     {"policies", r.policies},
                     {"cluster_model", r.cluster_model},
                     {"torn_logs", r.torn_logs},
                     {"skipped", r.skipped},
                     {"sealed_until", off.svc->sealed_until()}};
            std::cout << out.dump(2) << '\n';
            return r.skipped.empty() ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
