// Acceptance run: one PASS/FAIL line per primary criterion, nonzero exit if
// any criterion fails. INFO lines carry context and never affect the result.

#include "dtw_oracle.hpp"
#include "finite_mdp.hpp"

#include "phrl/codec.hpp"
#include "phrl/sim.hpp"
#include "phrl/state_builder.hpp"
#include "phrl/storage.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <unistd.h>

using namespace phrl;
using namespace phrl::testing;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s  %-22s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void info(const std::string& name, const std::string& detail) {
    std::printf("INFO  %-22s %s\n", name.c_str(), detail.c_str());
    std::fflush(stdout);
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Policy policy_with(const QWeights& w, double epsilon = 0.1) {
    Policy p;
    p.weights = w;
    p.config.epsilon = epsilon;
    return p;
}

QWeights constant_q(const std::array<double, kActions>& q) {
    auto w = QWeights::zeros();
    for (auto a : kAllActions)
        for (int slot = 0; slot < kBinsPerFeature; ++slot)
            w.w[static_cast<std::size_t>(action_offset(a) + feature_offset(Feature::day_part) + slot)] =
                q[static_cast<std::size_t>(code(a))];
    return w;
}

void lstdq_correctness() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    int policy_mismatches = 0;
    SolverConfig exact;
    exact.ridge = 1e-10;
    for (std::uint64_t seed = 101; seed <= 105; ++seed) {
        const int n = 8 + static_cast<int>(seed % 9);
        const auto m = random_mdp(n, seed);
        const auto data = mdp_dataset(m);
        Rng rng(seed);
        auto target_w = QWeights::zeros();
        for (auto& x : target_w.w) x = rng.uniform01();
        const auto target = policy_with(target_w);
        TabularPolicy pi(static_cast<std::size_t>(n));
        for (int s = 0; s < n; ++s)
            pi[static_cast<std::size_t>(s)] = code(greedy_action(target, m.encoding[static_cast<std::size_t>(s)]));
        const auto oracle = evaluate_tabular(m, pi, 0.95);
        const auto w = lstdq(data, target, exact);
        for (int s = 0; s < n; ++s)
            for (auto a : kAllActions)
                worst = std::max(worst, std::abs(q_value(w, m.encoding[static_cast<std::size_t>(s)], a, target.scheme) -
                                                 oracle[static_cast<std::size_t>(s)][static_cast<std::size_t>(code(a))]));

        const auto learned = lspi(data, SolverConfig{}, BinningScheme::defaults(), QWeights::zeros());
        const auto best = optimal_policy(m, 0.95);
        for (int s = 0; s < n; ++s)
            policy_mismatches +=
                code(greedy_action(learned, m.encoding[static_cast<std::size_t>(s)])) != best[static_cast<std::size_t>(s)];
    }
    const double elapsed = seconds_since(t0);
    report("lstdq-correctness", worst <= 1e-6 && policy_mismatches == 0 && elapsed < 10.0,
           fmt("5 MDPs: max |Q - Q_tab| = %.2e (tol 1e-6), greedy mismatches vs policy iteration = %d, %.2f s",
               worst, policy_mismatches, elapsed));
}

void lspi_fixed_point() {
    double worst = 0.0;
    int unconverged = 0;
    for (std::uint64_t seed = 201; seed <= 205; ++seed) {
        const auto m = random_mdp(16, seed);
        const auto data = mdp_dataset(m);
        const auto p = lspi(data, SolverConfig{}, BinningScheme::defaults(), QWeights::zeros());
        if (!p.converged) {
            ++unconverged;
            continue;
        }
        worst = std::max(worst, max_abs_difference(lstdq(data, p, p.config), p.weights));
    }
    report("lspi-fixed-point", unconverged == 0 && worst < 1e-5,
           fmt("5 MDPs: unconverged = %d, extra-pass max |dw| = %.2e (tol 1e-5)", unconverged, worst));
}

void dtw_oracle() {
    Rng rng(301);
    std::vector<std::vector<DayTraceElement>> corpus;
    for (int i = 0; i < 20; ++i) corpus.push_back(random_elements(rng, 1 + static_cast<std::size_t>(i % 5), i % 3 == 0));
    int mismatches = 0, pairs = 0;
    for (const auto& a : corpus)
        for (const auto& b : corpus) {
            ++pairs;
            mismatches += dtw(std::span<const DayTraceElement>(a), std::span<const DayTraceElement>(b)) !=
                          brute_force_alignment_cost(a, b, euclidean);
        }
    int asymmetric = 0, nonzero_self = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_elements(rng, 1 + rng.uniform_index(8), i % 2 == 0);
        const auto b = random_elements(rng, 1 + rng.uniform_index(8), i % 2 == 0);
        const std::span<const DayTraceElement> sa(a), sb(b);
        asymmetric += dtw(sa, sb) != dtw(sb, sa);
        nonzero_self += dtw(sa, sa) != 0.0;
    }
    report("dtw-oracle", mismatches == 0 && asymmetric == 0 && nonzero_self == 0,
           fmt("%d corpus pairs, %d differ from enumeration; 1000 random pairs: %d asymmetric, %d nonzero self",
               pairs, mismatches, asymmetric, nonzero_self));
}

void clustering_recovery() {
    double worst = 1.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(mix_seed(401, seed));
        std::vector<Trace> traces;
        std::vector<int> truth;
        for (int i = 0; i < 20; ++i) {
            const bool responder = i % 2 == 0;
            traces.push_back(synthetic_trace("u" + std::to_string(i), responder, rng));
            truth.push_back(responder ? 1 : 0);
        }
        const auto model = cluster_users(traces, 2, seed);
        std::vector<int> labels;
        for (const auto& t : traces) labels.push_back(model.assignment.at(t.user_id));
        worst = std::min(worst, rand_index(labels, truth));
    }
    report("clustering-recovery", worst >= 0.9, fmt("20 users, k=2, 10 seeds: min Rand index = %.3f (need >= 0.9)", worst));
}

void epsilon_rate() {
    const auto p = policy_with(constant_q({0.0, 0.0, 3.0, 0.0}), 0.1);
    Rng rng(501);
    const int draws = 40000;
    int off = 0;
    for (int i = 0; i < draws; ++i) off += epsilon_greedy(p, StateVector{}, rng) != Action::informing;
    const double rate = static_cast<double>(off) / draws;
    report("epsilon-greedy-rate", std::abs(rate - 0.075) <= 0.005,
           fmt("%d decisions: non-greedy rate = %.4f (0.075 +- 0.005)", draws, rate));
}

Event make_event(EventKind kind, Seconds ts, int value, std::string id) { return {"u", ts, kind, value, std::move(id)}; }

void reward_formula() {
    const RewardConfig cfg;
    const bool examples = reward_from_counts(0, 0, 0, cfg) == 0.0 && reward_from_counts(2, 1, 2, cfg) == 1.25 &&
                          reward_from_counts(3, 3, 3, cfg) == 2.0;

    // Random day of events; adding one read or one rating never lowers any day-part reward.
    Rng rng(601);
    int violations = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<Event> events;
        std::vector<std::pair<std::string, Seconds>> unread;
        const int sends = static_cast<int>(rng.uniform_index(4));
        for (int i = 0; i < sends; ++i) {
            const Seconds ts = 9 * 3600 + static_cast<Seconds>(rng.uniform_index(14 * 3600));
            const std::string id = "m" + std::to_string(i);
            events.push_back(make_event(EventKind::message_sent, ts, 0, id));
            if (rng.bernoulli(0.5))
                events.push_back(make_event(EventKind::message_read, ts + 1, 0, id));
            else
                unread.emplace_back(id, ts);
        }
        const int ratings = static_cast<int>(rng.uniform_index(5));
        for (int i = 0; i < ratings; ++i)
            events.push_back(make_event(EventKind::rating, static_cast<Seconds>(rng.uniform_index(kSecondsPerDay)),
                                        1 + static_cast<int>(rng.uniform_index(7)), ""));

        auto build = [](const std::vector<Event>& evs) {
            EventStore store;
            for (const auto& e : evs) store.ingest(e);
            return store;
        };
        const auto base = build(events);
        auto more_ratings = events;
        const Seconds extra_ts = static_cast<Seconds>(rng.uniform_index(kSecondsPerDay));
        more_ratings.push_back(make_event(EventKind::rating, extra_ts, 1 + static_cast<int>(rng.uniform_index(7)), ""));
        const auto rated = build(more_ratings);
        std::optional<EventStore> opened;
        if (!unread.empty()) {
            auto more_reads = events;
            const auto& [id, ts] = unread[rng.uniform_index(unread.size())];
            more_reads.push_back(make_event(EventKind::message_read, ts + 1, 0, id));
            opened = build(more_reads);
        }
        for (DayPart p : kAllDayParts) {
            const double r0 = base.compute_reward("u", 0, p, cfg);
            violations += rated.compute_reward("u", 0, p, cfg) < r0;
            if (opened) violations += opened->compute_reward("u", 0, p, cfg) < r0;
        }
    }
    report("reward-formula", examples && violations == 0,
           fmt("examples 0 / 1.25 / 2.0 %s; 10000 random event sets: %d monotonicity violations",
               examples ? "reproduced" : "NOT reproduced", violations));
}

int count_of(const Json& counts, Action a) { return counts.at(std::string(to_string(a))).get<int>(); }

const Json& week_of(const ExperimentReport& r, int w) { return r.metrics.at("weeks").at(static_cast<std::size_t>(w - 1)); }

void protocol_simulation() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentOptions opts;
    opts.seed = 7;
    const auto r = run_experiment(default_cohort(), opts);
    const double elapsed = seconds_since(t0);

    const auto& week1 = week_of(r, 1).at("actions");
    int n = 0;
    for (Action a : kAllActions) n += count_of(week1, a);
    const double mean = 0.25 * n;
    const double half = 1.96 * std::sqrt(n * 0.25 * 0.75);
    bool uniform = true;
    std::ostringstream counts;
    for (Action a : kAllActions) {
        const int c = count_of(week1, a);
        uniform = uniform && std::abs(c - mean) <= half;
        counts << ' ' << c;
    }
    report("protocol-week1-uniform", uniform,
           fmt("%d decisions, counts none/enc/inf/aff =%s, band %.1f +- %.1f", n, counts.str().c_str(), mean, half));

    const auto& greedy = week_of(r, 3).at("greedy");
    const int enc = count_of(greedy, Action::encouraging), inf = count_of(greedy, Action::informing),
              aff = count_of(greedy, Action::affirming), none = count_of(greedy, Action::none);
    report("protocol-greedy-order", enc > inf && inf > aff && aff > none,
           fmt("week-3 greedy counts enc %d, inf %d, aff %d, none %d (need enc > inf > aff > none)", enc, inf, aff,
               none));

    const double all = week_of(r, 2).at("reward").at("all").at("mean").get<double>();
    const double active = week_of(r, 2).at("reward_active").at("all").at("mean").get<double>();
    report("protocol-week2-starred", active > all,
           fmt("week-2 mean reward %.3f, excluding inactive users %.3f", all, active));
    report("protocol-runtime", elapsed < 60.0, fmt("27 users, 21 days: %.2f s (limit 60 s)", elapsed));

    std::array<long, kActions> pooled{};
    int ordered = 0, leads = 0;
    const int seeds = 30;
    for (int s = 1; s <= seeds; ++s) {
        opts.seed = static_cast<std::uint64_t>(s);
        const auto run = run_experiment(default_cohort(), opts);
        const auto& g = week_of(run, 3).at("greedy");
        for (Action a : kAllActions) pooled[static_cast<std::size_t>(code(a))] += count_of(g, a);
        ordered += count_of(g, Action::encouraging) > count_of(g, Action::informing) &&
                   count_of(g, Action::informing) > count_of(g, Action::affirming) &&
                   count_of(g, Action::affirming) > count_of(g, Action::none);
        bool top = true;
        for (Action a : {Action::none, Action::informing, Action::affirming})
            top = top && count_of(g, Action::encouraging) > count_of(g, a);
        leads += top;
    }
    info("protocol-seed-spread", fmt("seeds 1-%d: strict order in %d, encouraging first in %d; pooled greedy enc %ld, inf %ld, "
                                         "aff %ld, none %ld",
                                     seeds, ordered, leads, pooled[1], pooled[2], pooled[3], pooled[0]));
}

std::vector<std::string> log_lines(const BlobStore& store, const std::string& log) { return store.read_log(log).lines; }

void durability_and_repeats() {
    const auto dir = std::filesystem::temp_directory_path() / ("phrl_acceptance_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);

    ExperimentOptions straight_opts;
    auto straight_store = std::make_shared<MemoryBlobStore>();
    straight_opts.store = straight_store;
    const auto straight = run_experiment(default_cohort(), straight_opts);

    ExperimentOptions crash_opts;
    auto file_store = std::make_shared<FileBlobStore>(dir);
    crash_opts.store = file_store;
    crash_opts.restarts = {2 * kSecondsPerDay + 12 * 3600, 7 * kSecondsPerDay + 1, 9 * kSecondsPerDay + 15 * 3600,
                           16 * kSecondsPerDay + 20 * 3600 + 30 * 60};
    const auto crashed = run_experiment(default_cohort(), crash_opts);

    const bool same_events = log_lines(*file_store, "events.jsonl") == log_lines(*straight_store, "events.jsonl");
    const bool same_decisions =
        log_lines(*file_store, "decisions.jsonl") == log_lines(*straight_store, "decisions.jsonl");
    const bool same_metrics = to_json(crashed).dump() == to_json(straight).dump();

    std::set<std::string> fired;
    int doubles = 0;
    for (const auto& line : log_lines(*file_store, "jobs.jsonl")) {
        const auto j = Json::parse(line);
        if (j.at("status").get<std::string>() == "succeeded" && !fired.insert(j.at("job").get<std::string>()).second)
            ++doubles;
    }
    std::set<std::string> fired_straight;
    for (const auto& line : log_lines(*straight_store, "jobs.jsonl")) {
        const auto j = Json::parse(line);
        if (j.at("status").get<std::string>() == "succeeded") fired_straight.insert(j.at("job").get<std::string>());
    }
    report("durability", crashed.restarts == 4 && same_events && same_decisions && same_metrics && doubles == 0 &&
                             fired == fired_straight,
           fmt("%zu restarts; events log %s, decisions log %s, report %s; %d double-fired jobs, job set %s",
               crashed.restarts, same_events ? "equal" : "DIFFERS", same_decisions ? "equal" : "DIFFERS",
               same_metrics ? "equal" : "DIFFERS", doubles, fired == fired_straight ? "equal" : "DIFFERS"));
    std::filesystem::remove_all(dir);

    std::size_t repeats = straight.repeated_messages + crashed.repeated_messages;
    std::size_t decisions = straight.decisions + crashed.decisions;
    for (std::uint64_t seed : {11u, 12u}) {
        ExperimentOptions o;
        o.seed = seed;
        o.mode = seed % 2 ? PersonalizationMode::pooled : PersonalizationMode::grouped;
        for (const auto& cohort : {responder_cohort(Action::informing, 10), indifferent_cohort(10)}) {
            const auto r = run_experiment(cohort, o);
            repeats += r.repeated_messages;
            decisions += r.decisions;
        }
    }
    report("no-repeat", repeats == 0, fmt("6 runs, %zu decisions: %zu repeated message ids within a user-day", decisions,
                                          repeats));
}

}  // namespace

int main() {
    lstdq_correctness();
    lspi_fixed_point();
    dtw_oracle();
    clustering_recovery();
    epsilon_rate();
    reward_formula();
    protocol_simulation();
    durability_and_repeats();
    std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
