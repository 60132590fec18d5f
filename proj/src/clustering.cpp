#include "phrl/clustering.hpp"

#include "phrl/random.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <thread>

namespace phrl {

NormalizationRanges NormalizationRanges::defaults() {
    NormalizationRanges r;
    r.feature_max = {
        2.0,   // day_part
        63.0,  // lifetime ratings: three per day over three weeks
        7.0, 7.0, 7.0,
        3.0,   // sd of a 1..7 multiset is at most 3
        3.0, 3.0, 3.0,
        3.0, 3.0,
        1.0,
    };
    r.reward_cap = 2.0;
    return r;
}

void NormalizationRanges::validate() const {
    for (double m : feature_max)
        if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("normalization ranges must be positive and finite");
    if (!(reward_cap > 0.0) || !std::isfinite(reward_cap)) throw ConfigError("reward cap must be positive and finite");
}

namespace {

double unit(double v, double scale) { return std::clamp(v / scale, 0.0, 1.0); }

}  // namespace

DayTraceElement normalize(const TraceStep& step, const NormalizationRanges& ranges) {
    DayTraceElement e;
    const auto f = feature_values(step.state);
    for (std::size_t i = 0; i < f.size(); ++i) e.values[i] = unit(f[i], ranges.feature_max[i]);
    e.values[kFeatureCount] = unit(step.reward, ranges.reward_cap);
    return e;
}

std::vector<DayTraceElement> normalize(std::span<const TraceStep> steps, const NormalizationRanges& ranges) {
    std::vector<DayTraceElement> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(normalize(s, ranges));
    return out;
}

double euclidean(const DayTraceElement& a, const DayTraceElement& b) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        sq += d * d;
    }
    return std::sqrt(sq);
}

double dtw(std::span<const DayTraceElement> a, std::span<const DayTraceElement> b) {
    return dtw(a, b, [](const DayTraceElement& x, const DayTraceElement& y) { return euclidean(x, y); });
}

double user_distance(const Trace& u1, const Trace& u2, const NormalizationRanges& ranges) {
    static const std::vector<DayTraceElement> absent(1);
    std::set<int> days;
    for (const auto& [d, _] : u1.days) days.insert(d);
    for (const auto& [d, _] : u2.days) days.insert(d);

    auto day_sequence = [&](const Trace& t, int d) {
        auto it = t.days.find(d);
        if (it == t.days.end() || it->second.empty()) return absent;
        return normalize(it->second, ranges);
    };

    double total = 0.0;
    for (int d : days) {
        const auto a = day_sequence(u1, d);
        const auto b = day_sequence(u2, d);
        total += dtw(std::span<const DayTraceElement>(a), std::span<const DayTraceElement>(b));
    }
    return total;
}

bool DistanceMatrix::well_formed() const {
    for (std::size_t i = 0; i < n_; ++i) {
        if ((*this)(i, i) != 0.0) return false;
        for (std::size_t j = 0; j < n_; ++j) {
            const double v = (*this)(i, j);
            if (!(v >= 0.0) || v != (*this)(j, i)) return false;
        }
    }
    return true;
}

DistanceMatrix distance_matrix(std::size_t n, const std::function<double(std::size_t, std::size_t)>& pair_distance,
                               unsigned threads) {
    DistanceMatrix m(n);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n > 0 ? n - 1 : 0) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    std::vector<double> values(pairs.size());
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(pairs.size())));
    if (threads <= 1) {
        for (std::size_t p = 0; p < pairs.size(); ++p) values[p] = pair_distance(pairs[p].first, pairs[p].second);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t p = t; p < pairs.size(); p += threads)
                    values[p] = pair_distance(pairs[p].first, pairs[p].second);
            });
        }
        for (auto& th : pool) th.join();
    }
    for (std::size_t p = 0; p < pairs.size(); ++p) m.set(pairs[p].first, pairs[p].second, values[p]);
    return m;
}

DistanceMatrix distance_matrix(std::span<const Trace> traces, const NormalizationRanges& ranges, unsigned threads) {
    return distance_matrix(
        traces.size(), [&](std::size_t i, std::size_t j) { return user_distance(traces[i], traces[j], ranges); },
        threads);
}

namespace {

double total_cost(const DistanceMatrix& m, const std::vector<std::size_t>& medoids) {
    double cost = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (auto c : medoids) best = std::min(best, m(i, c));
        cost += best;
    }
    return cost;
}

}  // namespace

KMedoidsResult k_medoids(const DistanceMatrix& m, int k, std::uint64_t seed) {
    const std::size_t n = m.size();
    if (k < 1 || static_cast<std::size_t>(k) > n)
        throw std::invalid_argument("k_medoids: k must lie in [1, " + std::to_string(n) + "], got " + std::to_string(k));

    Rng rng(mix_seed(seed, 0x6b6d65646f6964ULL));
    std::vector<std::size_t> medoids{rng.uniform_index(n)};
    std::vector<bool> is_medoid(n, false);
    is_medoid[medoids[0]] = true;

    // BUILD
    while (medoids.size() < static_cast<std::size_t>(k)) {
        std::size_t best = n;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < n; ++c) {
            if (is_medoid[c]) continue;
            auto trial = medoids;
            trial.push_back(c);
            const double cost = total_cost(m, trial);
            if (cost < best_cost) {
                best_cost = cost;
                best = c;
            }
        }
        medoids.push_back(best);
        is_medoid[best] = true;
    }

    KMedoidsResult result;
    double current = total_cost(m, medoids);
    result.cost_history.push_back(current);

    // SWAP
    for (;;) {
        double best_cost = current;
        std::size_t best_pos = 0, best_candidate = n;
        for (std::size_t pos = 0; pos < medoids.size(); ++pos) {
            for (std::size_t c = 0; c < n; ++c) {
                if (is_medoid[c]) continue;
                auto trial = medoids;
                trial[pos] = c;
                const double cost = total_cost(m, trial);
                if (cost < best_cost - 1e-12 * std::max(1.0, std::abs(best_cost))) {
                    best_cost = cost;
                    best_pos = pos;
                    best_candidate = c;
                }
            }
        }
        if (best_candidate == n) break;
        is_medoid[medoids[best_pos]] = false;
        is_medoid[best_candidate] = true;
        medoids[best_pos] = best_candidate;
        current = best_cost;
        result.cost_history.push_back(current);
        ++result.swaps;
    }

    std::sort(medoids.begin(), medoids.end());
    result.medoids = medoids;
    result.assignment.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        for (std::size_t c = 1; c < medoids.size(); ++c)
            if (m(i, medoids[c]) < m(i, medoids[static_cast<std::size_t>(best)])) best = static_cast<int>(c);
        result.assignment[i] = best;
    }
    for (std::size_t c = 0; c < medoids.size(); ++c) result.assignment[medoids[c]] = static_cast<int>(c);
    result.total_cost = current;
    return result;
}

void ClusterModel::validate() const {
    if (k < 1) throw ContractViolation("cluster model needs k >= 1");
    if (medoid_users.size() != static_cast<std::size_t>(k) || medoid_traces.size() != static_cast<std::size_t>(k))
        throw ContractViolation("cluster model must hold k medoids and their traces");
    for (int c = 0; c < k; ++c) {
        auto it = assignment.find(medoid_users[static_cast<std::size_t>(c)]);
        if (it == assignment.end() || it->second != c) throw ContractViolation("medoid not assigned to its own cluster");
    }
    for (const auto& [_, c] : assignment)
        if (c < 0 || c >= k) throw ContractViolation("assignment outside cluster range");
}

std::string cluster_config_hash(int k, std::uint64_t seed, const NormalizationRanges& ranges) {
    std::uint64_t h = mix_seed(static_cast<std::uint64_t>(k), seed);
    for (double v : ranges.feature_max) h = mix_seed(h, static_cast<std::uint64_t>(std::llround(v * 1e6)));
    h = mix_seed(h, static_cast<std::uint64_t>(std::llround(ranges.reward_cap * 1e6)));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ClusterModel cluster_users(std::span<const Trace> traces, int k, std::uint64_t seed, const NormalizationRanges& ranges) {
    ranges.validate();
    if (k < 1 || static_cast<std::size_t>(k) > traces.size())
        throw std::invalid_argument("cluster_users: " + std::to_string(traces.size()) + " users cannot form " +
                                    std::to_string(k) + " clusters");
    const auto matrix = distance_matrix(traces, ranges, std::max(1u, std::thread::hardware_concurrency()));
    const auto km = k_medoids(matrix, k, seed);

    ClusterModel model;
    model.k = k;
    model.seed = seed;
    model.ranges = ranges;
    model.total_cost = km.total_cost;
    model.config_hash = cluster_config_hash(k, seed, ranges);
    for (auto idx : km.medoids) {
        model.medoid_users.push_back(traces[idx].user_id);
        model.medoid_traces.push_back(traces[idx]);
    }
    for (std::size_t i = 0; i < traces.size(); ++i) model.assignment[traces[i].user_id] = km.assignment[i];
    return model;
}

int assign_user(const Trace& t, const ClusterModel& model) {
    if (model.medoid_traces.empty()) throw ContractViolation("assign_user: empty cluster model");
    int best = 0;
    double best_d = user_distance(t, model.medoid_traces[0], model.ranges);
    for (std::size_t c = 1; c < model.medoid_traces.size(); ++c) {
        const double d = user_distance(t, model.medoid_traces[c], model.ranges);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

}  // namespace phrl
