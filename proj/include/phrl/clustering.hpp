#pragma once

// Grouping users by behaviour: dynamic time warping between per-day
// state/reward traces, a pairwise distance matrix, PAM k-medoids and
// nearest-medoid assignment for users that join later.

#include "phrl/mdp.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace phrl {

class EmptySequence : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr int kTraceElementSize = kFeatureCount + 1;

/// Fixed per-feature scales that map trace entries into [0, 1] (values are
/// clamped). Fixed rather than data-driven so distances stay comparable
/// between batches.
struct NormalizationRanges {
    std::array<double, kFeatureCount> feature_max{};
    double reward_cap = 2.0;

    static NormalizationRanges defaults();
    void validate() const;

    bool operator==(const NormalizationRanges&) const = default;
};

/// Normalized features followed by the normalized reward.
struct DayTraceElement {
    std::array<double, kTraceElementSize> values{};

    bool operator==(const DayTraceElement&) const = default;
};

DayTraceElement normalize(const TraceStep& step, const NormalizationRanges& ranges);
std::vector<DayTraceElement> normalize(std::span<const TraceStep> steps, const NormalizationRanges& ranges);

double euclidean(const DayTraceElement& a, const DayTraceElement& b);

/// Classic O(|a||b|) warping cost with an arbitrary local distance.
template <typename T, typename Distance>
double dtw(std::span<const T> a, std::span<const T> b, Distance&& local) {
    if (a.empty() || b.empty()) throw EmptySequence("dtw: both sequences must be nonempty");
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = inf;
        for (std::size_t j = 1; j <= m; ++j) {
            const double best = std::min({prev[j], cur[j - 1], prev[j - 1]});
            cur[j] = local(a[i - 1], b[j - 1]) + best;
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

double dtw(std::span<const DayTraceElement> a, std::span<const DayTraceElement> b);

/// Sum over the union of both users' days of the per-day dtw cost. A day
/// present for only one user is compared against a single all-zero element.
double user_distance(const Trace& u1, const Trace& u2,
                     const NormalizationRanges& ranges = NormalizationRanges::defaults());

class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        d_[i * n_ + j] = v;
        d_[j * n_ + i] = v;
    }

    /// True when symmetric, nonnegative and zero on the diagonal.
    bool well_formed() const;

private:
    std::size_t n_ = 0;
    std::vector<double> d_;
};

/// Fills the upper triangle by calling `pair_distance(i, j)` once per pair i < j.
DistanceMatrix distance_matrix(std::size_t n, const std::function<double(std::size_t, std::size_t)>& pair_distance,
                               unsigned threads = 1);
DistanceMatrix distance_matrix(std::span<const Trace> traces,
                               const NormalizationRanges& ranges = NormalizationRanges::defaults(),
                               unsigned threads = 1);

struct KMedoidsResult {
    /// Row indices of the medoids, ascending; position = cluster id.
    std::vector<std::size_t> medoids;
    /// Row index -> cluster id.
    std::vector<int> assignment;
    double total_cost = 0.0;
    /// Total cost after initialization and after every accepted swap.
    std::vector<double> cost_history;
    int swaps = 0;
};

/// PAM: the seed picks the first medoid, greedy BUILD adds the rest, then the
/// best improving swap is applied until none improves the total cost.
KMedoidsResult k_medoids(const DistanceMatrix& m, int k, std::uint64_t seed);

struct ClusterModel {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<UserId> medoid_users;
    std::vector<Trace> medoid_traces;
    std::map<UserId, int> assignment;
    double total_cost = 0.0;
    NormalizationRanges ranges = NormalizationRanges::defaults();
    std::string config_hash;

    /// Throws ContractViolation if the model is structurally inconsistent.
    void validate() const;

    bool operator==(const ClusterModel&) const = default;
};

std::string cluster_config_hash(int k, std::uint64_t seed, const NormalizationRanges& ranges);

/// Distance matrix + k_medoids over the given traces.
ClusterModel cluster_users(std::span<const Trace> traces, int k, std::uint64_t seed,
                           const NormalizationRanges& ranges = NormalizationRanges::defaults());

/// Nearest medoid by user_distance; the lowest cluster id wins ties.
int assign_user(const Trace& t, const ClusterModel& model);

}  // namespace phrl
