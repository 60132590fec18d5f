#pragma once

// Batch policy learning over the binned exact basis: LSTDQ weight solves, the
// LSPI outer loop, Q evaluation and greedy / epsilon-greedy action selection.

#include "phrl/mdp.hpp"
#include "phrl/random.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace phrl {

struct QWeights {
    std::vector<double> w;

    static QWeights zeros(std::size_t dimension = kBasisDimension) { return QWeights{std::vector<double>(dimension, 0.0)}; }

    std::size_t dimension() const { return w.size(); }
    bool all_finite() const;

    bool operator==(const QWeights&) const = default;
};

/// Max-norm distance; dimensions must agree.
double max_abs_difference(const QWeights& a, const QWeights& b);

enum class TieBreak : std::uint8_t { first_wins };

struct SolverConfig {
    double gamma = 0.95;
    double epsilon = 0.1;
    int max_iterations = 25;
    double stop_epsilon = 1e-5;
    /// Added to the diagonal of the LSTDQ matrix; unobserved (bin, action)
    /// cells otherwise leave it singular.
    double ridge = 1e-6;
    TieBreak tie_break = TieBreak::first_wins;

    void validate() const;

    bool operator==(const SolverConfig&) const = default;
};

/// How much data a policy was trained on.
struct TrainingWatermark {
    int as_of_day = -1;
    std::size_t experiences = 0;

    bool operator==(const TrainingWatermark&) const = default;
};

struct Policy {
    QWeights weights = QWeights::zeros();
    SolverConfig config;
    BinningScheme scheme = BinningScheme::defaults();
    std::uint64_t version = 0;
    std::optional<std::string> cluster_id;
    bool converged = false;
    int iterations = 0;
    TrainingWatermark watermark;
    /// Max-norm weight change of each LSPI iteration.
    std::vector<double> delta_history;

    bool operator==(const Policy&) const = default;
};

class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, double rcond, std::size_t dimension, std::size_t samples)
        : std::runtime_error(what), rcond_(rcond), dimension_(dimension), samples_(samples) {}

    /// Reciprocal condition estimate of the regularized system.
    double rcond() const { return rcond_; }
    std::size_t dimension() const { return dimension_; }
    std::size_t samples() const { return samples_; }

private:
    double rcond_;
    std::size_t dimension_;
    std::size_t samples_;
};

double q_value(const QWeights& weights, const StateVector& s, Action a, const BinningScheme& scheme);
std::array<double, kActions> q_values(const Policy& p, const StateVector& s);

/// argmax with the lowest action id winning exact ties.
Action argmax_first_wins(const std::array<double, kActions>& q);
Action greedy_action(const Policy& p, const StateVector& s);

struct ExplorationDraw {
    Action action = Action::none;
    bool explored = false;
};

/// With probability epsilon an action uniform over all four, else greedy.
/// Always consumes one uniform draw, plus one index draw when exploring.
ExplorationDraw epsilon_greedy_draw(const Policy& p, const StateVector& s, Rng& rng);
Action epsilon_greedy(const Policy& p, const StateVector& s, Rng& rng);

/// Solves (A + ridge I) w = b with
///   A = sum phi(s,a) (phi(s,a) - gamma phi(s', pi(s')))^T,  b = sum phi(s,a) r
/// where pi is the greedy policy of `target`.
QWeights lstdq(const Dataset& data, const Policy& target, const SolverConfig& cfg);

/// Iterates lstdq from `init` until the max-norm weight change drops below
/// stop_epsilon or max_iterations is reached. The result carries
/// version = previous_version + 1.
Policy lspi(const Dataset& data, const SolverConfig& cfg, const BinningScheme& scheme, const QWeights& init,
            std::uint64_t previous_version = 0);

}  // namespace phrl
