#include "phrl/lspi.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace phrl {

bool QWeights::all_finite() const {
    return std::all_of(w.begin(), w.end(), [](double x) { return std::isfinite(x); });
}

double max_abs_difference(const QWeights& a, const QWeights& b) {
    if (a.dimension() != b.dimension()) throw ContractViolation("weight dimension mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.w.size(); ++i) m = std::max(m, std::abs(a.w[i] - b.w[i]));
    return m;
}

void SolverConfig::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    if (max_iterations < 1) throw ConfigError("max_iterations must be positive");
    if (!(stop_epsilon > 0.0)) throw ConfigError("stop_epsilon must be positive");
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw ConfigError("ridge must be finite and nonnegative");
}

double q_value(const QWeights& weights, const StateVector& s, Action a, const BinningScheme& scheme) {
    if (weights.dimension() != static_cast<std::size_t>(kBasisDimension))
        throw ContractViolation("weights have dimension " + std::to_string(weights.dimension()) + ", basis has " +
                                std::to_string(kBasisDimension));
    double q = 0.0;
    for (int i : active_indices(s, a, scheme)) q += weights.w[static_cast<std::size_t>(i)];
    return q;
}

std::array<double, kActions> q_values(const Policy& p, const StateVector& s) {
    std::array<double, kActions> q{};
    for (auto a : kAllActions) q[static_cast<std::size_t>(code(a))] = q_value(p.weights, s, a, p.scheme);
    return q;
}

Action argmax_first_wins(const std::array<double, kActions>& q) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < q.size(); ++i)
        if (q[i] > q[best]) best = i;
    return static_cast<Action>(best);
}

Action greedy_action(const Policy& p, const StateVector& s) { return argmax_first_wins(q_values(p, s)); }

ExplorationDraw epsilon_greedy_draw(const Policy& p, const StateVector& s, Rng& rng) {
    if (rng.uniform01() < p.config.epsilon)
        return {static_cast<Action>(rng.uniform_index(kActions)), true};
    return {greedy_action(p, s), false};
}

Action epsilon_greedy(const Policy& p, const StateVector& s, Rng& rng) { return epsilon_greedy_draw(p, s, rng).action; }

QWeights lstdq(const Dataset& data, const Policy& target, const SolverConfig& cfg) {
    cfg.validate();
    if (data.empty()) throw SolverFailure("lstdq: empty dataset", 0.0, kBasisDimension, 0);
    if (target.weights.dimension() != static_cast<std::size_t>(kBasisDimension))
        throw ContractViolation("target policy weights do not match the basis dimension");

    const int n = kBasisDimension;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);

    // phi entries are 0/1 with exactly twelve ones, so the outer products
    // reduce to index updates.
    for (const auto& e : data.experiences()) {
        if (!std::isfinite(e.r)) throw ContractViolation("experience reward is not finite");
        const auto here = active_indices(e.s, e.a, target.scheme);
        const auto next = active_indices(e.s_prime, greedy_action(target, e.s_prime), target.scheme);
        for (int i : here) {
            for (int j : here) A(i, j) += 1.0;
            for (int j : next) A(i, j) -= cfg.gamma;
            b(i) += e.r;
        }
    }
    A.diagonal().array() += cfg.ridge;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    double rcond = lu.rcond();
    if (std::isnan(rcond)) rcond = 0.0;
    if (!(rcond >= std::numeric_limits<double>::epsilon())) {
        throw SolverFailure("lstdq: system is singular (rcond " + std::to_string(rcond) + ", ridge " +
                                std::to_string(cfg.ridge) + ", " + std::to_string(data.size()) + " samples)",
                            rcond, static_cast<std::size_t>(n), data.size());
    }
    const Eigen::VectorXd w = lu.solve(b);

    QWeights out{std::vector<double>(w.data(), w.data() + w.size())};
    if (!out.all_finite())
        throw SolverFailure("lstdq: solution is not finite", rcond, static_cast<std::size_t>(n), data.size());
    return out;
}

Policy lspi(const Dataset& data, const SolverConfig& cfg, const BinningScheme& scheme, const QWeights& init,
            std::uint64_t previous_version) {
    cfg.validate();
    scheme.validate();
    if (data.empty()) throw SolverFailure("lspi: empty dataset", 0.0, kBasisDimension, 0);
    if (init.dimension() != static_cast<std::size_t>(kBasisDimension))
        throw ContractViolation("initial weights do not match the basis dimension");

    Policy current;
    current.weights = init;
    current.config = cfg;
    current.scheme = scheme;

    for (int k = 1; k <= cfg.max_iterations; ++k) {
        QWeights next = lstdq(data, current, cfg);
        const double delta = max_abs_difference(next, current.weights);
        current.weights = std::move(next);
        current.iterations = k;
        current.delta_history.push_back(delta);
        if (delta < cfg.stop_epsilon) {
            current.converged = true;
            break;
        }
    }
    current.version = previous_version + 1;
    current.watermark.experiences = data.size();
    return current;
}

}  // namespace phrl
