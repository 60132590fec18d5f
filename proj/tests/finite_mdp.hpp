#pragma once

// Test-only tabular MDP oracle: random deterministic finite MDPs whose states
// are encoded as distinct, linearly independent one-hot basis patterns, plus
// tabular policy evaluation and policy iteration that never touch the basis.

#include "phrl/lspi.hpp"
#include "phrl/random.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <vector>

namespace phrl::testing {

struct FiniteMdp {
    int n = 0;
    std::vector<StateVector> encoding;
    std::vector<std::array<int, kActions>> next;
    std::vector<std::array<double, kActions>> reward;
};

using TabularQ = std::vector<std::array<double, kActions>>;
using TabularPolicy = std::vector<int>;

inline StateVector random_state(Rng& rng) {
    StateVector s;
    s.day_part = static_cast<DayPart>(rng.uniform_index(3));
    const int today = static_cast<int>(rng.uniform_index(4));
    std::vector<int> ratings;
    for (int i = 0; i < today; ++i) ratings.push_back(1 + static_cast<int>(rng.uniform_index(7)));
    std::sort(ratings.begin(), ratings.end());
    s.number_rating = today + static_cast<int>(rng.uniform_index(30));
    for (int r : ratings) {
        if (r <= 2) ++s.number_low_rating;
        else if (r <= 5) ++s.number_medium_rating;
        else ++s.number_high_rating;
    }
    if (today > 0) {
        s.lowest_rating = ratings.front();
        s.highest_rating = ratings.back();
        s.median_rating = today % 2 ? ratings[static_cast<std::size_t>(today / 2)]
                                    : 0.5 * (ratings[static_cast<std::size_t>(today / 2 - 1)] +
                                             ratings[static_cast<std::size_t>(today / 2)]);
        double mean = 0.0;
        for (int r : ratings) mean += r;
        mean /= today;
        double var = 0.0;
        for (int r : ratings) var += (r - mean) * (r - mean);
        s.sd_rating = std::sqrt(var / today);
    }
    s.number_message_received = static_cast<int>(rng.uniform_index(4));
    s.number_message_read = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(s.number_message_received) + 1));
    s.read_all_message = (s.number_message_received > 0 && s.number_message_read == s.number_message_received) ? 1 : 0;
    s.validate();
    return s;
}

/// Rank of the state-pattern matrix (rows = the 48-slot action-free encodings).
inline int encoding_rank(const std::vector<StateVector>& states, const BinningScheme& scheme) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(states.size()), kFeatureBlock);
    for (std::size_t i = 0; i < states.size(); ++i)
        for (int j : active_indices(states[i], Action::none, scheme)) m(static_cast<Eigen::Index>(i), j) = 1.0;
    return static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(m).rank());
}

inline FiniteMdp random_mdp(int n, std::uint64_t seed, const BinningScheme& scheme = BinningScheme::defaults()) {
    Rng rng(seed);
    FiniteMdp m;
    m.n = n;
    while (static_cast<int>(m.encoding.size()) < n) {
        auto s = random_state(rng);
        auto trial = m.encoding;
        trial.push_back(s);
        if (encoding_rank(trial, scheme) == static_cast<int>(trial.size())) m.encoding = std::move(trial);
    }
    m.next.resize(static_cast<std::size_t>(n));
    m.reward.resize(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < kActions; ++a) {
            m.next[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n)));
            m.reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = std::round(rng.uniform01() * 2000.0) / 1000.0;
        }
    }
    return m;
}

/// One experience per (state, action), each replicated `copies` times.
inline Dataset mdp_dataset(const FiniteMdp& m, int copies = 1) {
    Dataset d;
    for (int c = 0; c < copies; ++c) {
        for (int s = 0; s < m.n; ++s) {
            for (int a = 0; a < kActions; ++a) {
                Experience e;
                e.user_id = "mdp";
                e.s = m.encoding[static_cast<std::size_t>(s)];
                e.a = static_cast<Action>(a);
                e.r = m.reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
                e.s_prime = m.encoding[static_cast<std::size_t>(m.next[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)])];
                d.append(e);
            }
        }
    }
    return d;
}

/// Iterative tabular evaluation of a deterministic policy.
inline TabularQ evaluate_tabular(const FiniteMdp& m, const TabularPolicy& pi, double gamma) {
    TabularQ q(static_cast<std::size_t>(m.n), std::array<double, kActions>{});
    for (int it = 0; it < 20000; ++it) {
        TabularQ nq = q;
        double change = 0.0;
        for (int s = 0; s < m.n; ++s) {
            for (int a = 0; a < kActions; ++a) {
                const int sn = m.next[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
                const double v = m.reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] +
                                 gamma * q[static_cast<std::size_t>(sn)][static_cast<std::size_t>(pi[static_cast<std::size_t>(sn)])];
                change = std::max(change, std::abs(v - q[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]));
                nq[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = v;
            }
        }
        q = std::move(nq);
        if (change < 1e-14) break;
    }
    return q;
}

inline TabularPolicy greedy_tabular(const TabularQ& q) {
    TabularPolicy pi(q.size());
    for (std::size_t s = 0; s < q.size(); ++s) {
        int best = 0;
        for (int a = 1; a < kActions; ++a)
            if (q[s][static_cast<std::size_t>(a)] > q[s][static_cast<std::size_t>(best)]) best = a;
        pi[s] = best;
    }
    return pi;
}

/// Exact policy iteration from the all-zero-Q greedy policy (action 0 everywhere).
inline TabularPolicy optimal_policy(const FiniteMdp& m, double gamma) {
    TabularPolicy pi(static_cast<std::size_t>(m.n), 0);
    for (int it = 0; it < 1000; ++it) {
        const auto q = evaluate_tabular(m, pi, gamma);
        const auto next = greedy_tabular(q);
        if (next == pi) break;
        pi = next;
    }
    return pi;
}

/// Optimal Q by value iteration; used to check the policy-iteration oracle.
inline TabularQ optimal_q_value_iteration(const FiniteMdp& m, double gamma) {
    TabularQ q(static_cast<std::size_t>(m.n), std::array<double, kActions>{});
    for (int it = 0; it < 20000; ++it) {
        double change = 0.0;
        TabularQ nq = q;
        for (int s = 0; s < m.n; ++s) {
            for (int a = 0; a < kActions; ++a) {
                const auto& qn = q[static_cast<std::size_t>(m.next[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)])];
                const double v = m.reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] +
                                 gamma * *std::max_element(qn.begin(), qn.end());
                change = std::max(change, std::abs(v - q[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]));
                nq[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = v;
            }
        }
        q = std::move(nq);
        if (change < 1e-14) break;
    }
    return q;
}

}  // namespace phrl::testing
