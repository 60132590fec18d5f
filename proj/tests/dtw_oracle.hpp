#pragma once

// Test-only reference for dynamic time warping: enumerates every monotone
// alignment path explicitly instead of using the dynamic program. Also the
// labelled synthetic traces that clustering must recover.

#include "phrl/clustering.hpp"
#include "phrl/random.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

namespace phrl::testing {

template <typename T, typename Distance>
double brute_force_alignment_cost(const std::vector<T>& a, const std::vector<T>& b, Distance local) {
    double best = std::numeric_limits<double>::infinity();
    // depth-first over every path from (0,0) to (n-1,m-1)
    std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
        acc += local(a[i], b[j]);
        if (i + 1 == a.size() && j + 1 == b.size()) {
            best = std::min(best, acc);
            return;
        }
        if (i + 1 < a.size()) walk(i + 1, j, acc);
        if (j + 1 < b.size()) walk(i, j + 1, acc);
        if (i + 1 < a.size() && j + 1 < b.size()) walk(i + 1, j + 1, acc);
    };
    walk(0, 0, 0.0);
    return best;
}

inline std::vector<DayTraceElement> random_elements(Rng& rng, std::size_t len, bool sparse = false) {
    std::vector<DayTraceElement> out(len);
    for (auto& e : out)
        for (auto& v : e.values) v = sparse ? (rng.bernoulli(0.3) ? rng.uniform01() : 0.0) : rng.uniform01();
    return out;
}

/// Rand index between two labelings of the same items.
inline double rand_index(const std::vector<int>& x, const std::vector<int>& y) {
    std::size_t agree = 0, total = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            agree += ((x[i] == x[j]) == (y[i] == y[j])) ? 1 : 0;
            ++total;
        }
    }
    return total == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(total);
}

/// A week of per-daypart states; responders rate and read, dormant users do not.
inline Trace synthetic_trace(const std::string& id, bool responder, Rng& rng, int days = 7) {
    Trace t;
    t.user_id = id;
    int lifetime = 0;
    for (int d = 0; d < days; ++d) {
        int ratings = 0, received = 0, read = 0;
        for (auto p : kAllDayParts) {
            StateVector s;
            s.day_part = p;
            s.number_rating = lifetime;
            s.number_medium_rating = ratings;
            if (ratings > 0) {
                s.highest_rating = s.lowest_rating = 4;
                s.median_rating = 4;
            }
            s.number_message_received = received;
            s.number_message_read = read;
            s.read_all_message = (received > 0 && read == received) ? 1 : 0;
            const bool sent = rng.bernoulli(0.75);
            received += sent;
            const bool rated = responder ? rng.bernoulli(0.85) : rng.bernoulli(0.03);
            const bool opened = sent && (responder ? rng.bernoulli(0.9) : rng.bernoulli(0.02));
            read += opened;
            ratings += rated;
            lifetime += rated;
            const double reward = 0.5 * (received ? static_cast<double>(read) / received : 0.0) + 0.5 * ratings;
            t.days[d].push_back({s, reward});
        }
    }
    return t;
}


}  // namespace phrl::testing
