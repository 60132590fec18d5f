#include "phrl/mdp.hpp"

#include <algorithm>
#include <cmath>

namespace phrl {

DayPart day_part_from_code(int c) {
    if (c < 0 || c >= kDayParts) throw ContractViolation("day part code out of range: " + std::to_string(c));
    return static_cast<DayPart>(c);
}

std::string_view to_string(DayPart p) {
    switch (p) {
        case DayPart::morning: return "morning";
        case DayPart::afternoon: return "afternoon";
        case DayPart::evening: return "evening";
    }
    return "?";
}

Action action_from_code(int c) {
    if (c < 0 || c >= kActions) throw ContractViolation("action id out of range: " + std::to_string(c));
    return static_cast<Action>(c);
}

std::string_view to_string(Action a) {
    switch (a) {
        case Action::none: return "none";
        case Action::encouraging: return "encouraging";
        case Action::informing: return "informing";
        case Action::affirming: return "affirming";
    }
    return "?";
}

std::string_view feature_name(Feature f) {
    static constexpr std::array<std::string_view, kFeatureCount> names{
        "day_part",
        "number_rating",
        "highest_rating",
        "lowest_rating",
        "median_rating",
        "sd_rating",
        "number_low_rating",
        "number_medium_rating",
        "number_high_rating",
        "number_message_received",
        "number_message_read",
        "read_all_message",
    };
    return names[static_cast<std::size_t>(f)];
}

std::array<double, kFeatureCount> feature_values(const StateVector& s) {
    return {
        static_cast<double>(code(s.day_part)),
        static_cast<double>(s.number_rating),
        static_cast<double>(s.highest_rating),
        static_cast<double>(s.lowest_rating),
        s.median_rating,
        s.sd_rating,
        static_cast<double>(s.number_low_rating),
        static_cast<double>(s.number_medium_rating),
        static_cast<double>(s.number_high_rating),
        static_cast<double>(s.number_message_received),
        static_cast<double>(s.number_message_read),
        static_cast<double>(s.read_all_message),
    };
}

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw ContractViolation(std::string("state invariant violated: ") + what);
}

}  // namespace

void StateVector::validate() const {
    require(code(day_part) >= 0 && code(day_part) < kDayParts, "day_part in {0,1,2}");
    require(number_rating >= 0 && number_low_rating >= 0 && number_medium_rating >= 0 && number_high_rating >= 0,
            "rating counts nonnegative");
    require(number_message_received >= 0 && number_message_read >= 0, "message counts nonnegative");
    require(ratings_today() <= number_rating, "ratings today <= lifetime ratings");
    require(number_message_read <= number_message_received, "read <= received");
    require(read_all_message == ((number_message_received > 0 && number_message_read == number_message_received) ? 1 : 0),
            "read_all_message iff all received messages read");
    require(std::isfinite(median_rating) && std::isfinite(sd_rating) && sd_rating >= 0.0, "finite statistics");
    if (ratings_today() == 0) {
        require(highest_rating == 0 && lowest_rating == 0 && median_rating == 0.0 && sd_rating == 0.0,
                "empty-day statistics are zero");
    } else {
        require(lowest_rating >= 1 && highest_rating <= 7, "ratings on the 1..7 scale");
        require(lowest_rating <= median_rating && median_rating <= highest_rating, "lowest <= median <= highest");
    }
}

void Trace::validate() const {
    for (const auto& [day, steps] : days) {
        if (day < 0) throw ContractViolation("trace day index negative");
        if (steps.size() > static_cast<std::size_t>(kDayParts)) throw ContractViolation("trace day holds more than 3 steps");
        for (std::size_t i = 1; i < steps.size(); ++i) {
            if (code(steps[i - 1].state.day_part) >= code(steps[i].state.day_part))
                throw ContractViolation("trace steps out of day-part order");
        }
    }
}

void Dataset::append(Experience e) {
    by_user_[e.user_id].push_back(experiences_.size());
    experiences_.push_back(std::move(e));
}

void Dataset::append(const Dataset& other) {
    for (const auto& e : other.experiences()) append(e);
}

std::span<const std::size_t> Dataset::indices_of(const UserId& user) const {
    auto it = by_user_.find(user);
    if (it == by_user_.end()) return {};
    return it->second;
}

std::vector<UserId> Dataset::users() const {
    std::vector<UserId> out;
    out.reserve(by_user_.size());
    for (const auto& [u, _] : by_user_) out.push_back(u);
    return out;
}

Dataset Dataset::filter_users(std::span<const UserId> users) const {
    std::vector<std::size_t> idx;
    for (const auto& u : users) {
        auto s = indices_of(u);
        idx.insert(idx.end(), s.begin(), s.end());
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    Dataset out;
    for (auto i : idx) out.append(experiences_[i]);
    return out;
}

std::vector<Trace> Dataset::traces() const {
    std::vector<Trace> out;
    for (const auto& [user, idx] : by_user_) {
        Trace t;
        t.user_id = user;
        for (auto i : idx) {
            const auto& e = experiences_[i];
            t.days[e.day_index].push_back(TraceStep{e.s, e.r});
        }
        for (auto& [_, steps] : t.days) {
            std::stable_sort(steps.begin(), steps.end(), [](const TraceStep& a, const TraceStep& b) {
                return code(a.state.day_part) < code(b.state.day_part);
            });
        }
        out.push_back(std::move(t));
    }
    return out;
}

BinningScheme BinningScheme::defaults() {
    BinningScheme s;
    auto set = [&](Feature f, FeatureKind kind, std::array<double, 3> cuts) {
        s.features[static_cast<std::size_t>(f)] = FeatureBinning{kind, cuts};
    };
    set(Feature::day_part, FeatureKind::categorical, {1, 2, 3});
    set(Feature::number_rating, FeatureKind::continuous, {1, 2, 3});
    set(Feature::highest_rating, FeatureKind::continuous, {2, 4, 6});
    set(Feature::lowest_rating, FeatureKind::continuous, {2, 4, 6});
    set(Feature::median_rating, FeatureKind::continuous, {2, 4, 6});
    set(Feature::sd_rating, FeatureKind::continuous, {0.5, 1.0, 2.0});
    set(Feature::number_low_rating, FeatureKind::continuous, {1, 2, 3});
    set(Feature::number_medium_rating, FeatureKind::continuous, {1, 2, 3});
    set(Feature::number_high_rating, FeatureKind::continuous, {1, 2, 3});
    set(Feature::number_message_received, FeatureKind::continuous, {1, 2, 3});
    set(Feature::number_message_read, FeatureKind::continuous, {1, 2, 3});
    set(Feature::read_all_message, FeatureKind::categorical, {1, 2, 3});
    return s;
}

void BinningScheme::validate() const {
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto& fb = features[i];
        if (fb.kind == FeatureKind::categorical) continue;
        const auto& c = fb.cuts;
        if (!(std::isfinite(c[0]) && std::isfinite(c[1]) && std::isfinite(c[2]) && c[0] < c[1] && c[1] < c[2]))
            throw ConfigError("bin cuts for " + std::string(feature_name(static_cast<Feature>(i))) +
                              " must be finite and strictly increasing");
    }
}

int bin_index(double value, const std::array<double, 3>& cuts) {
    if (!(cuts[0] < cuts[1] && cuts[1] < cuts[2])) throw ConfigError("bin cuts must be strictly increasing");
    int n = 0;
    for (double c : cuts) n += (c <= value) ? 1 : 0;
    return n;
}

int BinningScheme::bin(Feature f, double value) const {
    const auto& fb = features[static_cast<std::size_t>(f)];
    if (fb.kind == FeatureKind::categorical) {
        const auto c = static_cast<int>(value);
        if (c < 0 || c >= kBinsPerFeature || static_cast<double>(c) != value)
            throw ContractViolation("categorical feature " + std::string(feature_name(f)) + " has code outside 0..3");
        return c;
    }
    return bin_index(value, fb.cuts);
}

std::array<int, kFeatureCount> active_indices(const StateVector& s, Action a, const BinningScheme& scheme) {
    const auto values = feature_values(s);
    std::array<int, kFeatureCount> idx{};
    const int base = action_offset(a);
    for (int f = 0; f < kFeatureCount; ++f) {
        const auto feat = static_cast<Feature>(f);
        idx[static_cast<std::size_t>(f)] = base + feature_offset(feat) + scheme.bin(feat, values[static_cast<std::size_t>(f)]);
    }
    return idx;
}

std::vector<double> basis(const StateVector& s, Action a, const BinningScheme& scheme) {
    std::vector<double> phi(kBasisDimension, 0.0);
    for (int i : active_indices(s, a, scheme)) phi[static_cast<std::size_t>(i)] = 1.0;
    return phi;
}

}  // namespace phrl
