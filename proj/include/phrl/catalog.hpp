#pragma once

// Motivational message corpus, mood routing and same-day no-repeat selection.

#include "phrl/mdp.hpp"
#include "phrl/random.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace phrl {

enum class Category : std::uint8_t { encouraging, informing, affirming };
enum class MoodBucket : std::uint8_t { positive_neutral, negative_neutral, mood_unavailable, any };

std::string_view to_string(Category c);
std::string_view to_string(MoodBucket b);
std::optional<Category> category_from_string(std::string_view s);
std::optional<MoodBucket> mood_bucket_from_string(std::string_view s);

/// Message category an action sends; none for Action::none.
std::optional<Category> category_of(Action a);

struct MessageEntry {
    std::string id;
    Category category = Category::informing;
    MoodBucket bucket = MoodBucket::any;
    std::string text;

    bool operator==(const MessageEntry&) const = default;
};

enum class MoodSource : std::uint8_t { latest, median };

struct MoodConfig {
    /// Ratings at or above this are positive.
    int positive_threshold = 5;
    MoodSource source = MoodSource::latest;

    void validate() const;
};

/// No ratings today gives mood_unavailable. With MoodSource::latest the
/// caller supplies today's most recent rating, which the state does not hold.
MoodBucket mood_bucket(const StateVector& s, std::optional<int> latest_rating, const MoodConfig& cfg = {});

enum class SelectionStatus : std::uint8_t { selected, no_message, exhausted };

struct Selection {
    SelectionStatus status = SelectionStatus::no_message;
    std::optional<MessageEntry> message;
};

class MessageCatalog {
public:
    /// Throws ConfigError on malformed or inconsistent records.
    static MessageCatalog from_json(const std::string& text);
    static MessageCatalog load(const std::filesystem::path& path);
    /// The corpus compiled into the library.
    static MessageCatalog builtin();

    const std::vector<MessageEntry>& entries() const { return entries_; }
    const MessageEntry* find(const std::string& id) const;
    std::size_t count(Category c, MoodBucket b) const;

    /// Entries of the action's category in `bucket` or `any`, minus anything
    /// whose id or text was already sent today; repeated texts appear once.
    std::vector<const MessageEntry*> eligible(Action a, MoodBucket bucket, const std::set<std::string>& sent_today) const;

    /// Uniform draw over eligible(); one rng draw when something is eligible.
    Selection select(Action a, MoodBucket bucket, const std::set<std::string>& sent_today, Rng& rng) const;

private:
    std::vector<MessageEntry> entries_;
};

}  // namespace phrl
