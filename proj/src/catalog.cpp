#include "phrl/catalog.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <sstream>

namespace phrl {

extern const char* const kBuiltinMessagesJson;

std::string_view to_string(Category c) {
    switch (c) {
        case Category::encouraging: return "encouraging";
        case Category::informing: return "informing";
        case Category::affirming: return "affirming";
    }
    return "?";
}

std::string_view to_string(MoodBucket b) {
    switch (b) {
        case MoodBucket::positive_neutral: return "positive_neutral";
        case MoodBucket::negative_neutral: return "negative_neutral";
        case MoodBucket::mood_unavailable: return "mood_unavailable";
        case MoodBucket::any: return "any";
    }
    return "?";
}

std::optional<Category> category_from_string(std::string_view s) {
    for (auto c : {Category::encouraging, Category::informing, Category::affirming})
        if (to_string(c) == s) return c;
    return std::nullopt;
}

std::optional<MoodBucket> mood_bucket_from_string(std::string_view s) {
    for (auto b : {MoodBucket::positive_neutral, MoodBucket::negative_neutral, MoodBucket::mood_unavailable,
                   MoodBucket::any})
        if (to_string(b) == s) return b;
    return std::nullopt;
}

std::optional<Category> category_of(Action a) {
    switch (a) {
        case Action::none: return std::nullopt;
        case Action::encouraging: return Category::encouraging;
        case Action::informing: return Category::informing;
        case Action::affirming: return Category::affirming;
    }
    return std::nullopt;
}

void MoodConfig::validate() const {
    if (positive_threshold < 2 || positive_threshold > 7) throw ConfigError("positive_threshold must lie in 2..7");
}

MoodBucket mood_bucket(const StateVector& s, std::optional<int> latest_rating, const MoodConfig& cfg) {
    if (s.ratings_today() == 0) return MoodBucket::mood_unavailable;
    double mood = s.median_rating;
    if (cfg.source == MoodSource::latest) {
        if (!latest_rating) throw ContractViolation("mood_bucket: latest rating required when ratings exist today");
        mood = *latest_rating;
    }
    return mood >= cfg.positive_threshold ? MoodBucket::positive_neutral : MoodBucket::negative_neutral;
}

MessageCatalog MessageCatalog::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("message catalog: ") + e.what());
    }
    if (!doc.is_array()) throw ConfigError("message catalog: expected an array of records");

    MessageCatalog cat;
    std::set<std::string> ids;
    for (const auto& rec : doc) {
        auto str = [&](const char* key) {
            if (!rec.is_object() || !rec.contains(key) || !rec[key].is_string())
                throw ConfigError(std::string("message catalog: record lacks string field '") + key + "'");
            return rec[key].get<std::string>();
        };
        MessageEntry e;
        e.id = str("id");
        e.text = str("text");
        const auto category = category_from_string(str("category"));
        const auto bucket = mood_bucket_from_string(str("bucket"));
        if (!category || !bucket) throw ConfigError("message catalog: unknown category or bucket in " + e.id);
        e.category = *category;
        e.bucket = *bucket;
        if (e.id.empty() || e.text.empty()) throw ConfigError("message catalog: empty id or text");
        if (!ids.insert(e.id).second) throw ConfigError("message catalog: duplicate id " + e.id);
        if ((e.category == Category::informing) != (e.bucket == MoodBucket::any))
            throw ConfigError("message catalog: informing messages, and only those, use bucket 'any' (" + e.id + ")");
        cat.entries_.push_back(std::move(e));
    }
    return cat;
}

MessageCatalog MessageCatalog::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("message catalog: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

MessageCatalog MessageCatalog::builtin() { return from_json(kBuiltinMessagesJson); }

const MessageEntry* MessageCatalog::find(const std::string& id) const {
    for (const auto& e : entries_)
        if (e.id == id) return &e;
    return nullptr;
}

std::size_t MessageCatalog::count(Category c, MoodBucket b) const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += (e.category == c && e.bucket == b) ? 1 : 0;
    return n;
}

std::vector<const MessageEntry*> MessageCatalog::eligible(Action a, MoodBucket bucket,
                                                         const std::set<std::string>& sent_today) const {
    std::vector<const MessageEntry*> out;
    const auto category = category_of(a);
    if (!category) return out;

    std::set<std::string> used_texts;
    for (const auto& id : sent_today)
        if (const auto* e = find(id)) used_texts.insert(e->text);

    for (const auto& e : entries_) {
        if (e.category != *category) continue;
        if (e.bucket != bucket && e.bucket != MoodBucket::any) continue;
        if (sent_today.count(e.id) || used_texts.count(e.text)) continue;
        used_texts.insert(e.text);
        out.push_back(&e);
    }
    return out;
}

Selection MessageCatalog::select(Action a, MoodBucket bucket, const std::set<std::string>& sent_today,
                                 Rng& rng) const {
    Selection sel;
    if (!category_of(a)) return sel;
    const auto pool = eligible(a, bucket, sent_today);
    if (pool.empty()) {
        sel.status = SelectionStatus::exhausted;
        return sel;
    }
    sel.status = SelectionStatus::selected;
    sel.message = *pool[rng.uniform_index(pool.size())];
    return sel;
}

}  // namespace phrl
