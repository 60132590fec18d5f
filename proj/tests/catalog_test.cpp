#include "phrl/catalog.hpp"

#include <gtest/gtest.h>

#include <map>

namespace phrl {
namespace {

StateVector with_ratings(std::vector<int> today) {
    StateVector s;
    s.number_rating = static_cast<int>(today.size());
    std::sort(today.begin(), today.end());
    for (int r : today) {
        if (r <= 2)
            ++s.number_low_rating;
        else if (r <= 5)
            ++s.number_medium_rating;
        else
            ++s.number_high_rating;
    }
    if (!today.empty()) {
        s.lowest_rating = today.front();
        s.highest_rating = today.back();
        const std::size_t n = today.size();
        s.median_rating = (today[(n - 1) / 2] + today[n / 2]) / 2.0;
    }
    return s;
}

TEST(Catalog, BuiltinMatchesShippedFile) {
    const auto file = MessageCatalog::load(std::string(PHRL_DATA_DIR) + "/messages.json");
    EXPECT_EQ(MessageCatalog::builtin().entries(), file.entries());
}

TEST(Catalog, CountsPerCategoryAndBucket) {
    const auto cat = MessageCatalog::builtin();
    EXPECT_EQ(cat.entries().size(), 34u);
    EXPECT_EQ(cat.count(Category::encouraging, MoodBucket::positive_neutral), 3u);
    EXPECT_EQ(cat.count(Category::encouraging, MoodBucket::negative_neutral), 3u);
    EXPECT_EQ(cat.count(Category::encouraging, MoodBucket::mood_unavailable), 4u);
    EXPECT_EQ(cat.count(Category::informing, MoodBucket::any), 9u);
    EXPECT_EQ(cat.count(Category::affirming, MoodBucket::positive_neutral), 3u);
    EXPECT_EQ(cat.count(Category::affirming, MoodBucket::negative_neutral), 5u);
    EXPECT_EQ(cat.count(Category::affirming, MoodBucket::mood_unavailable), 7u);
}

TEST(Catalog, VerbatimTexts) {
    const auto cat = MessageCatalog::builtin();
    ASSERT_NE(cat.find("enc-pos-1"), nullptr);
    EXPECT_EQ(cat.find("enc-pos-1")->text, "It seems like you’re on the right track! Keep up the good work!");
    EXPECT_EQ(cat.find("inf-5")->text, "Do not forget to rate your mood three times per day.");
    EXPECT_EQ(cat.find("aff-na-7")->text, cat.find("aff-neg-4")->text);
    EXPECT_EQ(cat.find("missing"), nullptr);
}

TEST(MoodBucketRouting, Examples) {
    EXPECT_EQ(mood_bucket(StateVector{}, std::nullopt), MoodBucket::mood_unavailable);
    EXPECT_EQ(mood_bucket(with_ratings({6}), 6), MoodBucket::positive_neutral);
    EXPECT_EQ(mood_bucket(with_ratings({2}), 2), MoodBucket::negative_neutral);
}

TEST(MoodBucketRouting, ThresholdAndSource) {
    for (int r = 1; r <= 7; ++r)
        EXPECT_EQ(mood_bucket(with_ratings({r}), r),
                  r >= 5 ? MoodBucket::positive_neutral : MoodBucket::negative_neutral);
    // latest rating dominates the median by default
    EXPECT_EQ(mood_bucket(with_ratings({7, 7, 1}), 1), MoodBucket::negative_neutral);
    MoodConfig median;
    median.source = MoodSource::median;
    EXPECT_EQ(mood_bucket(with_ratings({7, 7, 1}), 1, median), MoodBucket::positive_neutral);
    MoodConfig strict;
    strict.positive_threshold = 6;
    EXPECT_EQ(mood_bucket(with_ratings({5}), 5, strict), MoodBucket::negative_neutral);
    EXPECT_THROW(mood_bucket(with_ratings({5}), std::nullopt), ContractViolation);
    strict.positive_threshold = 9;
    EXPECT_THROW(strict.validate(), ConfigError);
}

TEST(Select, NoneActionSendsNothing) {
    const auto cat = MessageCatalog::builtin();
    Rng rng(1), untouched(1);
    const auto sel = cat.select(Action::none, MoodBucket::positive_neutral, {}, rng);
    EXPECT_EQ(sel.status, SelectionStatus::no_message);
    EXPECT_FALSE(sel.message);
    EXPECT_EQ(rng.next(), untouched.next());
}

TEST(Select, LastRemainingInformingMessage) {
    const auto cat = MessageCatalog::builtin();
    std::set<std::string> sent;
    for (int i = 1; i <= 9; ++i)
        if (i != 4) sent.insert("inf-" + std::to_string(i));
    Rng rng(2);
    for (auto bucket : {MoodBucket::positive_neutral, MoodBucket::negative_neutral, MoodBucket::mood_unavailable}) {
        const auto sel = cat.select(Action::informing, bucket, sent, rng);
        ASSERT_EQ(sel.status, SelectionStatus::selected);
        EXPECT_EQ(sel.message->id, "inf-4");
    }
    sent.insert("inf-4");
    EXPECT_EQ(cat.select(Action::informing, MoodBucket::any, sent, rng).status, SelectionStatus::exhausted);
}

TEST(Select, UniformOverEligible) {
    const auto cat = MessageCatalog::builtin();
    Rng rng(3);
    std::map<std::string, int> hits;
    const int n = 30000;
    for (int i = 0; i < n; ++i) {
        const auto sel = cat.select(Action::encouraging, MoodBucket::positive_neutral, {}, rng);
        ASSERT_TRUE(sel.message);
        ++hits[sel.message->id];
    }
    ASSERT_EQ(hits.size(), 3u);
    for (const auto& [id, h] : hits) {
        EXPECT_EQ(id.rfind("enc-pos-", 0), 0u);
        EXPECT_NEAR(h / static_cast<double>(n), 1.0 / 3.0, 0.012) << id;
    }
}

TEST(Select, NeverConflictsWithBucket) {
    const auto cat = MessageCatalog::builtin();
    Rng rng(4);
    for (int i = 0; i < 5000; ++i) {
        const Action a = action_from_code(static_cast<int>(rng.uniform_index(4)));
        const MoodBucket b = static_cast<MoodBucket>(rng.uniform_index(3));
        std::set<std::string> sent;
        for (const auto& e : cat.entries())
            if (rng.bernoulli(0.3)) sent.insert(e.id);
        const auto sel = cat.select(a, b, sent, rng);
        if (!sel.message) continue;
        EXPECT_EQ(sel.message->category, *category_of(a));
        EXPECT_TRUE(sel.message->bucket == b || sel.message->bucket == MoodBucket::any);
        EXPECT_EQ(sent.count(sel.message->id), 0u);
    }
}

TEST(Select, SharedTextIsNotRepeatedAcrossBuckets) {
    const auto cat = MessageCatalog::builtin();
    const auto pool = cat.eligible(Action::affirming, MoodBucket::mood_unavailable, {"aff-neg-4"});
    EXPECT_EQ(pool.size(), 6u);
    for (const auto* e : pool) EXPECT_NE(e->id, "aff-na-7");
}

TEST(Select, DayOfSelectionsNeverRepeats) {
    const auto cat = MessageCatalog::builtin();
    Rng rng(5);
    for (int day = 0; day < 2000; ++day) {
        std::set<std::string> sent;
        for (int k = 0; k < 12; ++k) {
            const Action a = action_from_code(1 + static_cast<int>(rng.uniform_index(3)));
            const MoodBucket b = static_cast<MoodBucket>(rng.uniform_index(3));
            const auto sel = cat.select(a, b, sent, rng);
            if (sel.status == SelectionStatus::selected) EXPECT_TRUE(sent.insert(sel.message->id).second);
        }
    }
}

TEST(Select, DeterministicUnderSeed) {
    const auto cat = MessageCatalog::builtin();
    Rng a(99), b(99);
    for (int i = 0; i < 100; ++i)
        EXPECT_EQ(cat.select(Action::affirming, MoodBucket::negative_neutral, {}, a).message,
                  cat.select(Action::affirming, MoodBucket::negative_neutral, {}, b).message);
}

TEST(CatalogLoad, RejectsBadRecords) {
    EXPECT_THROW(MessageCatalog::from_json("{}"), ConfigError);
    EXPECT_THROW(MessageCatalog::from_json("[{"), ConfigError);
    EXPECT_THROW(MessageCatalog::from_json(R"([{"id":"a","category":"informing","bucket":"positive_neutral","text":"x"}])"),
                 ConfigError);
    EXPECT_THROW(MessageCatalog::from_json(R"([{"id":"a","category":"affirming","bucket":"any","text":"x"}])"),
                 ConfigError);
    EXPECT_THROW(MessageCatalog::from_json(R"([{"id":"a","category":"informing","bucket":"any","text":"x"},
                                               {"id":"a","category":"informing","bucket":"any","text":"y"}])"),
                 ConfigError);
    EXPECT_THROW(MessageCatalog::from_json(R"([{"id":"a","category":"shouting","bucket":"any","text":"x"}])"),
                 ConfigError);
    EXPECT_THROW(MessageCatalog::from_json(R"([{"id":"a","category":"informing","bucket":"any"}])"), ConfigError);
    EXPECT_THROW(MessageCatalog::load("/nonexistent/messages.json"), ConfigError);
    EXPECT_EQ(MessageCatalog::from_json(R"([{"id":"a","category":"informing","bucket":"any","text":"x"}])").entries().size(),
              1u);
}

}  // namespace
}  // namespace phrl
