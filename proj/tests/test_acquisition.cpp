#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bgadl/acquisition.hpp"

using namespace bgadl;

namespace {
constexpr double kLn2 = 0.6931471805599453;
constexpr double kLn4 = 1.3862943611198906;
constexpr double kEntropy7525 = 0.5623351446188083; // -(0.75 ln 0.75 + 0.25 ln 0.25)

MCSamples samples_from(std::initializer_list<std::initializer_list<double>> rows) {
    MCSamples mc;
    const std::size_t t = rows.size();
    const std::size_t c = rows.begin()->size();
    mc.probs = Tensor({t, c});
    std::size_t i = 0;
    for (const auto& row : rows)
        for (double v : row) mc.probs.data[i++] = v;
    return mc;
}

// random distribution over C classes from a stream
std::vector<double> random_dist(std::size_t c, RngStream& s) {
    std::vector<double> p(c);
    double sum = 0.0;
    for (double& v : p) {
        v = -std::log(1.0 - s.uniform() + 1e-12);
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

} // namespace

TEST_CASE("shannon entropy oracles") {
    CHECK(shannon_entropy({1.0, 0.0, 0.0}) == 0.0);
    CHECK(shannon_entropy({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(kLn4).epsilon(1e-12));
    CHECK(shannon_entropy({0.75, 0.25}) == doctest::Approx(kEntropy7525).epsilon(1e-12));
}

TEST_CASE("shannon entropy rejects bad distributions") {
    CHECK_THROWS_AS(shannon_entropy({-0.1, 1.1}), std::invalid_argument);
    CHECK_THROWS_AS(shannon_entropy({0.5, 0.4}), std::invalid_argument); // sums to 0.9
}

TEST_CASE("bald score oracles") {
    SUBCASE("identical rows give zero") {
        MCSamples mc = samples_from({{0.3, 0.7}, {0.3, 0.7}, {0.3, 0.7}});
        CHECK(std::abs(bald_score(mc)) <= 1e-12);
    }
    SUBCASE("single pass gives exactly zero") {
        MCSamples mc = samples_from({{0.2, 0.5, 0.3}});
        CHECK(bald_score(mc) == 0.0);
    }
    SUBCASE("opposite one-hot rows give ln 2") {
        MCSamples mc = samples_from({{1.0, 0.0}, {0.0, 1.0}});
        CHECK(bald_score(mc) == doctest::Approx(kLn2).epsilon(1e-9));
    }
}

TEST_CASE("bald score bounds over random samples") {
    RngStream s = named_stream(21, "bald_prop");
    for (int rep = 0; rep < 2000; ++rep) {
        const std::size_t c = 2 + s.below(9);
        const std::size_t t = 1 + s.below(12);
        MCSamples mc;
        mc.probs = Tensor({t, c});
        for (std::size_t i = 0; i < t; ++i) {
            std::vector<double> p = random_dist(c, s);
            for (std::size_t j = 0; j < c; ++j) mc.probs.at(i, j) = p[j];
        }
        const double score = bald_score(mc);
        CHECK(score >= -1e-12);
        CHECK(score <= std::log(static_cast<double>(c)) + 1e-9);
    }
}

TEST_CASE("subsample_pool") {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < 50; ++i) pool.push_back(i * 3);
    SUBCASE("m at least pool size returns every index") {
        RngStream s = named_stream(22, "sub");
        auto out = subsample_pool(pool, 100, s);
        CHECK(out.size() == pool.size());
        std::sort(out.begin(), out.end());
        CHECK(out == [&] { auto p = pool; std::sort(p.begin(), p.end()); return p; }());
    }
    SUBCASE("same stream replayed gives the identical list") {
        RngStream s1 = named_stream(22, "sub", 1);
        RngStream s2 = named_stream(22, "sub", 1);
        CHECK(subsample_pool(pool, 10, s1) == subsample_pool(pool, 10, s2));
    }
    SUBCASE("indices are distinct and within bounds") {
        RngStream meta = named_stream(22, "sub_meta");
        for (int rep = 0; rep < 50; ++rep) {
            const std::size_t m = 1 + meta.below(60);
            RngStream s = named_stream(22, "sub_rep", rep);
            auto out = subsample_pool(pool, m, s);
            CHECK(out.size() == std::min(m, pool.size()));
            std::sort(out.begin(), out.end());
            CHECK(std::adjacent_find(out.begin(), out.end()) == out.end());
            for (std::size_t idx : out) CHECK(std::find(pool.begin(), pool.end(), idx) != pool.end());
        }
    }
    SUBCASE("empty pool is an error") {
        RngStream s = named_stream(22, "sub_e");
        std::vector<std::size_t> empty;
        CHECK_THROWS_AS(subsample_pool(empty, 5, s), std::invalid_argument);
    }
}

TEST_CASE("select_top_k") {
    SUBCASE("picks the argmax") {
        auto out = select_top_k({0.1, 0.9, 0.5}, {10, 20, 30}, 1);
        CHECK(out == std::vector<std::size_t>{20});
    }
    SUBCASE("ties break toward the lower pool index") {
        auto out = select_top_k({0.5, 0.5, 0.5}, {30, 10, 20}, 1);
        CHECK(out == std::vector<std::size_t>{10});
    }
    SUBCASE("k covering everything returns all, score-descending") {
        auto out = select_top_k({0.1, 0.9, 0.5}, {10, 20, 30}, 3);
        CHECK(out == std::vector<std::size_t>{20, 30, 10});
    }
    SUBCASE("k larger than available returns all") {
        auto out = select_top_k({0.2, 0.4}, {1, 2}, 10);
        CHECK(out.size() == 2);
    }
    SUBCASE("positive scaling leaves the selection unchanged") {
        RngStream s = named_stream(23, "topk_prop");
        for (int rep = 0; rep < 100; ++rep) {
            std::vector<double> scores(20);
            std::vector<std::size_t> idx(20);
            for (std::size_t i = 0; i < 20; ++i) {
                scores[i] = s.uniform();
                idx[i] = i;
            }
            const double c = 0.1 + 10.0 * s.uniform();
            std::vector<double> scaled = scores;
            for (double& v : scaled) v *= c;
            CHECK(select_top_k(scores, idx, 5) == select_top_k(scaled, idx, 5));
        }
    }
    SUBCASE("log-base change rescales scores but not the selection") {
        // base-2 entropy = natural entropy / ln 2, a positive rescale
        RngStream s = named_stream(23, "base_prop");
        std::vector<double> scores(15);
        std::vector<std::size_t> idx(15);
        for (std::size_t i = 0; i < 15; ++i) {
            scores[i] = s.uniform();
            idx[i] = i;
        }
        std::vector<double> base2 = scores;
        for (double& v : base2) v /= kLn2;
        CHECK(select_top_k(scores, idx, 4) == select_top_k(base2, idx, 4));
    }
    SUBCASE("empty scores are an error") {
        CHECK_THROWS_AS(select_top_k({}, {}, 1), std::invalid_argument);
    }
}

TEST_CASE("score_pool") {
    ClassifierParams cls = make_classifier(6, {10}, 3, 0.5, named_stream(24, "sp_cls"));
    RngStream xs = named_stream(24, "sp_x");
    std::vector<Tensor> items;
    for (int i = 0; i < 30; ++i) {
        Tensor x({6});
        for (double& v : x.data) v = xs.uniform();
        items.push_back(std::move(x));
    }
    auto item = [&items](std::size_t i) -> const Tensor& { return items[i]; };
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < items.size(); ++i) indices.push_back(i);

    SUBCASE("score equals bald of mc_predict for each item") {
        auto scores = score_pool(cls, item, indices, 7, 77, 3, 1);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            Tensor row({1, 6});
            std::copy(items[i].data.begin(), items[i].data.end(), row.data.begin());
            MCSamples mc = mc_predict(cls, row, 7, named_key(77ull, "mc", 3ull, indices[i]));
            CHECK(scores[i] == bald_score(mc));
        }
    }
    SUBCASE("dropout rate zero gives zero scores") {
        ClassifierParams c0 = make_classifier(6, {10}, 3, 0.0, named_stream(24, "sp_c0"));
        auto scores = score_pool(c0, item, indices, 9, 77, 1, 1);
        for (double v : scores) CHECK(std::abs(v) <= 1e-9);
    }
    SUBCASE("permuting the index list permutes scores identically") {
        auto scores = score_pool(cls, item, indices, 5, 42, 2, 1);
        std::vector<std::size_t> rev(indices.rbegin(), indices.rend());
        auto scores_rev = score_pool(cls, item, rev, 5, 42, 2, 1);
        for (std::size_t i = 0; i < indices.size(); ++i)
            CHECK(scores[i] == scores_rev[indices.size() - 1 - i]);
    }
    SUBCASE("scores stay within the entropy bound") {
        auto scores = score_pool(cls, item, indices, 11, 99, 4, 1);
        for (double v : scores) {
            CHECK(v >= -1e-12);
            CHECK(v <= std::log(3.0) + 1e-9);
        }
    }
    SUBCASE("worker count does not change a single bit") {
        auto s1 = score_pool(cls, item, indices, 8, 123, 5, 1);
        auto s4 = score_pool(cls, item, indices, 8, 123, 5, 4);
        for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i] == s4[i]);
    }
}

TEST_CASE("proposition1_gap") {
    ClassifierParams cls = make_classifier(5, {8}, 4, 0.5, named_stream(25, "p1_cls"));
    Tensor x({5}, 0.4);
    SUBCASE("identical points share masks, so the gap is exactly zero") {
        Prop1Result r = proposition1_gap(cls, x, x, 13, named_key(25, "p1"));
        CHECK(r.gap == 0.0);
        CHECK(r.a_star == r.a_prime);
    }
    SUBCASE("dropout rate zero gives zero at both points") {
        ClassifierParams c0 = make_classifier(5, {8}, 4, 0.0, named_stream(25, "p1_c0"));
        Tensor y({5}, 0.6);
        Prop1Result r = proposition1_gap(c0, x, y, 13, named_key(25, "p1b"));
        CHECK(std::abs(r.a_star) <= 1e-12);
        CHECK(std::abs(r.a_prime) <= 1e-12);
    }
    SUBCASE("nearby points have a small gap relative to distant ones") {
        Tensor near = x;
        near.data[0] += 0.01;
        Tensor far = x;
        for (double& v : far.data) v = 1.0 - v;
        Prop1Result rn = proposition1_gap(cls, x, near, 25, named_key(25, "p1c"));
        Prop1Result rf = proposition1_gap(cls, x, far, 25, named_key(25, "p1c"));
        CHECK(rn.gap <= rf.gap + 1e-12);
    }
}

TEST_CASE("score_stats quantiles") {
    ScoreStats s = score_stats({4.0, 1.0, 3.0, 2.0});
    CHECK(s.min == 1.0);
    CHECK(s.max == 4.0);
    CHECK(s.median == doctest::Approx(2.5));
    CHECK(s.iqr == doctest::Approx(1.5)); // q3=3.25, q1=1.75
}
