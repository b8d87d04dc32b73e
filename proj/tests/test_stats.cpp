#include <doctest.h>

#include "triage/errors.hpp"
#include "triage/rng.hpp"
#include "triage/stats.hpp"

#include <cmath>
#include <vector>

using namespace triage;
using stats::brunner_munzel;
using stats::ConfusionMatrix;
using stats::mcc;
using stats::prob_superiority;

namespace {

// Brute-force oracle: direct pair enumeration, no ranks.
double brute_p_hat(const std::vector<double>& xs, const std::vector<double>& ys) {
    double count = 0.0;
    for (double x : xs) {
        for (double y : ys) {
            if (x > y) count += 1.0;
            else if (x == y) count += 0.5;
        }
    }
    return count / (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
}

// Independent Brunner-Munzel construction from placement counts only;
// no pooled sort, no midrank identity.
struct BruteBm {
    double statistic, df, p_hat;
    bool degenerate;
};

BruteBm brute_bm(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double nx = static_cast<double>(xs.size());
    const double ny = static_cast<double>(ys.size());
    std::vector<double> px(xs.size()), py(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double c = 0;
        for (double y : ys) c += y < xs[i] ? 1.0 : (y == xs[i] ? 0.5 : 0.0);
        px[i] = c;
    }
    for (std::size_t j = 0; j < ys.size(); ++j) {
        double c = 0;
        for (double x : xs) c += x < ys[j] ? 1.0 : (x == ys[j] ? 0.5 : 0.0);
        py[j] = c;
    }
    double mx = 0, my = 0;
    for (double v : px) mx += v;
    for (double v : py) my += v;
    mx /= nx;
    my /= ny;
    double sx = 0, sy = 0;
    for (double v : px) sx += (v - mx) * (v - mx);
    for (double v : py) sy += (v - my) * (v - my);
    sx /= nx - 1.0;
    sy /= ny - 1.0;

    BruteBm r{};
    r.p_hat = mx / ny; // mean placement of x among y
    const double pooled = nx * sx + ny * sy;
    if (pooled <= 0.0) {
        r.degenerate = true;
        return r;
    }
    // pooled rank means via placements:
    //   mean_rank_x = (nx+1)/2 + mx,  mean_rank_y = (ny+1)/2 + my
    const double diff = my - mx + (ny - nx) / 2.0;
    r.statistic = nx * ny * diff / ((nx + ny) * std::sqrt(pooled));
    r.df = pooled * pooled /
           (std::pow(nx * sx, 2.0) / (nx - 1.0) + std::pow(ny * sy, 2.0) / (ny - 1.0));
    return r;
}

} // namespace

TEST_CASE("probability of superiority basics") {
    CHECK(prob_superiority(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) ==
          0.5);
    CHECK(prob_superiority(std::vector<double>{4, 5}, std::vector<double>{1, 2}) == 1.0);
    CHECK(prob_superiority(std::vector<double>{1, 3}, std::vector<double>{2, 4}) == 0.25);
    CHECK_THROWS_AS(prob_superiority(std::vector<double>{}, std::vector<double>{1}),
                    StatsError);
}

TEST_CASE("p_hat matches brute-force enumeration exactly") {
    Rng rng(303);
    for (int trial = 0; trial < 500; ++trial) {
        const int nx = static_cast<int>(rng.uniform_int(1, 12));
        const int ny = static_cast<int>(rng.uniform_int(1, 12));
        std::vector<double> xs, ys;
        for (int i = 0; i < nx; ++i)
            xs.push_back(static_cast<double>(rng.uniform_int(0, 6))); // force ties
        for (int i = 0; i < ny; ++i)
            ys.push_back(static_cast<double>(rng.uniform_int(0, 6)));
        CHECK(prob_superiority(xs, ys) == brute_p_hat(xs, ys));
    }
}

TEST_CASE("complement identity is exact") {
    Rng rng(304);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> xs, ys;
        for (int i = 0; i < 8; ++i) xs.push_back(static_cast<double>(rng.uniform_int(0, 4)));
        for (int i = 0; i < 5; ++i) ys.push_back(static_cast<double>(rng.uniform_int(0, 4)));
        CHECK(prob_superiority(xs, ys) + prob_superiority(ys, xs) == 1.0);
    }
}

TEST_CASE("shift and monotone transforms leave p_hat unchanged") {
    const std::vector<double> xs = {1, 2, 2, 5, 9};
    const std::vector<double> ys = {0, 2, 3, 7};
    const double base = prob_superiority(xs, ys);
    auto shifted = [&](double c) {
        std::vector<double> x2 = xs, y2 = ys;
        for (double& v : x2) v += c;
        for (double& v : y2) v += c;
        return prob_superiority(x2, y2);
    };
    CHECK(shifted(13.25) == base);
    std::vector<double> xe = xs, ye = ys;
    for (double& v : xe) v = std::exp(v);
    for (double& v : ye) v = std::exp(v);
    CHECK(prob_superiority(xe, ye) == base);
}

TEST_CASE("Brunner-Munzel reproduces the published reference example") {
    // reference values from an independent implementation of the test
    const std::vector<double> x1 = {1, 2, 1, 1, 1, 1, 1, 1, 1, 1, 2, 4, 1, 1};
    const std::vector<double> x2 = {3, 3, 4, 3, 1, 2, 3, 1, 1, 5, 4};
    const auto r = brunner_munzel(x1, x2);
    CHECK(r.bm_statistic == doctest::Approx(3.1374674823029505).epsilon(1e-9));
    CHECK(r.bm_p_value == doctest::Approx(0.0057862086661515377).epsilon(1e-6));
    CHECK_FALSE(r.degenerate);

    const auto greater = brunner_munzel(x1, x2, stats::Alternative::Greater);
    CHECK(greater.bm_statistic == doctest::Approx(r.bm_statistic));
    CHECK(greater.bm_p_value == doctest::Approx(1.0 - 0.0057862086661515377 / 2.0)
                                    .epsilon(1e-6));
}

TEST_CASE("identical samples give the null result") {
    const std::vector<double> s = {1, 2, 3, 4, 5};
    const auto r = brunner_munzel(s, s);
    CHECK(r.p_hat == 0.5);
    CHECK(r.bm_statistic == doctest::Approx(0.0));
    CHECK(r.bm_p_value == doctest::Approx(1.0));
}

TEST_CASE("complete separation is flagged degenerate") {
    const std::vector<double> hi = {11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
    const std::vector<double> lo = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const auto r = brunner_munzel(hi, lo);
    CHECK(r.degenerate);
    CHECK(r.p_hat == 1.0);
    CHECK(r.bm_p_value == 0.0); // small p-value under separation

    const std::vector<double> flat = {2, 2, 2};
    const auto null = brunner_munzel(flat, flat);
    CHECK(null.degenerate);
    CHECK(null.p_hat == 0.5);
    CHECK(null.bm_p_value == 1.0);
}

TEST_CASE("BM matches the placement-count oracle on random fixtures") {
    Rng rng(505);
    int tested = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int nx = static_cast<int>(rng.uniform_int(5, 25));
        const int ny = static_cast<int>(rng.uniform_int(5, 25));
        std::vector<double> xs, ys;
        for (int i = 0; i < nx; ++i)
            xs.push_back(static_cast<double>(rng.uniform_int(0, 9)) + 0.5 * rng.bernoulli(0.4));
        for (int i = 0; i < ny; ++i)
            ys.push_back(static_cast<double>(rng.uniform_int(2, 11)));
        const BruteBm expected = brute_bm(xs, ys);
        const auto got = brunner_munzel(xs, ys);
        if (expected.degenerate) {
            CHECK(got.degenerate);
            continue;
        }
        ++tested;
        CHECK(got.bm_statistic == doctest::Approx(expected.statistic).epsilon(1e-6));
        CHECK(got.bm_df == doctest::Approx(expected.df).epsilon(1e-6));
        CHECK(got.p_hat == doctest::Approx(expected.p_hat).epsilon(1e-12));
    }
    CHECK(tested >= 30);
}

TEST_CASE("BM shift invariance") {
    const std::vector<double> xs = {1, 4, 2, 8, 5, 7};
    const std::vector<double> ys = {2, 3, 3, 9, 1};
    const auto a = brunner_munzel(xs, ys);
    std::vector<double> x2 = xs, y2 = ys;
    for (double& v : x2) v += 1000.0;
    for (double& v : y2) v += 1000.0;
    const auto b = brunner_munzel(x2, y2);
    CHECK(a.bm_statistic == b.bm_statistic);
    CHECK(a.p_hat == b.p_hat);
}

TEST_CASE("BM needs two values per sample") {
    CHECK_THROWS_AS(brunner_munzel(std::vector<double>{1}, std::vector<double>{1, 2}),
                    StatsError);
}

TEST_CASE("student t cdf spot values") {
    CHECK(stats::student_t_cdf(0.0, 5.0) == doctest::Approx(0.5));
    // df=1 is Cauchy: F(1) = 0.75
    CHECK(stats::student_t_cdf(1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(stats::student_t_cdf(-1.0, 1.0) == doctest::Approx(0.25).epsilon(1e-10));
    // symmetry
    CHECK(stats::student_t_cdf(2.5, 7.0) ==
          doctest::Approx(1.0 - stats::student_t_cdf(-2.5, 7.0)).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// MCC
// ---------------------------------------------------------------------------

TEST_CASE("MCC of a diagonal matrix is 1") {
    ConfusionMatrix cm;
    cm.at(0, 0) = 4;
    cm.at(1, 1) = 7;
    cm.at(2, 2) = 2;
    CHECK(mcc(cm) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("constant predictor has MCC 0 under the vanishing-denominator rule") {
    ConfusionMatrix cm;
    cm.at(0, 2) = 5;
    cm.at(1, 2) = 3;
    cm.at(2, 2) = 2;
    CHECK(mcc(cm) == 0.0);
}

TEST_CASE("hand-computed fixtures") {
    // balanced 2x2 embedded: perfect anti-correlation
    ConfusionMatrix anti;
    anti.at(0, 1) = 2;
    anti.at(1, 0) = 2;
    CHECK(mcc(anti) == doctest::Approx(-1.0).epsilon(1e-15));

    // chance-level block
    ConfusionMatrix chance;
    chance.at(0, 0) = 1;
    chance.at(0, 1) = 1;
    chance.at(1, 0) = 1;
    chance.at(1, 1) = 1;
    CHECK(mcc(chance) == doctest::Approx(0.0).epsilon(1e-15));

    // full 3x3, evaluated by hand:
    // c=19, s=25, t=(6,9,10), p=(7,9,9)
    // mcc = (19*25 - 213) / sqrt((625-211)*(625-217)) = 262/sqrt(414*408)
    ConfusionMatrix cm;
    cm.at(0, 0) = 5; cm.at(0, 1) = 1; cm.at(0, 2) = 0;
    cm.at(1, 0) = 2; cm.at(1, 1) = 6; cm.at(1, 2) = 1;
    cm.at(2, 0) = 0; cm.at(2, 1) = 2; cm.at(2, 2) = 8;
    const double expected = 262.0 / std::sqrt(414.0 * 408.0);
    CHECK(mcc(cm) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("MCC is invariant under transposition") {
    Rng rng(606);
    for (int trial = 0; trial < 50; ++trial) {
        ConfusionMatrix cm;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) cm.at(i, j) = rng.uniform_int(0, 9);
        if (cm.total() == 0) continue;
        CHECK(mcc(cm) == mcc(cm.transposed()));
    }
}

TEST_CASE("empty matrix is an error") {
    CHECK_THROWS_AS(mcc(ConfusionMatrix{}), StatsError);
}

// ---------------------------------------------------------------------------
// matched pairs
// ---------------------------------------------------------------------------

TEST_CASE("identical proxies pair up") {
    const auto r = stats::matched_pairs({{"a", 10}}, {{"b", 10}}, 0.0);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0] == std::pair<std::string, std::string>{"a", "b"});
    CHECK(r.unmatched.empty());
}

TEST_CASE("caliper rejects distant pairs") {
    const auto r = stats::matched_pairs({{"a", 10}}, {{"b", 100}}, 5.0);
    CHECK(r.pairs.empty());
    CHECK(r.unmatched.size() == 2);
}

TEST_CASE("four-vs-four fixture has the known greedy result") {
    const std::vector<stats::MatchUnit> a = {{"a1", 1}, {"a2", 5}, {"a3", 10}, {"a4", 20}};
    const std::vector<stats::MatchUnit> b = {{"b1", 2}, {"b2", 6}, {"b3", 30}, {"b4", 100}};
    const auto r = stats::matched_pairs(a, b, 10.0);
    REQUIRE(r.pairs.size() == 3);
    CHECK(r.pairs[0] == std::pair<std::string, std::string>{"a1", "b1"});
    CHECK(r.pairs[1] == std::pair<std::string, std::string>{"a2", "b2"});
    CHECK(r.pairs[2] == std::pair<std::string, std::string>{"a4", "b3"});
    REQUIRE(r.unmatched.size() == 2);
    CHECK(r.unmatched[0] == "a3");
    CHECK(r.unmatched[1] == "b4");
}

TEST_CASE("matching is symmetric under group swap") {
    Rng rng(707);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<stats::MatchUnit> a, b;
        for (int i = 0; i < 6; ++i)
            a.push_back({"a" + std::to_string(i), static_cast<double>(rng.uniform_int(0, 40))});
        for (int i = 0; i < 5; ++i)
            b.push_back({"b" + std::to_string(i), static_cast<double>(rng.uniform_int(0, 40))});
        const auto ab = stats::matched_pairs(a, b, 7.0);
        const auto ba = stats::matched_pairs(b, a, 7.0);
        REQUIRE(ab.pairs.size() == ba.pairs.size());
        for (std::size_t i = 0; i < ab.pairs.size(); ++i) {
            CHECK(ab.pairs[i].first == ba.pairs[i].second);
            CHECK(ab.pairs[i].second == ba.pairs[i].first);
        }
    }
}

TEST_CASE("empty group is an error") {
    CHECK_THROWS_AS(stats::matched_pairs({}, {{"b", 1}}, 1.0), StatsError);
}

TEST_CASE("default caliper is a fifth of the IQR") {
    const std::vector<double> proxies = {0, 10, 20, 30};
    CHECK(stats::default_caliper(proxies) == doctest::Approx(3.0));
}

// ---------------------------------------------------------------------------
// Shapley
// ---------------------------------------------------------------------------

TEST_CASE("dummy feature contributes zero") {
    const std::vector<std::string> names = {"f0", "f1", "f2", "f3"};
    // value ignores f3 entirely
    auto v = [](const std::vector<int>& s) {
        double total = 0;
        for (int i : s)
            if (i != 3) total += static_cast<double>(i + 1);
        return total;
    };
    const auto r = stats::shapley_importance(names, v);
    for (const auto& [name, phi] : r.ranked) {
        if (name == "f3") CHECK(std::fabs(phi) <= 1e-12);
    }
}

TEST_CASE("constant value function zeroes every contribution") {
    const std::vector<std::string> names = {"a", "b", "c"};
    const auto r = stats::shapley_importance(names, [](const std::vector<int>&) {
        return 0.7;
    });
    for (const auto& [name, phi] : r.ranked) CHECK(std::fabs(phi) <= 1e-12);
}

TEST_CASE("symmetric features get equal contributions") {
    const std::vector<std::string> names = {"f0", "f1", "f2"};
    // f0 and f1 are interchangeable
    auto v = [](const std::vector<int>& s) {
        bool has0 = false, has1 = false, has2 = false;
        for (int i : s) {
            if (i == 0) has0 = true;
            if (i == 1) has1 = true;
            if (i == 2) has2 = true;
        }
        return (has0 ? 1.0 : 0.0) + (has1 ? 1.0 : 0.0) + (has2 ? 3.0 : 0.0) +
               (has0 && has1 ? 0.5 : 0.0);
    };
    const auto r = stats::shapley_importance(names, v);
    double phi0 = 0, phi1 = 0;
    for (const auto& [name, phi] : r.ranked) {
        if (name == "f0") phi0 = phi;
        if (name == "f1") phi1 = phi;
    }
    CHECK(phi0 == doctest::Approx(phi1).epsilon(1e-12));
}

TEST_CASE("efficiency: contributions sum to the full-coalition value") {
    Rng rng(808);
    const std::vector<std::string> names = {"f0", "f1", "f2", "f3", "f4", "f5", "f6", "f7"};
    std::vector<double> table(256);
    for (double& v : table) v = rng.uniform(-1, 1);
    auto v = [&](const std::vector<int>& s) {
        unsigned mask = 0;
        for (int i : s) mask |= 1u << i;
        return table[mask];
    };
    const auto r = stats::shapley_importance(names, v);
    double total = 0;
    for (const auto& [name, phi] : r.ranked) total += phi;
    CHECK(total == doctest::Approx(r.value_full - r.value_empty).epsilon(1e-9));
}

TEST_CASE("single informative feature ranks first") {
    const std::vector<std::string> names = {"f0", "f1", "f2", "f3", "f4"};
    auto v = [](const std::vector<int>& s) {
        for (int i : s)
            if (i == 3) return 1.0;
        return 0.0;
    };
    const auto r = stats::shapley_importance(names, v);
    CHECK(r.ranked[0].first == "f3");
    CHECK(r.ranked[0].second == doctest::Approx(1.0).epsilon(1e-12));
    // ties among the rest break lexicographically
    CHECK(r.ranked[1].first == "f0");
}

TEST_CASE("feature sets beyond 12 are refused") {
    std::vector<std::string> names(13, "f");
    CHECK_THROWS_AS(stats::shapley_importance(names, [](const std::vector<int>&) {
                        return 0.0;
                    }),
                    StatsError);
}
