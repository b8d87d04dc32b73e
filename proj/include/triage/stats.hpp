#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace triage::stats {

// p_hat = [#{(x,y): x > y} + 0.5 * #{x = y}] / (n_x * n_y), via pooled
// midranks. Ties split evenly, so p_hat(x,y) + p_hat(y,x) = 1 exactly.
double prob_superiority(std::span<const double> xs, std::span<const double> ys);

struct EffectResult {
    double p_hat = 0.5;
    std::size_t n_x = 0, n_y = 0;
    double bm_statistic = 0.0;
    double bm_df = 0.0;
    double bm_p_value = 1.0;
    bool degenerate = false; // zero rank variance in both samples
};

enum class Alternative { TwoSided, Greater }; // Greater: x stochastically above y

// Brunner-Munzel test from pooled midranks, Welch-Satterthwaite style df,
// p-value from the t distribution. Needs n_x, n_y >= 2. The degenerate case
// (no rank variance anywhere) is flagged rather than returned as NaN:
// statistic 0, p-value 1 when the samples coincide, 0 when fully separated.
EffectResult brunner_munzel(std::span<const double> xs, std::span<const double> ys,
                            Alternative alt = Alternative::TwoSided);

// rows = oracle class, columns = predicted class
struct ConfusionMatrix {
    std::array<std::array<long, 3>, 3> counts{};

    long& at(int truth, int predicted) {
        return counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
    }
    long at(int truth, int predicted) const {
        return counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
    }
    long total() const;
    ConfusionMatrix transposed() const;
};

// Multiclass Matthews correlation; 0 when the denominator vanishes.
double mcc(const ConfusionMatrix& cm);

// ---------------------------------------------------------------------------
// matched pairs
// ---------------------------------------------------------------------------

struct MatchUnit {
    std::string id;
    double proxy = 0.0;
};

struct MatchResult {
    std::vector<std::pair<std::string, std::string>> pairs; // (group_a, group_b)
    std::vector<std::string> unmatched;
};

// Global greedy: repeatedly match the closest unmatched cross pair with
// |proxy_a - proxy_b| <= caliper; ties broken on the sorted id pair, which
// makes the result symmetric under swapping the groups. StatsError on an
// empty group.
MatchResult matched_pairs(std::vector<MatchUnit> group_a,
                          std::vector<MatchUnit> group_b, double caliper);

// Default caliper: 20% of the pooled proxy interquartile range.
double default_caliper(std::span<const double> proxies);

// ---------------------------------------------------------------------------
// exact Shapley importance
// ---------------------------------------------------------------------------

using SubsetValueFn = std::function<double(const std::vector<int>&)>;

struct ShapleyResult {
    std::vector<std::pair<std::string, double>> ranked; // descending contribution
    double value_full = 0.0;
    double value_empty = 0.0;
};

// Exact enumeration of all 2^k subsets with the value function memoized per
// subset. k <= 12 enforced (StatsError beyond). Ties in the ranking break
// lexicographically on the feature name.
ShapleyResult shapley_importance(const std::vector<std::string>& features,
                                 const SubsetValueFn& value_fn);

// Two-sided survival helpers used by the BM test (exposed for tests).
double student_t_cdf(double t, double df);

} // namespace triage::stats
