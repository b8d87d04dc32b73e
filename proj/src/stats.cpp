#include "triage/stats.hpp"

#include "triage/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace triage::stats {

namespace {

// regularized incomplete beta via Lentz continued fraction
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double incbeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

// midranks of a sorted-with-index view; average over tied runs
std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double student_t_cdf(double t, double df) {
    if (df <= 0.0) throw StatsError("t distribution needs df > 0");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double x = df / (df + t * t);
    const double tail = 0.5 * incbeta(0.5 * df, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double prob_superiority(std::span<const double> xs, std::span<const double> ys) {
    if (xs.empty() || ys.empty()) throw StatsError("probability of superiority needs non-empty samples");
    const std::size_t nx = xs.size();
    const std::size_t ny = ys.size();
    std::vector<double> pooled;
    pooled.reserve(nx + ny);
    pooled.insert(pooled.end(), xs.begin(), xs.end());
    pooled.insert(pooled.end(), ys.begin(), ys.end());
    const std::vector<double> ranks = midranks(pooled);
    double rank_sum_x = 0.0;
    for (std::size_t i = 0; i < nx; ++i) rank_sum_x += ranks[i];
    // Mann-Whitney identity: U_x = R_x - n_x(n_x+1)/2 counts x>y pairs, ties half
    const double u = rank_sum_x - static_cast<double>(nx) * (static_cast<double>(nx) + 1.0) / 2.0;
    return u / (static_cast<double>(nx) * static_cast<double>(ny));
}

EffectResult brunner_munzel(std::span<const double> xs, std::span<const double> ys,
                            Alternative alt) {
    if (xs.size() < 2 || ys.size() < 2) {
        throw StatsError("Brunner-Munzel needs at least 2 values per sample");
    }
    const std::size_t nx = xs.size();
    const std::size_t ny = ys.size();

    EffectResult r;
    r.n_x = nx;
    r.n_y = ny;
    r.p_hat = prob_superiority(xs, ys);

    std::vector<double> pooled;
    pooled.reserve(nx + ny);
    pooled.insert(pooled.end(), xs.begin(), xs.end());
    pooled.insert(pooled.end(), ys.begin(), ys.end());
    const std::vector<double> rank_pooled = midranks(pooled);
    const std::vector<double> rank_x = midranks(xs);
    const std::vector<double> rank_y = midranks(ys);

    double mean_pooled_x = 0.0, mean_pooled_y = 0.0;
    for (std::size_t i = 0; i < nx; ++i) mean_pooled_x += rank_pooled[i];
    for (std::size_t i = 0; i < ny; ++i) mean_pooled_y += rank_pooled[nx + i];
    mean_pooled_x /= static_cast<double>(nx);
    mean_pooled_y /= static_cast<double>(ny);
    const double mean_within_x = (static_cast<double>(nx) + 1.0) / 2.0;
    const double mean_within_y = (static_cast<double>(ny) + 1.0) / 2.0;

    double sx = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
        const double d = (rank_pooled[i] - rank_x[i]) - (mean_pooled_x - mean_within_x);
        sx += d * d;
    }
    sx /= static_cast<double>(nx) - 1.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < ny; ++i) {
        const double d =
            (rank_pooled[nx + i] - rank_y[i]) - (mean_pooled_y - mean_within_y);
        sy += d * d;
    }
    sy /= static_cast<double>(ny) - 1.0;

    const double pooled_var =
        static_cast<double>(nx) * sx + static_cast<double>(ny) * sy;
    if (pooled_var <= 0.0) {
        r.degenerate = true;
        r.bm_statistic = 0.0;
        r.bm_df = 0.0;
        if (r.p_hat == 0.5) {
            r.bm_p_value = 1.0;
        } else {
            r.bm_p_value = 0.0; // complete separation with zero variance
        }
        return r;
    }

    const double n_total = static_cast<double>(nx + ny);
    r.bm_statistic = static_cast<double>(nx) * static_cast<double>(ny) *
                     (mean_pooled_y - mean_pooled_x) /
                     (n_total * std::sqrt(pooled_var));
    r.bm_df = pooled_var * pooled_var /
              (std::pow(static_cast<double>(nx) * sx, 2.0) / (static_cast<double>(nx) - 1.0) +
               std::pow(static_cast<double>(ny) * sy, 2.0) / (static_cast<double>(ny) - 1.0));

    if (alt == Alternative::TwoSided) {
        const double tail = 1.0 - student_t_cdf(std::fabs(r.bm_statistic), r.bm_df);
        r.bm_p_value = std::min(1.0, 2.0 * tail);
    } else {
        // H1: x stochastically greater than y, i.e. small statistic
        r.bm_p_value = student_t_cdf(r.bm_statistic, r.bm_df);
    }
    return r;
}

long ConfusionMatrix::total() const {
    long t = 0;
    for (const auto& row : counts)
        for (long v : row) t += v;
    return t;
}

ConfusionMatrix ConfusionMatrix::transposed() const {
    ConfusionMatrix out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.at(j, i) = at(i, j);
    return out;
}

double mcc(const ConfusionMatrix& cm) {
    const double s = static_cast<double>(cm.total());
    if (s <= 0.0) throw StatsError("empty confusion matrix");
    double c = 0.0;
    std::array<double, 3> truth{}, predicted{};
    for (int k = 0; k < 3; ++k) {
        c += static_cast<double>(cm.at(k, k));
        for (int j = 0; j < 3; ++j) {
            truth[static_cast<std::size_t>(k)] += static_cast<double>(cm.at(k, j));
            predicted[static_cast<std::size_t>(k)] += static_cast<double>(cm.at(j, k));
        }
    }
    double tp_sum = 0.0, t_sq = 0.0, p_sq = 0.0;
    for (int k = 0; k < 3; ++k) {
        tp_sum += truth[static_cast<std::size_t>(k)] * predicted[static_cast<std::size_t>(k)];
        t_sq += truth[static_cast<std::size_t>(k)] * truth[static_cast<std::size_t>(k)];
        p_sq += predicted[static_cast<std::size_t>(k)] * predicted[static_cast<std::size_t>(k)];
    }
    const double denom = std::sqrt(s * s - p_sq) * std::sqrt(s * s - t_sq);
    if (denom == 0.0) return 0.0; // constant predictor or constant truth
    return (c * s - tp_sum) / denom;
}

MatchResult matched_pairs(std::vector<MatchUnit> group_a,
                          std::vector<MatchUnit> group_b, double caliper) {
    if (group_a.empty() || group_b.empty()) {
        throw StatsError("matched_pairs needs non-empty groups");
    }
    if (caliper < 0.0) throw StatsError("caliper must be non-negative");
    auto by_id = [](const MatchUnit& a, const MatchUnit& b) { return a.id < b.id; };
    std::sort(group_a.begin(), group_a.end(), by_id);
    std::sort(group_b.begin(), group_b.end(), by_id);

    struct Candidate {
        double dist;
        std::string lo, hi; // id pair sorted, so ties are label-swap invariant
        std::size_t ia, ib;
    };
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < group_a.size(); ++i) {
        for (std::size_t j = 0; j < group_b.size(); ++j) {
            const double d = std::fabs(group_a[i].proxy - group_b[j].proxy);
            if (d <= caliper) {
                Candidate c;
                c.dist = d;
                c.ia = i;
                c.ib = j;
                c.lo = std::min(group_a[i].id, group_b[j].id);
                c.hi = std::max(group_a[i].id, group_b[j].id);
                cands.push_back(std::move(c));
            }
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.lo != b.lo) return a.lo < b.lo;
        return a.hi < b.hi;
    });

    MatchResult result;
    std::vector<char> used_a(group_a.size(), 0), used_b(group_b.size(), 0);
    for (const Candidate& c : cands) {
        if (used_a[c.ia] || used_b[c.ib]) continue;
        used_a[c.ia] = 1;
        used_b[c.ib] = 1;
        result.pairs.emplace_back(group_a[c.ia].id, group_b[c.ib].id);
    }
    for (std::size_t i = 0; i < group_a.size(); ++i) {
        if (!used_a[i]) result.unmatched.push_back(group_a[i].id);
    }
    for (std::size_t j = 0; j < group_b.size(); ++j) {
        if (!used_b[j]) result.unmatched.push_back(group_b[j].id);
    }
    return result;
}

double default_caliper(std::span<const double> proxies) {
    if (proxies.empty()) return 0.0;
    std::vector<double> sorted(proxies.begin(), proxies.end());
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
        const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
        const double frac = pos - static_cast<double>(lo);
        return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
    };
    return 0.2 * (quantile(0.75) - quantile(0.25));
}

ShapleyResult shapley_importance(const std::vector<std::string>& features,
                                 const SubsetValueFn& value_fn) {
    const int k = static_cast<int>(features.size());
    if (k == 0) throw StatsError("empty feature set");
    if (k > 12) {
        throw StatsError("exact Shapley enumeration supports at most 12 features; "
                         "reduce the feature set");
    }
    const std::uint32_t n_subsets = 1u << k;

    std::vector<double> value(n_subsets);
    std::vector<int> subset;
    for (std::uint32_t mask = 0; mask < n_subsets; ++mask) {
        subset.clear();
        for (int i = 0; i < k; ++i) {
            if (mask & (1u << i)) subset.push_back(i);
        }
        value[mask] = value_fn(subset);
    }

    std::vector<double> fact(static_cast<std::size_t>(k) + 1, 1.0);
    for (int i = 1; i <= k; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i - 1)] * i;

    std::vector<double> phi(static_cast<std::size_t>(k), 0.0);
    for (std::uint32_t mask = 0; mask < n_subsets; ++mask) {
        const int size = std::popcount(mask);
        for (int i = 0; i < k; ++i) {
            if (mask & (1u << i)) continue;
            const double weight = fact[static_cast<std::size_t>(size)] *
                                  fact[static_cast<std::size_t>(k - size - 1)] /
                                  fact[static_cast<std::size_t>(k)];
            phi[static_cast<std::size_t>(i)] +=
                weight * (value[mask | (1u << i)] - value[mask]);
        }
    }

    ShapleyResult out;
    out.value_empty = value[0];
    out.value_full = value[n_subsets - 1];
    for (int i = 0; i < k; ++i) {
        out.ranked.emplace_back(features[static_cast<std::size_t>(i)],
                                phi[static_cast<std::size_t>(i)]);
    }
    std::sort(out.ranked.begin(), out.ranked.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second > b.second;
                  return a.first < b.first;
              });
    return out;
}

} // namespace triage::stats
