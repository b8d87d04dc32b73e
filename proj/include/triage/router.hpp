#pragma once

#include "triage/costmodel.hpp"
#include "triage/store.hpp"
#include "triage/task.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace triage::router {

struct Thresholds {
    double light = 9.0;    // health >= light  -> Light
    double standard = 5.0; // health >= standard -> Standard, else Heavy

    void validate() const; // ConfigError unless 1 <= standard <= light <= 10
};

// Worst-health-file rule: the minimum composite score across the task's
// files. A file's health comes from its inline value when present, else from
// the store. RoutingError if any file resolves nowhere.
double task_health(const TaskRecord& task, const store::FeatureStore* store);

Tier route_heuristic(double health, const Thresholds& t);

// Cheapest tier whose majority verdict passes; Heavy when none does.
Tier route_oracle(const TaskRecord& task);

enum class BaselineKind { AlwaysLight, AlwaysHeavy, Random };

// The random baseline derives its draw from (seed, trial, task_id), so it is
// reproducible and safe to evaluate in parallel.
Tier route_baseline(BaselineKind kind, const TaskRecord& task, std::uint64_t seed,
                    std::uint64_t trial = 0);

// ---------------------------------------------------------------------------
// trained classifier
// ---------------------------------------------------------------------------

// Feature layout: 8 sub-factors (worst-health file), composite, patch_size,
// coverage. Missing coverage is imputed with the training-split mean; tasks
// without store-backed files contribute zero sub-factors.
inline constexpr int kSubFactorCount = 8;
inline constexpr int kFeatureCount = kSubFactorCount + 3;

std::vector<std::string> feature_names();

struct FeatureRow {
    std::array<double, kFeatureCount> values{};
    bool coverage_present = false;
    bool health_resolved = false; // false -> err-above routing (Heavy)
};

FeatureRow task_features(const TaskRecord& task, const store::FeatureStore* store);

struct Hyperparams {
    double learning_rate = 0.1;
    int epochs = 500;
    double l2 = 0.01; // weights only; the intercept is free to fit the prior
    std::uint64_t seed = 42;
    double split_fraction = 0.7; // train share of the shuffled corpus
    std::vector<double> tau_grid = {0.5,  0.55, 0.6,  0.65, 0.7,
                                    0.75, 0.8,  0.85, 0.9,  0.95};
    cost::CostParams costs{};
};

// One-vs-rest logistic models predicting "majority-pass at tier t" for
// t in {Light, Standard}, on standardized features; tau picked on the
// validation split to maximize realized savings, ties resolved upward.
struct TierModel {
    std::vector<int> feature_indices; // subset of the canonical feature layout
    std::vector<double> w_light, w_standard;
    double b_light = 0.0, b_standard = 0.0;
    std::vector<double> mean, sd; // training-split standardization
    double coverage_mean = 0.0;   // raw-scale imputation value
    double tau = 0.5;
    Hyperparams hp;
    double validation_savings = 0.0;

    std::string to_json() const;
    static TierModel from_json(const std::string& text);
    void save(const std::filesystem::path& file) const;
    static TierModel load(const std::filesystem::path& file);
};

// Deterministic disjoint split: sort by task_id, seeded Fisher-Yates shuffle,
// first ceil(fraction * n) tasks go left.
std::pair<Corpus, Corpus> split_by_task_id(const Corpus& corpus, std::uint64_t seed,
                                           double fraction);

// feature_indices empty -> full canonical layout. Deterministic for a fixed
// (corpus, hyperparams, subset).
TierModel train_classifier(const Corpus& corpus, const store::FeatureStore* store,
                           const Hyperparams& hp,
                           const std::vector<int>& feature_indices = {});

struct ClassifierProbs {
    double p_light = 0.0;
    double p_standard = 0.0;
};

ClassifierProbs classifier_probs(const TierModel& model, const FeatureRow& row);

// Light if p_L >= tau, else Standard if p_S >= tau, else Heavy. Unresolvable
// features route Heavy (err above).
Tier route_classifier(const TierModel& model, const FeatureRow& row);

// ---------------------------------------------------------------------------

enum class PolicyKind {
    Heuristic,
    Classifier,
    Oracle,
    AlwaysLight,
    AlwaysHeavy,
    Random,
};

std::string_view policy_name(PolicyKind k);
PolicyKind policy_from_name(std::string_view name);

struct RoutingDecision {
    std::string task_id;
    Tier tier = Tier::Heavy;
    std::string policy;
    double health_used = 1.0;
    std::string rationale;
};

// Bundles a policy with everything it needs; builds cost::PolicyFn closures.
struct PolicyContext {
    Thresholds thresholds{};
    const store::FeatureStore* store = nullptr;
    const TierModel* model = nullptr;
    std::uint64_t seed = 42;
};

cost::PolicyFn make_policy(PolicyKind kind, const PolicyContext& ctx);

RoutingDecision decide(PolicyKind kind, const PolicyContext& ctx,
                       const TaskRecord& task);

} // namespace triage::router
