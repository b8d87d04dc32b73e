#pragma once

#include "triage/costmodel.hpp"
#include "triage/router.hpp"
#include "triage/stats.hpp"
#include "triage/task.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace triage::eval {

struct PolicyMetrics {
    long tasks = 0;
    long successes = 0;
    double success_rate = 0.0;
    double total_cost = 0.0;
    double realized_cost = 0.0;           // mean per task
    double cost_per_successful_task = 0.0; // NaN when nothing succeeded
    double expected_cost = 0.0;            // closed form on the realized mix
    double savings = 0.0;                  // heavy - realized_cost
    double triage_accuracy = 0.0;          // vs oracle tier
    double over_triage_rate = 0.0;
    double under_triage_rate = 0.0;
    cost::RoutingMix mix;
    stats::ConfusionMatrix confusion; // oracle x routed
};

struct PolicyReport {
    PolicyMetrics overall;
    std::map<std::string, PolicyMetrics> strata; // coverage bins + "unknown"
};

struct SignalGateReport {
    bool defined = false;
    double p_hat = 0.0;
    double threshold = 0.56;
    long n_pass = 0, n_fail = 0;
    bool bm_defined = false;
    stats::EffectResult bm; // supplementary
    bool band_defined = false;
    double band_p_hat = 0.0; // reverse grouping, reported alongside
    bool passed = false;
};

// Diagnostics only: per-run rates never feed a gate or a metric; verdicts are
// majority-vote everywhere.
struct RunDiagnostics {
    double light_run_pass_rate = 0.0;
    double standard_run_pass_rate = 0.0;
    double heavy_run_pass_rate = 0.0;
    long total_runs = 0;
};

struct CostGateReport {
    bool defined = false; // false when nothing routed light
    double pass_rate = 0.0;
    double cost_ratio = 0.0;
    long routed_light = 0, light_passed = 0;
    bool passed = false;
};

struct GateReport {
    CostGateReport cost;
    SignalGateReport signal;
    RunDiagnostics runs;
    bool go = false; // conjunction
};

struct EffectReport {
    bool defined = false;
    long n_high = 0, n_low = 0, n_pairs = 0;
    double caliper = 0.0;
    stats::EffectResult effect; // oracle-tier ordinals, low- vs high-health pairs
};

struct EvaluationReport {
    long corpus_size = 0;
    long eval_tasks = 0;
    long total_runs = 0;
    long oracle_all_fail = 0; // tasks with no passing tier (Heavy by convention)
    cost::CostParams costs;
    std::map<std::string, PolicyReport> policies;
    EffectReport effect;
    GateReport gates;

    std::string to_json() const;
    std::string to_text() const;
};

struct EvalConfig {
    router::Thresholds thresholds{};
    const store::FeatureStore* store = nullptr;
    const router::TierModel* model = nullptr; // pre-trained; else trained in-run
    router::Hyperparams hyperparams{};
    std::uint64_t seed = 42;
    std::array<double, 2> coverage_edges = {0.3, 0.7};
    double p_hat_threshold = 0.56;
    std::optional<double> cost_ratio_override;
    double caliper_fraction = 0.2; // of the pooled patch-size IQR
};

// Routes every task under every policy, applies majority verdicts with heavy
// fallback, and accumulates metrics, coverage strata, the matched-pair health
// effect and both pilot gates. When the classifier policy is requested
// without a pre-trained model, the corpus is split and every policy is scored
// on the held-out part so the comparison stays fair.
EvaluationReport evaluate(const Corpus& corpus,
                          const std::vector<router::PolicyKind>& policies,
                          const cost::CostParams& costs, const EvalConfig& config);

struct PilotConfig {
    int expected_size = 50;
    int min_size = 20;
    double p_hat_threshold = 0.56;
    router::Thresholds thresholds{};
    std::optional<double> cost_ratio_override;
    const store::FeatureStore* store = nullptr;
};

struct PilotReport {
    long corpus_size = 0;
    int expected_size = 50;
    GateReport gates;
    bool go = false;

    std::string to_json() const;
    std::string to_text() const;
};

// Cost gate: light-tier majority pass rate on heuristically light-routed
// tasks must strictly exceed c_L/c_H. Signal gate: p_hat of worst-file health
// for light-pass vs light-fail tasks must reach 0.56. GO iff both pass.
// Refuses corpora below min_size; larger corpora evaluate in full.
PilotReport pilot_gates(const Corpus& corpus, const cost::CostParams& costs,
                        const PilotConfig& config);

struct Rq1Variant {
    std::string name;
    std::vector<std::string> features;
    double held_out_mcc = 0.0;
    double savings = 0.0;
};

struct Rq1Report {
    std::vector<std::pair<std::string, double>> ranking; // Shapley, descending
    std::vector<Rq1Variant> variants;                    // top-k rows + composite_only

    std::string to_json() const;
    std::string to_text() const;
};

// Shapley-ranks the sub-factors on the training split, then retrains the tier
// classifier on the top-k sub-factors (k in k_list) and on the composite
// alone, comparing held-out MCC and realized savings. Consumes no additional
// outcome data. An empty k_list produces an empty table without training.
Rq1Report rq1_compare(const Corpus& corpus, const store::FeatureStore* store,
                      const std::vector<int>& k_list, const router::Hyperparams& hp,
                      const cost::CostParams& costs);

} // namespace triage::eval
