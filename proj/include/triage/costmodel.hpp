#pragma once

#include "triage/rng.hpp"
#include "triage/task.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace triage::cost {

struct CostParams {
    double light = 1.0;
    double standard = 3.0;
    double heavy = 15.0;

    void validate() const; // DomainError unless 0 < light < standard < heavy
    double of(Tier t) const {
        switch (t) {
            case Tier::Light: return light;
            case Tier::Standard: return standard;
            case Tier::Heavy: return heavy;
        }
        return heavy;
    }
};

struct RoutingMix {
    double r_light = 0.0;    // fraction routed to the light tier
    double r_standard = 0.0; // fraction routed to the standard tier
    double f_light = 0.0;    // misrouting rate at light (fails, falls back to heavy)
    double f_standard = 0.0;

    void validate() const;
};

// r_L(c_L + f_L c_H) + r_S(c_S + f_S c_H) + (1 - r_L - r_S) c_H
double expected_cost(const CostParams& p, const RoutingMix& m);

// r_L(c_H - c_L) + r_S(c_H - c_S) - (r_L f_L + r_S f_S) c_H
// Always equals heavy - expected_cost up to floating error.
double savings_vs_heavy(const CostParams& p, const RoutingMix& m);

struct GateResult {
    bool passed = false;
    double pass_rate = 0.0;
    double cost_ratio = 0.0; // c_L / c_H
};

// Strict: pass_rate must exceed the cost ratio.
GateResult cost_gate(double pass_rate, double c_light, double c_heavy);

// Monte Carlo over the abstract mix: each sampled task routes per (r_L, r_S)
// and fails per (f_L, f_S), with the fallback charged c_H. The sample mean
// converges to expected_cost.
struct MixSimResult {
    double mean_cost = 0.0;
    double stderr_cost = 0.0;
    long n = 0;
    RoutingMix empirical;
};

MixSimResult simulate_mix(const CostParams& p, const RoutingMix& m, long n_tasks,
                          Rng& rng);

// Policy decides a tier per task; `trial` feeds randomized policies so trials
// are independent yet reproducible.
using PolicyFn = std::function<Tier(const TaskRecord&, std::uint64_t trial)>;

struct PolicySimResult {
    double mean_cost = 0.0;             // per task, across all trials
    double stderr_cost = 0.0;
    double cost_per_success = 0.0;      // NaN when nothing succeeded
    double success_rate = 0.0;
    RoutingMix empirical;               // aggregated over all trials
    std::vector<double> trial_mean_cost;
    long trials = 0;
    long tasks = 0;
};

// Charges the routed tier; a failed non-heavy verdict additionally charges
// heavy (single-step fallback). A failed heavy task is paid for and counted
// unsuccessful. Outcomes must be present (SimulationError otherwise).
PolicySimResult simulate_policy(const Corpus& corpus, const PolicyFn& policy,
                                const CostParams& p, int n_trials = 1);

// Single-task accounting used by both the simulator and the evaluator.
struct TaskOutcomeCost {
    double cost = 0.0;
    bool success = false;
    bool routed_failed = false; // the routed tier's majority verdict failed
};
TaskOutcomeCost realize_task(const TaskRecord& task, Tier routed, const CostParams& p);

} // namespace triage::cost
