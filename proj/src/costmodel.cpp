#include "triage/costmodel.hpp"

#include "triage/errors.hpp"
#include "triage/outcomes.hpp"

#include <cmath>

namespace triage::cost {

void CostParams::validate() const {
    if (!(0.0 < light && light < standard && standard < heavy)) {
        throw DomainError("costs must satisfy 0 < light < standard < heavy");
    }
}

void RoutingMix::validate() const {
    if (r_light < 0.0 || r_standard < 0.0 || r_light + r_standard > 1.0 + 1e-12) {
        throw DomainError("routing fractions must be non-negative with r_L + r_S <= 1");
    }
    if (f_light < 0.0 || f_light > 1.0 || f_standard < 0.0 || f_standard > 1.0) {
        throw DomainError("misrouting rates must lie in [0,1]");
    }
}

double expected_cost(const CostParams& p, const RoutingMix& m) {
    p.validate();
    m.validate();
    return m.r_light * (p.light + m.f_light * p.heavy) +
           m.r_standard * (p.standard + m.f_standard * p.heavy) +
           (1.0 - m.r_light - m.r_standard) * p.heavy;
}

double savings_vs_heavy(const CostParams& p, const RoutingMix& m) {
    p.validate();
    m.validate();
    return m.r_light * (p.heavy - p.light) + m.r_standard * (p.heavy - p.standard) -
           (m.r_light * m.f_light + m.r_standard * m.f_standard) * p.heavy;
}

GateResult cost_gate(double pass_rate, double c_light, double c_heavy) {
    if (pass_rate < 0.0 || pass_rate > 1.0) {
        throw DomainError("pass rate must lie in [0,1]");
    }
    if (!(0.0 < c_light && c_light < c_heavy)) {
        throw DomainError("cost gate needs 0 < c_light < c_heavy");
    }
    GateResult g;
    g.pass_rate = pass_rate;
    g.cost_ratio = c_light / c_heavy;
    g.passed = pass_rate > g.cost_ratio;
    return g;
}

MixSimResult simulate_mix(const CostParams& p, const RoutingMix& m, long n_tasks,
                          Rng& rng) {
    p.validate();
    m.validate();
    if (n_tasks < 1) throw SimulationError("n_tasks must be >= 1");
    double sum = 0.0, sum_sq = 0.0;
    long n_light = 0, n_standard = 0, fail_light = 0, fail_standard = 0;
    for (long i = 0; i < n_tasks; ++i) {
        const double u = rng.uniform01();
        double cost;
        if (u < m.r_light) {
            ++n_light;
            cost = p.light;
            if (rng.bernoulli(m.f_light)) {
                ++fail_light;
                cost += p.heavy;
            }
        } else if (u < m.r_light + m.r_standard) {
            ++n_standard;
            cost = p.standard;
            if (rng.bernoulli(m.f_standard)) {
                ++fail_standard;
                cost += p.heavy;
            }
        } else {
            cost = p.heavy;
        }
        sum += cost;
        sum_sq += cost * cost;
    }
    MixSimResult r;
    r.n = n_tasks;
    r.mean_cost = sum / static_cast<double>(n_tasks);
    const double var =
        std::max(0.0, sum_sq / static_cast<double>(n_tasks) - r.mean_cost * r.mean_cost);
    r.stderr_cost = std::sqrt(var / static_cast<double>(n_tasks));
    r.empirical.r_light = static_cast<double>(n_light) / static_cast<double>(n_tasks);
    r.empirical.r_standard =
        static_cast<double>(n_standard) / static_cast<double>(n_tasks);
    r.empirical.f_light =
        n_light > 0 ? static_cast<double>(fail_light) / static_cast<double>(n_light) : 0.0;
    r.empirical.f_standard =
        n_standard > 0
            ? static_cast<double>(fail_standard) / static_cast<double>(n_standard)
            : 0.0;
    return r;
}

TaskOutcomeCost realize_task(const TaskRecord& task, Tier routed, const CostParams& p) {
    if (!task.outcomes) {
        throw SimulationError("task " + task.task_id + " has no outcomes to simulate");
    }
    TaskOutcomeCost out;
    const bool routed_pass = outcomes::majority_pass(task.outcomes->at(routed));
    out.cost = p.of(routed);
    if (routed_pass) {
        out.success = true;
    } else {
        out.routed_failed = true;
        if (routed != Tier::Heavy) {
            out.cost += p.heavy; // single-step fallback, charged unconditionally
            out.success = outcomes::majority_pass(task.outcomes->at(Tier::Heavy));
        }
    }
    return out;
}

PolicySimResult simulate_policy(const Corpus& corpus, const PolicyFn& policy,
                                const CostParams& p, int n_trials) {
    p.validate();
    if (n_trials < 1) throw SimulationError("n_trials must be >= 1");
    if (corpus.tasks.empty()) throw SimulationError("empty corpus");

    PolicySimResult r;
    r.trials = n_trials;
    r.tasks = static_cast<long>(corpus.tasks.size());
    double sum = 0.0, sum_sq = 0.0;
    long successes = 0;
    long n_light = 0, n_standard = 0, fail_light = 0, fail_standard = 0;

    for (int trial = 0; trial < n_trials; ++trial) {
        double trial_sum = 0.0;
        for (const TaskRecord& task : corpus.tasks) {
            const Tier routed = policy(task, static_cast<std::uint64_t>(trial));
            const TaskOutcomeCost oc = realize_task(task, routed, p);
            trial_sum += oc.cost;
            sum_sq += oc.cost * oc.cost;
            if (oc.success) ++successes;
            if (routed == Tier::Light) {
                ++n_light;
                if (oc.routed_failed) ++fail_light;
            } else if (routed == Tier::Standard) {
                ++n_standard;
                if (oc.routed_failed) ++fail_standard;
            }
        }
        r.trial_mean_cost.push_back(trial_sum / static_cast<double>(r.tasks));
        sum += trial_sum;
    }

    const double n = static_cast<double>(r.tasks) * static_cast<double>(n_trials);
    r.mean_cost = sum / n;
    const double var = std::max(0.0, sum_sq / n - r.mean_cost * r.mean_cost);
    r.stderr_cost = std::sqrt(var / n);
    r.success_rate = static_cast<double>(successes) / n;
    r.cost_per_success = successes > 0
                             ? sum / static_cast<double>(successes)
                             : std::numeric_limits<double>::quiet_NaN();
    r.empirical.r_light = static_cast<double>(n_light) / n;
    r.empirical.r_standard = static_cast<double>(n_standard) / n;
    r.empirical.f_light =
        n_light > 0 ? static_cast<double>(fail_light) / static_cast<double>(n_light) : 0.0;
    r.empirical.f_standard =
        n_standard > 0
            ? static_cast<double>(fail_standard) / static_cast<double>(n_standard)
            : 0.0;
    return r;
}

} // namespace triage::cost
