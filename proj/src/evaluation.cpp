#include "triage/evaluation.hpp"

#include "triage/errors.hpp"
#include "triage/outcomes.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace triage::eval {

using nlohmann::json;

namespace {

// NaN-safe: nlohmann serializes NaN as null, which is what reports want
json num(double v) { return json(v); }

std::string coverage_bin(const std::optional<double>& coverage,
                         const std::array<double, 2>& edges) {
    if (!coverage) return "unknown";
    char buf[48];
    if (*coverage < edges[0]) {
        std::snprintf(buf, sizeof(buf), "[0.0,%.2g)", edges[0]);
    } else if (*coverage < edges[1]) {
        std::snprintf(buf, sizeof(buf), "[%.2g,%.2g)", edges[0], edges[1]);
    } else {
        std::snprintf(buf, sizeof(buf), "[%.2g,1.0]", edges[1]);
    }
    return buf;
}

struct Accumulator {
    long tasks = 0;
    long successes = 0;
    double total_cost = 0.0;
    long routed_light = 0, routed_standard = 0;
    long failed_light = 0, failed_standard = 0;
    long accurate = 0, over = 0, under = 0;
    stats::ConfusionMatrix confusion;

    void add(Tier routed, Tier oracle, const cost::TaskOutcomeCost& oc) {
        ++tasks;
        total_cost += oc.cost;
        if (oc.success) ++successes;
        if (routed == Tier::Light) {
            ++routed_light;
            if (oc.routed_failed) ++failed_light;
        } else if (routed == Tier::Standard) {
            ++routed_standard;
            if (oc.routed_failed) ++failed_standard;
        }
        const int r = static_cast<int>(routed);
        const int o = static_cast<int>(oracle);
        confusion.at(o, r) += 1;
        if (r == o) ++accurate;
        else if (r > o) ++over;
        else ++under;
    }

    PolicyMetrics finalize(const cost::CostParams& costs) const {
        PolicyMetrics m;
        m.tasks = tasks;
        m.successes = successes;
        m.total_cost = total_cost;
        m.confusion = confusion;
        if (tasks == 0) {
            m.cost_per_successful_task = std::numeric_limits<double>::quiet_NaN();
            return m;
        }
        const double n = static_cast<double>(tasks);
        m.success_rate = static_cast<double>(successes) / n;
        m.realized_cost = total_cost / n;
        m.cost_per_successful_task =
            successes > 0 ? total_cost / static_cast<double>(successes)
                          : std::numeric_limits<double>::quiet_NaN();
        m.triage_accuracy = static_cast<double>(accurate) / n;
        m.over_triage_rate = static_cast<double>(over) / n;
        m.under_triage_rate = static_cast<double>(under) / n;
        m.mix.r_light = static_cast<double>(routed_light) / n;
        m.mix.r_standard = static_cast<double>(routed_standard) / n;
        m.mix.f_light = routed_light > 0 ? static_cast<double>(failed_light) /
                                               static_cast<double>(routed_light)
                                         : 0.0;
        m.mix.f_standard = routed_standard > 0
                               ? static_cast<double>(failed_standard) /
                                     static_cast<double>(routed_standard)
                               : 0.0;
        m.expected_cost = cost::expected_cost(costs, m.mix);
        m.savings = costs.heavy - m.realized_cost;
        return m;
    }
};

json mix_to_json(const cost::RoutingMix& m) {
    return {{"r_light", m.r_light},
            {"r_standard", m.r_standard},
            {"f_light", m.f_light},
            {"f_standard", m.f_standard}};
}

json metrics_to_json(const PolicyMetrics& m) {
    json cm = json::array();
    for (int i = 0; i < 3; ++i) {
        cm.push_back({m.confusion.at(i, 0), m.confusion.at(i, 1), m.confusion.at(i, 2)});
    }
    return {{"tasks", m.tasks},
            {"successes", m.successes},
            {"success_rate", num(m.success_rate)},
            {"total_cost", num(m.total_cost)},
            {"realized_cost", num(m.realized_cost)},
            {"cost_per_successful_task", num(m.cost_per_successful_task)},
            {"expected_cost", num(m.expected_cost)},
            {"savings_vs_heavy", num(m.savings)},
            {"triage_accuracy", num(m.triage_accuracy)},
            {"over_triage_rate", num(m.over_triage_rate)},
            {"under_triage_rate", num(m.under_triage_rate)},
            {"mix", mix_to_json(m.mix)},
            {"confusion", cm}};
}

json gates_to_json(const GateReport& g) {
    json cost_gate = {{"defined", g.cost.defined},
                      {"pass_rate", num(g.cost.pass_rate)},
                      {"cost_ratio", num(g.cost.cost_ratio)},
                      {"routed_light", g.cost.routed_light},
                      {"light_passed", g.cost.light_passed},
                      {"passed", g.cost.passed}};
    json signal_gate = {{"defined", g.signal.defined},
                        {"p_hat", num(g.signal.p_hat)},
                        {"threshold", num(g.signal.threshold)},
                        {"n_light_pass", g.signal.n_pass},
                        {"n_light_fail", g.signal.n_fail},
                        {"passed", g.signal.passed}};
    if (g.signal.bm_defined) {
        signal_gate["bm_statistic"] = num(g.signal.bm.bm_statistic);
        signal_gate["bm_df"] = num(g.signal.bm.bm_df);
        signal_gate["bm_p_value"] = num(g.signal.bm.bm_p_value);
        signal_gate["bm_degenerate"] = g.signal.bm.degenerate;
    }
    if (g.signal.band_defined) {
        signal_gate["band_grouped_p_hat"] = num(g.signal.band_p_hat);
    }
    json diagnostics = {{"light_run_pass_rate", num(g.runs.light_run_pass_rate)},
                        {"standard_run_pass_rate", num(g.runs.standard_run_pass_rate)},
                        {"heavy_run_pass_rate", num(g.runs.heavy_run_pass_rate)},
                        {"total_runs", g.runs.total_runs}};
    return {{"cost_gate", cost_gate},
            {"signal_gate", signal_gate},
            {"run_diagnostics", diagnostics},
            {"verdict", g.go ? "GO" : "NO-GO"}};
}

// both pilot gates over one set of tasks
GateReport compute_gates(const std::vector<const TaskRecord*>& tasks,
                         const cost::CostParams& costs,
                         const router::Thresholds& thresholds,
                         const store::FeatureStore* store, double p_hat_threshold,
                         const std::optional<double>& ratio_override) {
    GateReport g;
    g.signal.threshold = p_hat_threshold;

    std::vector<double> health_pass, health_fail;
    std::vector<double> verdict_healthy, verdict_unhealthy;
    long routed_light = 0, light_passed = 0;
    std::array<long, 3> run_passes{}, run_counts{};

    for (const TaskRecord* t : tasks) {
        for (Tier tier : kAllTiers) {
            const auto& runs = t->outcomes->at(tier);
            run_counts[static_cast<std::size_t>(tier)] += static_cast<long>(runs.size());
            for (bool r : runs)
                if (r) ++run_passes[static_cast<std::size_t>(tier)];
        }
        const bool light_pass = outcomes::tier_verdict(*t, Tier::Light);
        double health = 0.0;
        bool health_known = false;
        try {
            health = router::task_health(*t, store);
            health_known = true;
        } catch (const RoutingError&) {
        }
        if (health_known) {
            (light_pass ? health_pass : health_fail).push_back(health);
            if (router::route_heuristic(health, thresholds) == Tier::Light) {
                ++routed_light;
                if (light_pass) ++light_passed;
            }
            const health::Band band = health::band_of(health);
            if (band == health::Band::Healthy) {
                verdict_healthy.push_back(light_pass ? 1.0 : 0.0);
            } else if (band == health::Band::Unhealthy) {
                verdict_unhealthy.push_back(light_pass ? 1.0 : 0.0);
            }
        }
    }

    g.cost.routed_light = routed_light;
    g.cost.light_passed = light_passed;
    if (routed_light > 0) {
        g.cost.defined = true;
        const double rate =
            static_cast<double>(light_passed) / static_cast<double>(routed_light);
        const double ratio =
            ratio_override ? *ratio_override : costs.light / costs.heavy;
        g.cost.pass_rate = rate;
        g.cost.cost_ratio = ratio;
        g.cost.passed = rate > ratio; // strict
    } else {
        g.cost.cost_ratio =
            ratio_override ? *ratio_override : costs.light / costs.heavy;
    }

    g.signal.n_pass = static_cast<long>(health_pass.size());
    g.signal.n_fail = static_cast<long>(health_fail.size());
    if (!health_pass.empty() && !health_fail.empty()) {
        g.signal.defined = true;
        g.signal.p_hat = stats::prob_superiority(health_pass, health_fail);
        g.signal.passed = g.signal.p_hat >= p_hat_threshold;
        if (health_pass.size() >= 2 && health_fail.size() >= 2) {
            g.signal.bm_defined = true;
            g.signal.bm = stats::brunner_munzel(health_pass, health_fail);
        }
    }
    if (!verdict_healthy.empty() && !verdict_unhealthy.empty()) {
        g.signal.band_defined = true;
        g.signal.band_p_hat =
            stats::prob_superiority(verdict_healthy, verdict_unhealthy);
    }

    auto rate = [&](Tier t) {
        const long n = run_counts[static_cast<std::size_t>(t)];
        return n > 0 ? static_cast<double>(run_passes[static_cast<std::size_t>(t)]) /
                           static_cast<double>(n)
                     : 0.0;
    };
    g.runs.light_run_pass_rate = rate(Tier::Light);
    g.runs.standard_run_pass_rate = rate(Tier::Standard);
    g.runs.heavy_run_pass_rate = rate(Tier::Heavy);
    g.runs.total_runs = run_counts[0] + run_counts[1] + run_counts[2];

    g.go = g.cost.passed && g.signal.passed;
    return g;
}

EffectReport compute_effect(const std::vector<const TaskRecord*>& tasks,
                            const store::FeatureStore* store,
                            double caliper_fraction) {
    EffectReport report;
    std::vector<stats::MatchUnit> high, low;
    std::vector<double> proxies;
    std::map<std::string, const TaskRecord*> by_id;
    for (const TaskRecord* t : tasks) {
        double health;
        try {
            health = router::task_health(*t, store);
        } catch (const RoutingError&) {
            continue;
        }
        const health::Band band = health::band_of(health);
        if (band == health::Band::Healthy) {
            high.push_back({t->task_id, static_cast<double>(t->patch_size)});
        } else if (band == health::Band::Unhealthy) {
            low.push_back({t->task_id, static_cast<double>(t->patch_size)});
        } else {
            continue;
        }
        proxies.push_back(static_cast<double>(t->patch_size));
        by_id[t->task_id] = t;
    }
    report.n_high = static_cast<long>(high.size());
    report.n_low = static_cast<long>(low.size());
    if (high.empty() || low.empty()) return report;

    report.caliper = caliper_fraction / 0.2 * stats::default_caliper(proxies);
    const stats::MatchResult match = stats::matched_pairs(high, low, report.caliper);
    report.n_pairs = static_cast<long>(match.pairs.size());
    if (match.pairs.size() < 2) return report;

    // compare the oracle-required tier across the matched groups
    std::vector<double> tier_high, tier_low;
    for (const auto& [high_id, low_id] : match.pairs) {
        tier_high.push_back(
            static_cast<double>(router::route_oracle(*by_id.at(high_id))));
        tier_low.push_back(
            static_cast<double>(router::route_oracle(*by_id.at(low_id))));
    }
    report.defined = true;
    // p_hat > 0.5 means low-health tasks need higher tiers
    report.effect = stats::brunner_munzel(tier_low, tier_high);
    return report;
}

} // namespace

EvaluationReport evaluate(const Corpus& corpus,
                          const std::vector<router::PolicyKind>& policies,
                          const cost::CostParams& costs, const EvalConfig& config) {
    costs.validate();
    config.thresholds.validate();
    if (corpus.tasks.empty()) throw DataError("empty corpus");
    for (const TaskRecord& t : corpus.tasks) {
        if (!t.outcomes) {
            throw DataError("corpus without outcomes: task " + t.task_id);
        }
    }

    EvaluationReport report;
    report.corpus_size = static_cast<long>(corpus.size());
    report.total_runs = static_cast<long>(corpus.total_runs());
    report.costs = costs;

    const bool wants_classifier =
        std::find(policies.begin(), policies.end(), router::PolicyKind::Classifier) !=
        policies.end();

    router::TierModel trained;
    const router::TierModel* model = config.model;
    Corpus holdout;
    const Corpus* eval_corpus = &corpus;
    if (wants_classifier && model == nullptr) {
        router::Hyperparams hp = config.hyperparams;
        hp.costs = costs;
        auto [train_part, holdout_part] =
            router::split_by_task_id(corpus, config.seed, hp.split_fraction);
        if (holdout_part.tasks.empty()) {
            throw TrainingError("corpus too small to hold out an evaluation split");
        }
        trained = router::train_classifier(train_part, config.store, hp);
        model = &trained;
        holdout = std::move(holdout_part);
        eval_corpus = &holdout;
    }

    std::vector<const TaskRecord*> tasks;
    for (const TaskRecord& t : eval_corpus->tasks) tasks.push_back(&t);
    std::sort(tasks.begin(), tasks.end(),
              [](const TaskRecord* a, const TaskRecord* b) {
                  return a->task_id < b->task_id;
              });
    report.eval_tasks = static_cast<long>(tasks.size());

    std::vector<Tier> oracle_tier;
    oracle_tier.reserve(tasks.size());
    for (const TaskRecord* t : tasks) {
        const Tier o = router::route_oracle(*t);
        if (o == Tier::Heavy && !outcomes::tier_verdict(*t, Tier::Heavy)) {
            ++report.oracle_all_fail;
        }
        oracle_tier.push_back(o);
    }

    for (router::PolicyKind kind : policies) {
        router::PolicyContext ctx;
        ctx.thresholds = config.thresholds;
        ctx.store = config.store;
        ctx.model = model;
        ctx.seed = config.seed;
        const cost::PolicyFn policy = router::make_policy(kind, ctx);

        Accumulator overall;
        std::map<std::string, Accumulator> strata;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            const TaskRecord& task = *tasks[i];
            const Tier routed = policy(task, 0);
            const cost::TaskOutcomeCost oc = cost::realize_task(task, routed, costs);
            overall.add(routed, oracle_tier[i], oc);
            strata[coverage_bin(task.coverage, config.coverage_edges)].add(
                routed, oracle_tier[i], oc);
        }
        PolicyReport pr;
        pr.overall = overall.finalize(costs);
        for (const auto& [name, acc] : strata) {
            pr.strata.emplace(name, acc.finalize(costs));
        }
        report.policies.emplace(std::string(router::policy_name(kind)), std::move(pr));
    }

    report.effect = compute_effect(tasks, config.store, config.caliper_fraction);
    report.gates = compute_gates(tasks, costs, config.thresholds, config.store,
                                 config.p_hat_threshold, config.cost_ratio_override);
    return report;
}

std::string EvaluationReport::to_json() const {
    json j;
    j["schema_version"] = 1;
    j["kind"] = "triage-evaluation-report";
    j["corpus_size"] = corpus_size;
    j["eval_tasks"] = eval_tasks;
    j["total_runs"] = total_runs;
    j["oracle_all_fail"] = oracle_all_fail;
    j["costs"] = {costs.light, costs.standard, costs.heavy};
    json pols;
    for (const auto& [name, pr] : policies) {
        json p = metrics_to_json(pr.overall);
        json strata;
        for (const auto& [bin, m] : pr.strata) strata[bin] = metrics_to_json(m);
        p["strata"] = strata;
        pols[name] = p;
    }
    j["policies"] = pols;
    json eff = {{"defined", effect.defined},
                {"n_high", effect.n_high},
                {"n_low", effect.n_low},
                {"n_pairs", effect.n_pairs},
                {"caliper", num(effect.caliper)}};
    if (effect.defined) {
        eff["p_hat"] = num(effect.effect.p_hat);
        eff["bm_statistic"] = num(effect.effect.bm_statistic);
        eff["bm_df"] = num(effect.effect.bm_df);
        eff["bm_p_value"] = num(effect.effect.bm_p_value);
        eff["bm_degenerate"] = effect.effect.degenerate;
    }
    j["matched_pair_effect"] = eff;
    j["gates"] = gates_to_json(gates);
    return j.dump(2) + "\n";
}

std::string EvaluationReport::to_text() const {
    std::ostringstream out;
    char line[256];
    out << "tasks evaluated: " << eval_tasks << " of " << corpus_size
        << " (runs: " << total_runs << ", all-tiers-fail: " << oracle_all_fail
        << ")\n";
    std::snprintf(line, sizeof(line), "%-13s %8s %8s %8s %8s %8s %8s %8s\n",
                  "policy", "success", "cost", "cost/ok", "accuracy", "over",
                  "under", "savings");
    out << line;
    for (const auto& [name, pr] : policies) {
        const PolicyMetrics& m = pr.overall;
        std::snprintf(line, sizeof(line),
                      "%-13s %8.3f %8.3f %8.3f %8.3f %8.3f %8.3f %8.3f\n",
                      name.c_str(), m.success_rate, m.realized_cost,
                      m.cost_per_successful_task, m.triage_accuracy,
                      m.over_triage_rate, m.under_triage_rate, m.savings);
        out << line;
    }
    if (effect.defined) {
        std::snprintf(line, sizeof(line),
                      "matched pairs: %ld (high %ld / low %ld), p_hat=%.4f, "
                      "BM p=%.4g\n",
                      effect.n_pairs, effect.n_high, effect.n_low,
                      effect.effect.p_hat, effect.effect.bm_p_value);
        out << line;
    }
    out << "cost gate: "
        << (gates.cost.defined
                ? (gates.cost.passed ? "pass" : "fail")
                : "undefined (no light-routed tasks)")
        << ", signal gate: "
        << (gates.signal.defined ? (gates.signal.passed ? "pass" : "fail")
                                 : "undefined")
        << ", verdict: " << (gates.go ? "GO" : "NO-GO") << "\n";
    return out.str();
}

PilotReport pilot_gates(const Corpus& corpus, const cost::CostParams& costs,
                        const PilotConfig& config) {
    costs.validate();
    config.thresholds.validate();
    if (static_cast<int>(corpus.size()) < config.min_size) {
        throw DataError("pilot corpus has " + std::to_string(corpus.size()) +
                        " tasks, below the minimum of " +
                        std::to_string(config.min_size));
    }
    for (const TaskRecord& t : corpus.tasks) {
        if (!t.outcomes) {
            throw DataError("pilot corpus without outcomes: task " + t.task_id);
        }
    }
    std::vector<const TaskRecord*> tasks;
    for (const TaskRecord& t : corpus.tasks) tasks.push_back(&t);
    std::sort(tasks.begin(), tasks.end(),
              [](const TaskRecord* a, const TaskRecord* b) {
                  return a->task_id < b->task_id;
              });

    PilotReport report;
    report.corpus_size = static_cast<long>(corpus.size());
    report.expected_size = config.expected_size;
    report.gates = compute_gates(tasks, costs, config.thresholds, config.store,
                                 config.p_hat_threshold, config.cost_ratio_override);
    report.go = report.gates.go;
    return report;
}

std::string PilotReport::to_json() const {
    json j;
    j["schema_version"] = 1;
    j["kind"] = "triage-pilot-report";
    j["corpus_size"] = corpus_size;
    j["configured_size"] = expected_size;
    j["gates"] = gates_to_json(gates);
    j["verdict"] = go ? "GO" : "NO-GO";
    return j.dump(2) + "\n";
}

std::string PilotReport::to_text() const {
    std::ostringstream out;
    char line[256];
    out << "pilot: " << corpus_size << " tasks (configured size "
        << expected_size << ")\n";
    if (gates.cost.defined) {
        std::snprintf(line, sizeof(line),
                      "cost gate:   pass_rate=%.4f vs ratio=%.4f on %ld light-routed "
                      "tasks -> %s\n",
                      gates.cost.pass_rate, gates.cost.cost_ratio,
                      gates.cost.routed_light, gates.cost.passed ? "pass" : "fail");
    } else {
        std::snprintf(line, sizeof(line),
                      "cost gate:   undefined (no tasks routed light) -> fail\n");
    }
    out << line;
    if (gates.signal.defined) {
        std::snprintf(line, sizeof(line),
                      "signal gate: p_hat=%.4f vs threshold=%.2f (pass %ld / fail %ld"
                      ") -> %s\n",
                      gates.signal.p_hat, gates.signal.threshold, gates.signal.n_pass,
                      gates.signal.n_fail, gates.signal.passed ? "pass" : "fail");
        out << line;
        if (gates.signal.bm_defined) {
            std::snprintf(line, sizeof(line),
                          "             BM statistic=%.4f df=%.2f p=%.4g (supplementary)\n",
                          gates.signal.bm.bm_statistic, gates.signal.bm.bm_df,
                          gates.signal.bm.bm_p_value);
            out << line;
        }
    } else {
        out << "signal gate: undefined (needs both light-pass and light-fail tasks)"
               " -> fail\n";
    }
    out << "verdict: " << (go ? "GO" : "NO-GO") << "\n";
    return out.str();
}

Rq1Report rq1_compare(const Corpus& corpus, const store::FeatureStore* store,
                      const std::vector<int>& k_list, const router::Hyperparams& hp,
                      const cost::CostParams& costs) {
    Rq1Report report;
    if (k_list.empty()) return report;
    for (int k : k_list) {
        if (k < 1 || k > router::kSubFactorCount) {
            throw DataError("k=" + std::to_string(k) + " exceeds the " +
                            std::to_string(router::kSubFactorCount) +
                            " available sub-factors");
        }
    }

    router::Hyperparams train_hp = hp;
    train_hp.costs = costs;

    const auto [train_corpus, holdout] =
        router::split_by_task_id(corpus, hp.seed, hp.split_fraction);
    if (holdout.tasks.empty()) throw DataError("corpus too small for a held-out split");

    // Shapley ranking on the training split; the value function retrains the
    // tier classifier on a sub-factor subset and scores MCC on an internal
    // validation slice, leaving the held-out split untouched.
    const auto [fit_part, val_part] =
        router::split_by_task_id(train_corpus, hp.seed + 1, hp.split_fraction);
    if (val_part.tasks.empty()) throw DataError("training split too small for RQ1");

    auto mcc_of = [&](const router::TierModel& model, const Corpus& on) {
        stats::ConfusionMatrix cm;
        for (const TaskRecord& t : on.tasks) {
            const Tier oracle = router::route_oracle(t);
            const Tier routed =
                router::route_classifier(model, router::task_features(t, store));
            cm.at(static_cast<int>(oracle), static_cast<int>(routed)) += 1;
        }
        return stats::mcc(cm);
    };

    std::vector<std::string> names;
    for (std::string_view n : health::kSubFactorNames) names.emplace_back(n);

    stats::SubsetValueFn value_fn = [&](const std::vector<int>& subset) {
        if (subset.empty()) return 0.0; // no features, no skill
        const router::TierModel model =
            router::train_classifier(fit_part, store, train_hp, subset);
        return mcc_of(model, val_part);
    };
    const stats::ShapleyResult shapley = stats::shapley_importance(names, value_fn);
    report.ranking = shapley.ranked;

    auto evaluate_variant = [&](const std::string& name,
                                const std::vector<int>& indices) {
        Rq1Variant v;
        v.name = name;
        const auto all_names = router::feature_names();
        for (int fi : indices) v.features.push_back(all_names[static_cast<std::size_t>(fi)]);
        const router::TierModel model =
            router::train_classifier(train_corpus, store, train_hp, indices);
        v.held_out_mcc = mcc_of(model, holdout);
        double total = 0.0;
        for (const TaskRecord& t : holdout.tasks) {
            const Tier routed =
                router::route_classifier(model, router::task_features(t, store));
            total += cost::realize_task(t, routed, costs).cost;
        }
        v.savings = costs.heavy - total / static_cast<double>(holdout.tasks.size());
        report.variants.push_back(std::move(v));
    };

    std::map<std::string, int> index_of_name;
    for (int i = 0; i < router::kSubFactorCount; ++i) {
        index_of_name[std::string(health::kSubFactorNames[static_cast<std::size_t>(i)])] = i;
    }
    for (int k : k_list) {
        std::vector<int> indices;
        for (int i = 0; i < k; ++i) {
            indices.push_back(index_of_name.at(report.ranking[static_cast<std::size_t>(i)].first));
        }
        std::sort(indices.begin(), indices.end());
        evaluate_variant("top" + std::to_string(k), indices);
    }
    evaluate_variant("composite_only", {router::kSubFactorCount});
    return report;
}

std::string Rq1Report::to_json() const {
    json j;
    j["schema_version"] = 1;
    j["kind"] = "triage-rq1-report";
    json rank = json::array();
    for (const auto& [name, contribution] : ranking) {
        rank.push_back({{"feature", name}, {"contribution", num(contribution)}});
    }
    j["shapley_ranking"] = rank;
    json vars = json::array();
    for (const Rq1Variant& v : variants) {
        vars.push_back({{"name", v.name},
                        {"features", v.features},
                        {"held_out_mcc", num(v.held_out_mcc)},
                        {"savings_vs_heavy", num(v.savings)}});
    }
    j["variants"] = vars;
    return j.dump(2) + "\n";
}

std::string Rq1Report::to_text() const {
    std::ostringstream out;
    char line[256];
    out << "shapley ranking (training split):\n";
    for (const auto& [name, contribution] : ranking) {
        std::snprintf(line, sizeof(line), "  %-22s %+.6f\n", name.c_str(), contribution);
        out << line;
    }
    std::snprintf(line, sizeof(line), "%-16s %12s %12s\n", "variant", "held-out MCC",
                  "savings");
    out << line;
    for (const Rq1Variant& v : variants) {
        std::snprintf(line, sizeof(line), "%-16s %12.4f %12.4f\n", v.name.c_str(),
                      v.held_out_mcc, v.savings);
        out << line;
    }
    return out.str();
}

} // namespace triage::eval
