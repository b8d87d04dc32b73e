#include "triage/router.hpp"

#include "triage/errors.hpp"
#include "triage/io_util.hpp"
#include "triage/outcomes.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace triage::router {

using nlohmann::json;

void Thresholds::validate() const {
    if (!(1.0 <= standard && standard <= light && light <= 10.0)) {
        throw ConfigError("thresholds must satisfy 1 <= t_standard <= t_light <= 10");
    }
}

double task_health(const TaskRecord& task, const store::FeatureStore* store) {
    if (task.files.empty()) {
        throw RoutingError("task " + task.task_id + " references no files");
    }
    double worst = 11.0;
    for (const FileRef& f : task.files) {
        double h;
        if (f.health) {
            h = *f.health;
        } else if (store != nullptr) {
            const store::FeatureRecord* rec = store->find(f.path);
            if (rec == nullptr) {
                throw RoutingError("task " + task.task_id + ": file not in store: " +
                                   f.path);
            }
            h = rec->score.value;
        } else {
            throw RoutingError("task " + task.task_id + ": no health for file " +
                               f.path + " and no store given");
        }
        worst = std::min(worst, h);
    }
    return worst;
}

Tier route_heuristic(double health, const Thresholds& t) {
    t.validate();
    if (health >= t.light) return Tier::Light;
    if (health >= t.standard) return Tier::Standard;
    return Tier::Heavy;
}

Tier route_oracle(const TaskRecord& task) {
    if (!task.outcomes) {
        throw RoutingError("oracle routing needs outcomes for task " + task.task_id);
    }
    for (Tier t : kAllTiers) {
        if (outcomes::majority_pass(task.outcomes->at(t))) return t;
    }
    return Tier::Heavy; // all tiers fail: heavy by convention
}

Tier route_baseline(BaselineKind kind, const TaskRecord& task, std::uint64_t seed,
                    std::uint64_t trial) {
    switch (kind) {
        case BaselineKind::AlwaysLight: return Tier::Light;
        case BaselineKind::AlwaysHeavy: return Tier::Heavy;
        case BaselineKind::Random: {
            Rng rng(Rng::mix(Rng::mix(seed, trial), io::fnv1a64(task.task_id)));
            return static_cast<Tier>(rng.below(3));
        }
    }
    return Tier::Heavy;
}

std::vector<std::string> feature_names() {
    std::vector<std::string> names;
    for (std::string_view n : health::kSubFactorNames) names.emplace_back(n);
    names.emplace_back("composite");
    names.emplace_back("patch_size");
    names.emplace_back("coverage");
    return names;
}

FeatureRow task_features(const TaskRecord& task, const store::FeatureStore* store) {
    FeatureRow row;
    row.values.fill(0.0);
    // pick the worst-health file; prefer its store record for sub-factors
    double worst = 11.0;
    const store::FeatureRecord* worst_rec = nullptr;
    for (const FileRef& f : task.files) {
        const store::FeatureRecord* rec =
            store != nullptr ? store->find(f.path) : nullptr;
        std::optional<double> h = f.health;
        if (!h && rec != nullptr) h = rec->score.value;
        if (!h) continue;
        if (*h < worst) {
            worst = *h;
            worst_rec = rec;
        }
    }
    if (worst > 10.5) return row; // nothing resolved
    row.health_resolved = true;
    if (worst_rec != nullptr) {
        const auto sf = health::sub_factor_values(worst_rec->sub_factors);
        for (int i = 0; i < kSubFactorCount; ++i) row.values[static_cast<std::size_t>(i)] = sf[static_cast<std::size_t>(i)];
    }
    row.values[kSubFactorCount] = worst;
    row.values[kSubFactorCount + 1] = static_cast<double>(task.patch_size);
    if (task.coverage) {
        row.values[kSubFactorCount + 2] = *task.coverage;
        row.coverage_present = true;
    }
    return row;
}

namespace {

double sigmoid(double z) {
    if (z >= 0.0) {
        const double e = std::exp(-std::min(z, 40.0));
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(std::max(z, -40.0));
    return e / (1.0 + e);
}

struct LogisticFit {
    std::vector<double> w;
    double b = 0.0;
};

// full-batch gradient descent, zero init: deterministic for fixed inputs
LogisticFit fit_logistic(const std::vector<std::vector<double>>& x,
                         const std::vector<int>& y, const Hyperparams& hp) {
    const std::size_t n = x.size();
    const std::size_t d = n > 0 ? x[0].size() : 0;
    LogisticFit fit;
    fit.w.assign(d, 0.0);
    std::vector<double> grad(d);
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = fit.b;
            for (std::size_t j = 0; j < d; ++j) z += fit.w[j] * x[i][j];
            const double err = sigmoid(z) - static_cast<double>(y[i]);
            for (std::size_t j = 0; j < d; ++j) grad[j] += err * x[i][j];
            grad_b += err;
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t j = 0; j < d; ++j) {
            fit.w[j] -= hp.learning_rate * (grad[j] * inv_n + hp.l2 * fit.w[j]);
        }
        fit.b -= hp.learning_rate * grad_b * inv_n;
    }
    return fit;
}

std::vector<double> standardized(const TierModel& model, const FeatureRow& row) {
    std::vector<double> x(model.feature_indices.size());
    for (std::size_t j = 0; j < model.feature_indices.size(); ++j) {
        const int fi = model.feature_indices[j];
        double raw = row.values[static_cast<std::size_t>(fi)];
        if (fi == kSubFactorCount + 2 && !row.coverage_present) {
            raw = model.coverage_mean;
        }
        x[j] = (raw - model.mean[j]) / model.sd[j];
    }
    return x;
}

} // namespace

ClassifierProbs classifier_probs(const TierModel& model, const FeatureRow& row) {
    const std::vector<double> x = standardized(model, row);
    if (x.size() != model.w_light.size()) {
        throw RoutingError("feature dimension mismatch");
    }
    double z_l = model.b_light, z_s = model.b_standard;
    for (std::size_t j = 0; j < x.size(); ++j) {
        z_l += model.w_light[j] * x[j];
        z_s += model.w_standard[j] * x[j];
    }
    return {sigmoid(z_l), sigmoid(z_s)};
}

Tier route_classifier(const TierModel& model, const FeatureRow& row) {
    if (!row.health_resolved) return Tier::Heavy; // err above
    const ClassifierProbs p = classifier_probs(model, row);
    if (p.p_light >= model.tau) return Tier::Light;
    if (p.p_standard >= model.tau) return Tier::Standard;
    return Tier::Heavy;
}

std::pair<Corpus, Corpus> split_by_task_id(const Corpus& corpus, std::uint64_t seed,
                                           double fraction) {
    if (fraction <= 0.0 || fraction >= 1.0) {
        throw ConfigError("split fraction must lie strictly inside (0,1)");
    }
    std::vector<const TaskRecord*> order;
    order.reserve(corpus.tasks.size());
    for (const TaskRecord& t : corpus.tasks) order.push_back(&t);
    std::sort(order.begin(), order.end(),
              [](const TaskRecord* a, const TaskRecord* b) {
                  return a->task_id < b->task_id;
              });
    Rng shuffle_rng(Rng::mix(seed, 0x5917ULL));
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(shuffle_rng.below(i));
        std::swap(order[i - 1], order[j]);
    }
    const std::size_t n_left = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::ceil(fraction * static_cast<double>(order.size()))));
    std::pair<Corpus, Corpus> out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_left ? out.first : out.second).tasks.push_back(*order[i]);
    }
    return out;
}

TierModel train_classifier(const Corpus& corpus, const store::FeatureStore* store,
                           const Hyperparams& hp,
                           const std::vector<int>& feature_indices) {
    if (corpus.tasks.empty()) throw TrainingError("empty corpus");
    hp.costs.validate();
    if (hp.tau_grid.empty()) throw TrainingError("empty tau grid");

    TierModel model;
    model.hp = hp;
    if (feature_indices.empty()) {
        model.feature_indices.resize(kFeatureCount);
        std::iota(model.feature_indices.begin(), model.feature_indices.end(), 0);
    } else {
        for (int fi : feature_indices) {
            if (fi < 0 || fi >= kFeatureCount) {
                throw TrainingError("feature index out of range: " + std::to_string(fi));
            }
        }
        model.feature_indices = feature_indices;
    }

    for (const TaskRecord& t : corpus.tasks) {
        if (!t.outcomes) {
            throw TrainingError("task " + t.task_id + " has no oracle outcomes");
        }
    }
    const auto [train_corpus, validation_corpus] =
        split_by_task_id(corpus, hp.seed, hp.split_fraction);
    if (validation_corpus.tasks.empty()) {
        throw TrainingError("split leaves no validation tasks (corpus too small)");
    }
    std::vector<const TaskRecord*> train, validation;
    for (const TaskRecord& t : train_corpus.tasks) train.push_back(&t);
    for (const TaskRecord& t : validation_corpus.tasks) validation.push_back(&t);

    // raw features + coverage imputation from the training split
    std::vector<FeatureRow> train_rows;
    train_rows.reserve(train.size());
    double cov_sum = 0.0;
    long cov_n = 0;
    for (const TaskRecord* t : train) {
        FeatureRow row = task_features(*t, store);
        if (row.coverage_present) {
            cov_sum += row.values[kSubFactorCount + 2];
            ++cov_n;
        }
        train_rows.push_back(row);
    }
    model.coverage_mean = cov_n > 0 ? cov_sum / static_cast<double>(cov_n) : 0.0;

    const std::size_t d = model.feature_indices.size();
    model.mean.assign(d, 0.0);
    model.sd.assign(d, 1.0);
    std::vector<std::vector<double>> raw(train.size(), std::vector<double>(d));
    for (std::size_t i = 0; i < train.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const int fi = model.feature_indices[j];
            double v = train_rows[i].values[static_cast<std::size_t>(fi)];
            if (fi == kSubFactorCount + 2 && !train_rows[i].coverage_present) {
                v = model.coverage_mean;
            }
            raw[i][j] = v;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < raw.size(); ++i) s += raw[i][j];
        model.mean[j] = s / static_cast<double>(raw.size());
        double ss = 0.0;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const double dlt = raw[i][j] - model.mean[j];
            ss += dlt * dlt;
        }
        const double sd = std::sqrt(ss / static_cast<double>(raw.size()));
        model.sd[j] = sd > 0.0 ? sd : 1.0;
    }
    std::vector<std::vector<double>> x(raw.size(), std::vector<double>(d));
    for (std::size_t i = 0; i < raw.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            x[i][j] = (raw[i][j] - model.mean[j]) / model.sd[j];
        }
    }

    for (Tier tier : {Tier::Light, Tier::Standard}) {
        std::vector<int> y;
        y.reserve(train.size());
        for (const TaskRecord* t : train) {
            y.push_back(outcomes::majority_pass(t->outcomes->at(tier)) ? 1 : 0);
        }
        const LogisticFit fit = fit_logistic(x, y, hp);
        if (tier == Tier::Light) {
            model.w_light = fit.w;
            model.b_light = fit.b;
        } else {
            model.w_standard = fit.w;
            model.b_standard = fit.b;
        }
    }

    // tau by realized savings on the validation split; ties err above
    double best_savings = -std::numeric_limits<double>::infinity();
    double best_tau = hp.tau_grid.front();
    for (double tau : hp.tau_grid) {
        model.tau = tau;
        double total = 0.0;
        for (const TaskRecord* t : validation) {
            const FeatureRow row = task_features(*t, store);
            const Tier routed = route_classifier(model, row);
            total += cost::realize_task(*t, routed, hp.costs).cost;
        }
        const double savings =
            hp.costs.heavy - total / static_cast<double>(validation.size());
        if (savings > best_savings || (savings == best_savings && tau > best_tau)) {
            best_savings = savings;
            best_tau = tau;
        }
    }
    model.tau = best_tau;
    model.validation_savings = best_savings;
    return model;
}

std::string TierModel::to_json() const {
    json j;
    j["schema_version"] = 1;
    j["kind"] = "triage-tier-model";
    j["feature_indices"] = feature_indices;
    json names = json::array();
    const auto all = feature_names();
    for (int fi : feature_indices) names.push_back(all[static_cast<std::size_t>(fi)]);
    j["feature_names"] = names;
    j["w_light"] = w_light;
    j["w_standard"] = w_standard;
    j["b_light"] = b_light;
    j["b_standard"] = b_standard;
    j["mean"] = mean;
    j["sd"] = sd;
    j["coverage_mean"] = coverage_mean;
    j["tau"] = tau;
    j["validation_savings"] = validation_savings;
    j["hyperparams"] = {{"learning_rate", hp.learning_rate},
                        {"epochs", hp.epochs},
                        {"l2", hp.l2},
                        {"seed", hp.seed},
                        {"split_fraction", hp.split_fraction},
                        {"tau_grid", hp.tau_grid},
                        {"costs", {hp.costs.light, hp.costs.standard, hp.costs.heavy}}};
    return j.dump(2);
}

TierModel TierModel::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model JSON: ") + e.what());
    }
    try {
        TierModel m;
        m.feature_indices = j.at("feature_indices").get<std::vector<int>>();
        m.w_light = j.at("w_light").get<std::vector<double>>();
        m.w_standard = j.at("w_standard").get<std::vector<double>>();
        m.b_light = j.at("b_light").get<double>();
        m.b_standard = j.at("b_standard").get<double>();
        m.mean = j.at("mean").get<std::vector<double>>();
        m.sd = j.at("sd").get<std::vector<double>>();
        m.coverage_mean = j.at("coverage_mean").get<double>();
        m.tau = j.at("tau").get<double>();
        if (j.contains("validation_savings")) {
            m.validation_savings = j.at("validation_savings").get<double>();
        }
        const json& h = j.at("hyperparams");
        m.hp.learning_rate = h.at("learning_rate").get<double>();
        m.hp.epochs = h.at("epochs").get<int>();
        m.hp.l2 = h.at("l2").get<double>();
        m.hp.seed = h.at("seed").get<std::uint64_t>();
        m.hp.split_fraction = h.at("split_fraction").get<double>();
        m.hp.tau_grid = h.at("tau_grid").get<std::vector<double>>();
        const auto costs = h.at("costs").get<std::vector<double>>();
        if (costs.size() == 3) {
            m.hp.costs = {costs[0], costs[1], costs[2]};
        }
        if (m.w_light.size() != m.feature_indices.size() ||
            m.w_standard.size() != m.feature_indices.size() ||
            m.mean.size() != m.feature_indices.size() ||
            m.sd.size() != m.feature_indices.size()) {
            throw DataError("model JSON has inconsistent dimensions");
        }
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("model JSON schema violation: ") + e.what());
    }
}

void TierModel::save(const std::filesystem::path& file) const {
    io::write_file_atomic(file, to_json() + "\n");
}

TierModel TierModel::load(const std::filesystem::path& file) {
    return from_json(io::read_file(file));
}

std::string_view policy_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::Heuristic: return "heuristic";
        case PolicyKind::Classifier: return "classifier";
        case PolicyKind::Oracle: return "oracle";
        case PolicyKind::AlwaysLight: return "always-light";
        case PolicyKind::AlwaysHeavy: return "always-heavy";
        case PolicyKind::Random: return "random";
    }
    return "?";
}

PolicyKind policy_from_name(std::string_view name) {
    if (name == "heuristic") return PolicyKind::Heuristic;
    if (name == "classifier") return PolicyKind::Classifier;
    if (name == "oracle") return PolicyKind::Oracle;
    if (name == "always-light" || name == "always_light") return PolicyKind::AlwaysLight;
    if (name == "always-heavy" || name == "always_heavy") return PolicyKind::AlwaysHeavy;
    if (name == "random") return PolicyKind::Random;
    throw ConfigError("unknown policy: " + std::string(name));
}

RoutingDecision decide(PolicyKind kind, const PolicyContext& ctx,
                       const TaskRecord& task) {
    RoutingDecision d;
    d.task_id = task.task_id;
    d.policy = std::string(policy_name(kind));
    double health = 1.0;
    bool health_known = false;
    try {
        health = task_health(task, ctx.store);
        health_known = true;
    } catch (const RoutingError&) {
        // missing features: err above
    }
    d.health_used = health;

    switch (kind) {
        case PolicyKind::Heuristic:
            if (!health_known) {
                d.tier = Tier::Heavy;
                d.rationale = "features unavailable, erring above";
            } else {
                d.tier = route_heuristic(health, ctx.thresholds);
                d.rationale = "worst-file health " + std::to_string(health);
            }
            break;
        case PolicyKind::Classifier: {
            if (ctx.model == nullptr) throw RoutingError("classifier policy needs a model");
            const FeatureRow row = task_features(task, ctx.store);
            d.tier = route_classifier(*ctx.model, row);
            if (!row.health_resolved) {
                d.rationale = "features unavailable, erring above";
            } else {
                const ClassifierProbs p = classifier_probs(*ctx.model, row);
                d.rationale = "p_light=" + std::to_string(p.p_light) +
                              " p_standard=" + std::to_string(p.p_standard) +
                              " tau=" + std::to_string(ctx.model->tau);
            }
            break;
        }
        case PolicyKind::Oracle:
            d.tier = route_oracle(task);
            d.rationale = "cheapest majority-passing tier";
            break;
        case PolicyKind::AlwaysLight:
            d.tier = Tier::Light;
            d.rationale = "baseline";
            break;
        case PolicyKind::AlwaysHeavy:
            d.tier = Tier::Heavy;
            d.rationale = "baseline";
            break;
        case PolicyKind::Random:
            d.tier = route_baseline(BaselineKind::Random, task, ctx.seed);
            d.rationale = "uniform draw, seed " + std::to_string(ctx.seed);
            break;
    }
    return d;
}

cost::PolicyFn make_policy(PolicyKind kind, const PolicyContext& ctx) {
    switch (kind) {
        case PolicyKind::Heuristic:
            return [ctx](const TaskRecord& task, std::uint64_t) {
                try {
                    return route_heuristic(task_health(task, ctx.store), ctx.thresholds);
                } catch (const RoutingError&) {
                    return Tier::Heavy;
                }
            };
        case PolicyKind::Classifier: {
            if (ctx.model == nullptr) throw RoutingError("classifier policy needs a model");
            return [ctx](const TaskRecord& task, std::uint64_t) {
                return route_classifier(*ctx.model, task_features(task, ctx.store));
            };
        }
        case PolicyKind::Oracle:
            return [](const TaskRecord& task, std::uint64_t) { return route_oracle(task); };
        case PolicyKind::AlwaysLight:
            return [](const TaskRecord&, std::uint64_t) { return Tier::Light; };
        case PolicyKind::AlwaysHeavy:
            return [](const TaskRecord&, std::uint64_t) { return Tier::Heavy; };
        case PolicyKind::Random:
            return [ctx](const TaskRecord& task, std::uint64_t trial) {
                return route_baseline(BaselineKind::Random, task, ctx.seed, trial);
            };
    }
    throw ConfigError("unknown policy kind");
}

} // namespace triage::router
