#include "triage/cli.hpp"

#include "triage/config.hpp"
#include "triage/errors.hpp"
#include "triage/evaluation.hpp"
#include "triage/io_util.hpp"
#include "triage/outcomes.hpp"
#include "triage/router.hpp"
#include "triage/store.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace triage::cli {

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoGo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
    } else {
        io::write_file_atomic(out_path, text);
    }
}

cost::CostParams parse_costs(const std::vector<double>& v) {
    if (v.size() != 3) throw ConfigError("--costs needs three values: light,standard,heavy");
    cost::CostParams p{v[0], v[1], v[2]};
    p.validate();
    return p;
}

json analysis_to_json(const std::string& name, const health::SubFactorVector& v,
                      const health::HealthScore& score) {
    return {{"path", name},
            {"sub_factors",
             {{"cyclomatic_max", v.cyclomatic_max},
              {"cyclomatic_mean", v.cyclomatic_mean},
              {"file_loc", v.file_loc},
              {"function_length_max", v.function_length_max},
              {"nesting_depth_max", v.nesting_depth_max},
              {"arg_count_max", v.arg_count_max},
              {"duplication_ratio", v.duplication_ratio},
              {"identifier_shortness", v.identifier_shortness}}},
            {"score", score.value},
            {"band", std::string(health::band_name(score.band))}};
}

std::string analysis_table(const std::vector<json>& rows) {
    std::ostringstream out;
    char line[512];
    std::snprintf(line, sizeof(line), "%-32s %6s %6s %6s %6s %5s %5s %6s %6s %7s %-11s\n",
                  "path", "cyc.mx", "cyc.mn", "loc", "fn.len", "nest", "args",
                  "dup", "short", "score", "band");
    out << line;
    for (const json& r : rows) {
        const json& sf = r.at("sub_factors");
        std::snprintf(line, sizeof(line),
                      "%-32s %6d %6.2f %6d %6d %5d %5d %6.3f %6.3f %7.3f %-11s\n",
                      r.at("path").get<std::string>().c_str(),
                      sf.at("cyclomatic_max").get<int>(),
                      sf.at("cyclomatic_mean").get<double>(),
                      sf.at("file_loc").get<int>(),
                      sf.at("function_length_max").get<int>(),
                      sf.at("nesting_depth_max").get<int>(),
                      sf.at("arg_count_max").get<int>(),
                      sf.at("duplication_ratio").get<double>(),
                      sf.at("identifier_shortness").get<double>(),
                      r.at("score").get<double>(),
                      r.at("band").get<std::string>().c_str());
        out << line;
    }
    return out.str();
}

std::vector<double> load_sample(const std::string& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw DataError(path + ": expected a JSON array of numbers: " + e.what());
    }
    if (!j.is_array()) throw DataError(path + ": expected a JSON array of numbers");
    return j.get<std::vector<double>>();
}

TaskRecord load_task_file(const std::string& path, bool require_outcomes) {
    std::string text = io::read_file(path);
    // allow a single-object file or the first line of a JSONL file
    const auto nl = text.find('\n');
    std::string first = nl == std::string::npos ? text : text.substr(0, nl);
    if (first.find_first_not_of(" \t\r") == std::string::npos) {
        throw DataError(path + ": empty task file");
    }
    return outcomes::parse_task_line(first, path, require_outcomes);
}

std::map<std::string, double> load_coverage_file(const std::string& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw DataError(path + ": malformed coverage file: " + e.what());
    }
    if (!j.is_object()) {
        throw DataError(path + ": coverage file must map path -> fraction");
    }
    std::map<std::string, double> out;
    for (const auto& [key, value] : j.items()) out[key] = value.get<double>();
    return out;
}

struct CliState {
    std::string config_path;
    std::string params_path; // gen-corpus extra layer
    std::optional<std::uint64_t> seed_flag;

    cfg::Config config() const {
        cfg::Config c;
        if (!config_path.empty()) c = cfg::Config::load(config_path);
        if (!params_path.empty()) {
            // params files reuse the config format; later layer wins
            cfg::Config p = cfg::Config::load(params_path);
            c = p;
        }
        if (seed_flag) c.seed = *seed_flag;
        return c;
    }
};

std::vector<router::PolicyKind> parse_policies(const std::string& spec) {
    if (spec == "all") {
        return {router::PolicyKind::Heuristic,   router::PolicyKind::Classifier,
                router::PolicyKind::Oracle,      router::PolicyKind::AlwaysLight,
                router::PolicyKind::AlwaysHeavy, router::PolicyKind::Random};
    }
    std::vector<router::PolicyKind> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(router::policy_from_name(item));
    }
    if (out.empty()) throw ConfigError("no policies given");
    return out;
}

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"triage: cost-aware routing of software tasks to model tiers"};
    app.require_subcommand(1);
    app.fallthrough();

    CliState state;
    app.add_option("--config", state.config_path, "config file (INI sections)");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "global RNG seed");
    std::string out_path;
    app.add_option("--out", out_path, "write the primary output to a file");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "score source files");
    std::vector<std::string> analyze_paths;
    std::string analyze_dialect, analyze_format = "table";
    analyze->add_option("paths", analyze_paths, "files to analyze ('-' for stdin)")
        ->required();
    analyze->add_option("--dialect", analyze_dialect, "brace|indent (default: by extension)");
    analyze->add_option("--format", analyze_format, "json|table")
        ->check(CLI::IsMember({"json", "table"}));

    // store update / get
    auto* store_cmd = app.add_subcommand("store", "feature store operations");
    store_cmd->require_subcommand(1);
    auto* store_update = store_cmd->add_subcommand("update", "analyze files into the store");
    std::vector<std::string> update_paths;
    std::string store_path = "features.jsonl", coverage_path;
    store_update->add_option("paths", update_paths, "files to (re)analyze")->required();
    store_update->add_option("--store", store_path, "store file (default features.jsonl)");
    store_update->add_option("--coverage", coverage_path, "JSON path->fraction report");
    auto* store_get = store_cmd->add_subcommand("get", "look up stored records");
    std::vector<std::string> get_paths;
    std::string get_store_path = "features.jsonl", get_format = "table";
    store_get->add_option("paths", get_paths, "paths to fetch")->required();
    store_get->add_option("--store", get_store_path, "store file");
    store_get->add_option("--format", get_format, "json|table")
        ->check(CLI::IsMember({"json", "table"}));

    // route
    auto* route = app.add_subcommand("route", "route one task to a tier");
    std::string route_task, route_policy = "heuristic", route_model, route_store;
    std::vector<double> route_thresholds;
    route->add_option("task", route_task, "task file (JSON object)")->required();
    route->add_option("--policy", route_policy,
                      "heuristic|classifier|oracle|always-light|always-heavy|random");
    route->add_option("--model", route_model, "trained TierModel JSON");
    route->add_option("--store", route_store, "feature store for file lookups");
    route->add_option("--thresholds", route_thresholds,
                      "t_light,t_standard (default 9,5)")
        ->delimiter(',');

    // gen-corpus
    auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic corpus");
    int gen_n = 300;
    std::string gen_dist;
    gen->add_option("--n", gen_n, "number of tasks");
    gen->add_option("--params", state.params_path, "generator params (config format)");
    gen->add_option("--health-dist", gen_dist,
                    "uniform | bimodal:mu1,mu2,sigma | empirical:<file>");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate a recorded corpus");
    std::string ingest_file;
    ingest->add_option("file", ingest_file, "corpus JSONL")->required();

    // train
    auto* train = app.add_subcommand("train", "train the tier classifier");
    std::string train_corpus, train_store;
    train->add_option("--corpus", train_corpus, "corpus with outcomes")->required();
    train->add_option("--store", train_store, "feature store");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo policy cost simulation");
    std::string sim_corpus, sim_policy = "heuristic", sim_model, sim_store;
    std::vector<double> sim_costs;
    int sim_trials = 1;
    simulate->add_option("--corpus", sim_corpus, "corpus with outcomes")->required();
    simulate->add_option("--policy", sim_policy, "policy to simulate");
    simulate->add_option("--costs", sim_costs, "light,standard,heavy")->delimiter(',');
    simulate->add_option("--trials", sim_trials, "number of trials");
    simulate->add_option("--model", sim_model, "TierModel for the classifier policy");
    simulate->add_option("--store", sim_store, "feature store");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "full policy comparison");
    std::string eval_corpus, eval_policies = "all", eval_store, eval_model;
    std::string eval_format = "json";
    std::vector<double> eval_costs;
    evaluate->add_option("--corpus", eval_corpus, "corpus with outcomes")->required();
    evaluate->add_option("--costs", eval_costs, "light,standard,heavy")->delimiter(',');
    evaluate->add_option("--policies", eval_policies, "all or comma list");
    evaluate->add_option("--store", eval_store, "feature store");
    evaluate->add_option("--model", eval_model, "pre-trained TierModel");
    evaluate->add_option("--format", eval_format, "json|table")
        ->check(CLI::IsMember({"json", "table"}));

    // pilot
    auto* pilot = app.add_subcommand("pilot", "go/no-go pilot gates");
    std::string pilot_corpus, pilot_store;
    std::vector<double> pilot_costs;
    pilot->add_option("--corpus", pilot_corpus, "pilot corpus")->required();
    pilot->add_option("--costs", pilot_costs, "light,standard,heavy")->delimiter(',');
    pilot->add_option("--store", pilot_store, "feature store");

    // rq1
    auto* rq1 = app.add_subcommand("rq1", "composite vs sub-factor comparison");
    std::string rq1_corpus, rq1_store;
    std::vector<int> rq1_k = {1, 3, 5};
    std::vector<double> rq1_costs;
    rq1->add_option("--corpus", rq1_corpus, "corpus with outcomes")->required();
    rq1->add_option("--store", rq1_store, "feature store")->required();
    rq1->add_option("--k", rq1_k, "top-k list (default 1,3,5)")->delimiter(',');
    rq1->add_option("--costs", rq1_costs, "light,standard,heavy")->delimiter(',');

    // stats bm
    auto* stats_cmd = app.add_subcommand("stats", "statistical helpers");
    stats_cmd->require_subcommand(1);
    auto* bm = stats_cmd->add_subcommand("bm", "Brunner-Munzel test");
    std::string bm_x, bm_y;
    bool bm_one_sided = false;
    bm->add_option("--x", bm_x, "JSON array of numbers")->required();
    bm->add_option("--y", bm_y, "JSON array of numbers")->required();
    bm->add_flag("--one-sided", bm_one_sided, "H1: x stochastically greater");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        (void)app.exit(e);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return kExitUsage;
    }
    if (seed_opt->count() > 0) state.seed_flag = seed_value;
    cfg::Config config = state.config();

    if (*analyze) {
        std::vector<json> rows;
        for (const std::string& p : analyze_paths) {
            std::string text =
                p == "-" ? io::read_stream(std::cin) : io::read_file(p);
            const health::Dialect d = analyze_dialect.empty()
                                          ? config.resolve_dialect(p)
                                          : health::dialect_from_name(analyze_dialect);
            const auto v = health::analyze_file(text, d);
            rows.push_back(analysis_to_json(p, v, health::composite_score(v, config.weights)));
        }
        if (analyze_format == "json") {
            const json out = rows.size() == 1 ? rows.front() : json(rows);
            emit(out.dump(2) + "\n", out_path);
        } else {
            emit(analysis_table(rows), out_path);
        }
        return kExitOk;
    }

    if (*store_update) {
        io::FileLock lock(store_path); // single writer
        store::FeatureStore fs = std::filesystem::exists(store_path)
                                     ? store::FeatureStore::load(store_path)
                                     : store::FeatureStore(config.weights);
        store::UpdateSummary total;
        std::map<health::Dialect, std::vector<store::FileInput>> batches;
        for (const std::string& p : update_paths) {
            try {
                batches[config.resolve_dialect(p)].push_back({p, io::read_file(p)});
            } catch (const Error& e) {
                total.errors.emplace_back(p, e.what());
            }
        }
        for (auto& [dialect, files] : batches) {
            const store::UpdateSummary s = fs.update(files, config.weights, dialect);
            total.analyzed += s.analyzed;
            total.cache_hits += s.cache_hits;
            total.errors.insert(total.errors.end(), s.errors.begin(), s.errors.end());
        }
        if (!coverage_path.empty()) {
            fs.apply_coverage(load_coverage_file(coverage_path));
        }
        fs.save(store_path);
        json errors = json::array();
        for (const auto& [p, msg] : total.errors) {
            errors.push_back({{"path", p}, {"error", msg}});
        }
        json out = {{"schema_version", 1},
                    {"analyzed", total.analyzed},
                    {"cache_hits", total.cache_hits},
                    {"errors", errors},
                    {"revision", fs.revision()},
                    {"records", fs.size()}};
        std::cout << out.dump(2) << "\n";
        return total.errors.empty() ? kExitOk : kExitData;
    }

    if (*store_get) {
        const store::FeatureStore fs = store::FeatureStore::load(get_store_path);
        std::vector<json> rows;
        json out = json::array();
        for (const store::LookupResult& r : fs.lookup(get_paths)) {
            if (r.record) {
                json j = analysis_to_json(r.path, r.record->sub_factors, r.record->score);
                j["content_hash"] = r.record->content_hash;
                if (r.record->coverage) j["coverage"] = *r.record->coverage;
                j["updated_at"] = r.record->updated_at;
                out.push_back(j);
                rows.push_back(j);
            } else {
                out.push_back({{"path", r.path}, {"missing", true}});
            }
        }
        if (get_format == "json") {
            emit(out.dump(2) + "\n", out_path);
        } else {
            std::string table = analysis_table(rows);
            for (const json& j : out) {
                if (j.contains("missing")) {
                    table += j.at("path").get<std::string>() + "  <missing>\n";
                }
            }
            emit(table, out_path);
        }
        return kExitOk;
    }

    if (*route) {
        const router::PolicyKind kind = router::policy_from_name(route_policy);
        const bool needs_outcomes = kind == router::PolicyKind::Oracle;
        const TaskRecord task = load_task_file(route_task, needs_outcomes);
        store::FeatureStore fs;
        router::PolicyContext ctx;
        ctx.seed = config.seed;
        if (!route_thresholds.empty()) {
            if (route_thresholds.size() != 2) {
                throw ConfigError("--thresholds needs two values: t_light,t_standard");
            }
            ctx.thresholds = {route_thresholds[0], route_thresholds[1]};
        } else {
            ctx.thresholds = config.thresholds;
        }
        if (!route_store.empty()) {
            fs = store::FeatureStore::load(route_store);
            ctx.store = &fs;
        }
        router::TierModel model;
        if (kind == router::PolicyKind::Classifier) {
            if (route_model.empty()) throw ConfigError("--policy classifier needs --model");
            model = router::TierModel::load(route_model);
            ctx.model = &model;
        }
        const router::RoutingDecision d = router::decide(kind, ctx, task);
        json out = {{"schema_version", 1},
                    {"task_id", d.task_id},
                    {"tier", std::string(tier_name(d.tier))},
                    {"policy", d.policy},
                    {"health_used", d.health_used},
                    {"rationale", d.rationale}};
        std::cout << out.dump(2) << "\n";
        return kExitOk;
    }

    if (*gen) {
        outcomes::GenParams params;
        params.n_tasks = gen_n;
        params.seed = config.seed;
        params.asymmetry = config.asymmetry;
        params.runs_per_tier = config.runs_per_tier;
        params.files_min = config.files_min;
        params.files_max = config.files_max;
        params.patch_min = config.patch_min;
        params.patch_max = config.patch_max;
        params.health = outcomes::HealthDistribution::parse(
            gen_dist.empty() ? config.health_dist : gen_dist);
        const Corpus corpus = outcomes::generate_corpus(params);
        if (out_path.empty()) {
            for (const TaskRecord& t : corpus.tasks) {
                std::cout << outcomes::task_to_json_line(t) << "\n";
            }
        } else {
            outcomes::write_corpus(corpus, out_path);
        }
        return kExitOk;
    }

    if (*ingest) {
        const Corpus corpus = outcomes::ingest_runs_file(ingest_file);
        json out = {{"schema_version", 1},
                    {"tasks", corpus.size()},
                    {"total_runs", corpus.total_runs()}};
        emit(out.dump(2) + "\n", out_path);
        return kExitOk;
    }

    if (*train) {
        const Corpus corpus = outcomes::ingest_runs_file(train_corpus);
        store::FeatureStore fs;
        const store::FeatureStore* fs_ptr = nullptr;
        if (!train_store.empty()) {
            fs = store::FeatureStore::load(train_store);
            fs_ptr = &fs;
        }
        if (out_path.empty()) {
            throw ConfigError("train needs --out <model-file>");
        }
        const router::TierModel model =
            router::train_classifier(corpus, fs_ptr, config.effective_hyperparams());
        model.save(out_path);
        json out = {{"schema_version", 1},
                    {"model", out_path},
                    {"tau", model.tau},
                    {"validation_savings", model.validation_savings}};
        std::cout << out.dump(2) << "\n";
        return kExitOk;
    }

    if (*simulate) {
        const Corpus corpus = outcomes::ingest_runs_file(sim_corpus);
        const cost::CostParams costs =
            sim_costs.empty() ? config.costs : parse_costs(sim_costs);
        router::PolicyContext ctx;
        ctx.thresholds = config.thresholds;
        ctx.seed = config.seed;
        store::FeatureStore fs;
        if (!sim_store.empty()) {
            fs = store::FeatureStore::load(sim_store);
            ctx.store = &fs;
        }
        router::TierModel model;
        const router::PolicyKind kind = router::policy_from_name(sim_policy);
        if (kind == router::PolicyKind::Classifier) {
            if (sim_model.empty()) throw ConfigError("--policy classifier needs --model");
            model = router::TierModel::load(sim_model);
            ctx.model = &model;
        }
        const cost::PolicySimResult r = cost::simulate_policy(
            corpus, router::make_policy(kind, ctx), costs, sim_trials);
        json out = {{"schema_version", 1},
                    {"policy", sim_policy},
                    {"tasks", r.tasks},
                    {"trials", r.trials},
                    {"mean_cost", r.mean_cost},
                    {"stderr_cost", r.stderr_cost},
                    {"cost_per_successful_task", r.cost_per_success},
                    {"success_rate", r.success_rate},
                    {"mix",
                     {{"r_light", r.empirical.r_light},
                      {"r_standard", r.empirical.r_standard},
                      {"f_light", r.empirical.f_light},
                      {"f_standard", r.empirical.f_standard}}},
                    {"expected_cost", cost::expected_cost(costs, r.empirical)},
                    {"savings_vs_heavy", cost::savings_vs_heavy(costs, r.empirical)},
                    {"trial_mean_cost", r.trial_mean_cost}};
        emit(out.dump(2) + "\n", out_path);
        return kExitOk;
    }

    if (*evaluate) {
        const Corpus corpus = outcomes::ingest_runs_file(eval_corpus);
        const cost::CostParams costs =
            eval_costs.empty() ? config.costs : parse_costs(eval_costs);
        eval::EvalConfig ec;
        ec.thresholds = config.thresholds;
        ec.hyperparams = config.effective_hyperparams();
        ec.seed = config.seed;
        ec.coverage_edges = config.coverage_edges;
        ec.p_hat_threshold = config.p_hat_threshold;
        ec.cost_ratio_override = config.cost_ratio_override;
        ec.caliper_fraction = config.caliper_fraction;
        store::FeatureStore fs;
        if (!eval_store.empty()) {
            fs = store::FeatureStore::load(eval_store);
            ec.store = &fs;
        }
        router::TierModel model;
        if (!eval_model.empty()) {
            model = router::TierModel::load(eval_model);
            ec.model = &model;
        }
        const eval::EvaluationReport report =
            eval::evaluate(corpus, parse_policies(eval_policies), costs, ec);
        if (eval_format == "table") {
            emit(report.to_text(), out_path);
        } else {
            emit(report.to_json(), out_path);
        }
        return kExitOk;
    }

    if (*pilot) {
        const Corpus corpus = outcomes::ingest_runs_file(pilot_corpus);
        const cost::CostParams costs =
            pilot_costs.empty() ? config.costs : parse_costs(pilot_costs);
        eval::PilotConfig pc;
        pc.expected_size = config.pilot_size;
        pc.min_size = config.pilot_min_size;
        pc.p_hat_threshold = config.p_hat_threshold;
        pc.thresholds = config.thresholds;
        pc.cost_ratio_override = config.cost_ratio_override;
        store::FeatureStore fs;
        if (!pilot_store.empty()) {
            fs = store::FeatureStore::load(pilot_store);
            pc.store = &fs;
        }
        const eval::PilotReport report = eval::pilot_gates(corpus, costs, pc);
        std::cout << report.to_text();
        if (!out_path.empty()) io::write_file_atomic(out_path, report.to_json());
        return report.go ? kExitOk : kExitNoGo;
    }

    if (*rq1) {
        const Corpus corpus = outcomes::ingest_runs_file(rq1_corpus);
        const cost::CostParams costs =
            rq1_costs.empty() ? config.costs : parse_costs(rq1_costs);
        store::FeatureStore fs = store::FeatureStore::load(rq1_store);
        const eval::Rq1Report report = eval::rq1_compare(
            corpus, &fs, rq1_k, config.effective_hyperparams(), costs);
        if (out_path.empty()) {
            std::cout << report.to_text();
        } else {
            io::write_file_atomic(out_path, report.to_json());
            std::cout << report.to_text();
        }
        return kExitOk;
    }

    if (*bm) {
        const std::vector<double> xs = load_sample(bm_x);
        const std::vector<double> ys = load_sample(bm_y);
        const stats::EffectResult r = stats::brunner_munzel(
            xs, ys,
            bm_one_sided ? stats::Alternative::Greater : stats::Alternative::TwoSided);
        json out = {{"schema_version", 1},
                    {"p_hat", r.p_hat},
                    {"n_x", r.n_x},
                    {"n_y", r.n_y},
                    {"bm_statistic", r.bm_statistic},
                    {"bm_df", r.bm_df},
                    {"bm_p_value", r.bm_p_value},
                    {"degenerate", r.degenerate},
                    {"alternative", bm_one_sided ? "greater" : "two-sided"}};
        emit(out.dump(2) + "\n", out_path);
        return kExitOk;
    }

    return kExitUsage;
}

} // namespace

int run(const std::vector<std::string>& args) {
    try {
        return dispatch(args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

} // namespace triage::cli
