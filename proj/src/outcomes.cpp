#include "triage/outcomes.hpp"

#include "triage/errors.hpp"
#include "triage/io_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace triage {

std::string_view tier_name(Tier t) {
    switch (t) {
        case Tier::Light: return "light";
        case Tier::Standard: return "standard";
        case Tier::Heavy: return "heavy";
    }
    return "?";
}

Tier tier_from_name(std::string_view name) {
    if (name == "light") return Tier::Light;
    if (name == "standard") return Tier::Standard;
    if (name == "heavy") return Tier::Heavy;
    throw DataError("unknown tier: " + std::string(name));
}

std::size_t Corpus::total_runs() const {
    std::size_t n = 0;
    for (const TaskRecord& t : tasks) {
        if (t.outcomes) n += t.outcomes->total_runs();
    }
    return n;
}

} // namespace triage

namespace triage::outcomes {

using nlohmann::json;

bool majority_pass(const std::vector<bool>& runs) {
    if (runs.empty()) throw DataError("majority vote over zero runs");
    if (runs.size() % 2 == 0) {
        throw DataError("majority vote needs an odd run count, got " +
                        std::to_string(runs.size()));
    }
    const std::size_t passes =
        static_cast<std::size_t>(std::count(runs.begin(), runs.end(), true));
    return passes * 2 > runs.size();
}

bool tier_verdict(const TaskRecord& task, Tier tier) {
    if (!task.outcomes) {
        throw DataError("task " + task.task_id + " carries no run outcomes");
    }
    return majority_pass(task.outcomes->at(tier));
}

namespace {

std::vector<bool> parse_run_list(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw DataError(where + ": runs must be arrays");
    std::vector<bool> out;
    for (const json& v : arr) {
        if (v.is_string()) {
            const std::string s = v.get<std::string>();
            if (s == "pass") out.push_back(true);
            else if (s == "fail") out.push_back(false);
            else throw DataError(where + ": run verdict must be \"pass\" or \"fail\"");
        } else if (v.is_boolean()) {
            out.push_back(v.get<bool>());
        } else {
            throw DataError(where + ": run verdict must be \"pass\" or \"fail\"");
        }
    }
    return out;
}

} // namespace

TaskRecord parse_task_line(const std::string& line, const std::string& where,
                           bool require_outcomes) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw DataError(where + ": malformed JSON: " + e.what());
    }
    TaskRecord t;
    try {
        t.task_id = j.at("task_id").get<std::string>();
        if (t.task_id.empty()) throw DataError(where + ": empty task_id");
        const json& files = j.at("files");
        if (!files.is_array() || files.empty()) {
            throw DataError(where + ": files must be a non-empty array");
        }
        for (const json& f : files) {
            FileRef ref;
            ref.path = f.at("path").get<std::string>();
            if (f.contains("health")) {
                double h = f.at("health").get<double>();
                if (h < 1.0 || h > 10.0) {
                    throw DataError(where + ": health out of [1,10]");
                }
                ref.health = h;
            }
            t.files.push_back(std::move(ref));
        }
        t.patch_size = j.at("patch_size").get<long>();
        if (t.patch_size < 0) throw DataError(where + ": negative patch_size");
        if (j.contains("coverage") && !j.at("coverage").is_null()) {
            double c = j.at("coverage").get<double>();
            if (c < 0.0 || c > 1.0) throw DataError(where + ": coverage out of [0,1]");
            t.coverage = c;
        }
        if (j.contains("runs")) {
            RunSet rs;
            const json& runs = j.at("runs");
            for (Tier tier : kAllTiers) {
                const std::string key(tier_name(tier));
                if (!runs.contains(key)) {
                    throw DataError(where + ": missing runs for tier " + key);
                }
                rs.at(tier) = parse_run_list(runs.at(key), where);
            }
            const std::size_t n = rs.at(Tier::Light).size();
            if (rs.at(Tier::Standard).size() != n || rs.at(Tier::Heavy).size() != n) {
                throw DataError(where + ": uneven run counts across tiers for task " +
                                t.task_id);
            }
            if (n == 0 || n % 2 == 0) {
                throw DataError(where + ": run count must be odd and non-zero for task " +
                                t.task_id);
            }
            t.outcomes = std::move(rs);
        } else if (require_outcomes) {
            throw DataError(where + ": missing runs for task " + t.task_id);
        }
    } catch (const DataError&) {
        throw;
    } catch (const json::exception& e) {
        throw DataError(where + ": schema violation: " + e.what());
    }
    return t;
}

Corpus ingest_runs(std::istream& in, const std::string& source_name) {
    Corpus corpus;
    std::unordered_set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = source_name + ":" + std::to_string(line_no);
        TaskRecord t = parse_task_line(line, where, /*require_outcomes=*/true);
        if (!seen.insert(t.task_id).second) {
            throw DataError(where + ": duplicate task_id " + t.task_id);
        }
        corpus.tasks.push_back(std::move(t));
    }
    return corpus;
}

Corpus ingest_runs_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open corpus: " + file.string());
    return ingest_runs(in, file.string());
}

std::string task_to_json_line(const TaskRecord& task) {
    json files = json::array();
    for (const FileRef& f : task.files) {
        json jf = {{"path", f.path}};
        if (f.health) jf["health"] = *f.health;
        files.push_back(jf);
    }
    json j = {{"task_id", task.task_id},
              {"files", files},
              {"patch_size", task.patch_size}};
    if (task.coverage) j["coverage"] = *task.coverage;
    if (task.outcomes) {
        json runs;
        for (Tier tier : kAllTiers) {
            json arr = json::array();
            for (bool pass : task.outcomes->at(tier)) arr.push_back(pass ? "pass" : "fail");
            runs[std::string(tier_name(tier))] = arr;
        }
        j["runs"] = runs;
    }
    return j.dump();
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& file) {
    std::ostringstream out;
    for (const TaskRecord& t : corpus.tasks) out << task_to_json_line(t) << '\n';
    io::write_file_atomic(file, out.str());
}

double AsymmetryParams::pass_probability(Tier t, double health) const {
    double base = 0, slope = 0;
    switch (t) {
        case Tier::Light: base = base_light; slope = slope_light; break;
        case Tier::Standard: base = base_standard; slope = slope_standard; break;
        case Tier::Heavy: base = base_heavy; slope = slope_heavy; break;
    }
    return std::clamp(base + slope * (health - 1.0), 0.0, 1.0);
}

HealthDistribution HealthDistribution::uniform() { return HealthDistribution{}; }

HealthDistribution HealthDistribution::bimodal(double mu1, double mu2, double sigma) {
    if (sigma <= 0.0) throw ConfigError("bimodal sigma must be positive");
    HealthDistribution d;
    d.kind = Kind::Bimodal;
    d.mu1 = mu1;
    d.mu2 = mu2;
    d.sigma = sigma;
    return d;
}

HealthDistribution HealthDistribution::empirical(std::vector<double> values) {
    if (values.empty()) throw ConfigError("empirical health pool is empty");
    for (double v : values) {
        if (v < 1.0 || v > 10.0) throw ConfigError("empirical health out of [1,10]");
    }
    HealthDistribution d;
    d.kind = Kind::Empirical;
    d.values = std::move(values);
    return d;
}

HealthDistribution HealthDistribution::parse(const std::string& spec) {
    if (spec == "uniform") return uniform();
    if (spec.starts_with("bimodal:")) {
        double a, b, s;
        if (std::sscanf(spec.c_str() + 8, "%lf,%lf,%lf", &a, &b, &s) != 3) {
            throw ConfigError("bimodal spec must be bimodal:mu1,mu2,sigma");
        }
        return bimodal(a, b, s);
    }
    if (spec.starts_with("empirical:")) {
        const std::string path = spec.substr(10);
        json j;
        try {
            j = json::parse(io::read_file(path));
        } catch (const json::exception& e) {
            throw DataError(path + ": malformed health pool: " + e.what());
        }
        if (!j.is_array()) throw DataError(path + ": health pool must be a JSON array");
        return empirical(j.get<std::vector<double>>());
    }
    throw ConfigError("unknown health distribution: " + spec);
}

double HealthDistribution::sample(Rng& rng) const {
    switch (kind) {
        case Kind::Uniform:
            return rng.uniform(1.0, 10.0);
        case Kind::Bimodal: {
            const double mu = rng.bernoulli(0.5) ? mu1 : mu2;
            return std::clamp(rng.normal(mu, sigma), 1.0, 10.0);
        }
        case Kind::Empirical:
            return values[static_cast<std::size_t>(rng.below(values.size()))];
    }
    return 1.0;
}

Corpus generate_corpus(const GenParams& params) {
    if (params.n_tasks < 1) throw ConfigError("n_tasks must be >= 1");
    if (params.runs_per_tier < 1 || params.runs_per_tier % 2 == 0) {
        throw ConfigError("runs_per_tier must be odd and >= 1");
    }
    if (params.files_min < 1 || params.files_max < params.files_min) {
        throw ConfigError("invalid files-per-task range");
    }
    if (params.patch_min < 1 || params.patch_max < params.patch_min) {
        throw ConfigError("invalid patch size range");
    }
    Corpus corpus;
    corpus.tasks.reserve(static_cast<std::size_t>(params.n_tasks));
    const double log_lo = std::log(static_cast<double>(params.patch_min));
    const double log_hi = std::log(static_cast<double>(params.patch_max));
    int width = 1;
    for (int n = params.n_tasks; n >= 10 && width < 9; n /= 10) ++width;

    for (int i = 0; i < params.n_tasks; ++i) {
        Rng rng = Rng::substream(params.seed, static_cast<std::uint64_t>(i));
        TaskRecord t;
        char id[32];
        std::snprintf(id, sizeof(id), "t%0*d", width, i + 1);
        t.task_id = id;

        const long n_files = rng.uniform_int(params.files_min, params.files_max);
        double worst = 10.0;
        for (long f = 0; f < n_files; ++f) {
            const double h = params.health.sample(rng);
            worst = std::min(worst, h);
            t.files.push_back({t.task_id + "/file" + std::to_string(f), h});
        }
        t.patch_size =
            std::lround(std::exp(rng.uniform(log_lo, log_hi)));
        t.patch_size = std::clamp(t.patch_size, params.patch_min, params.patch_max);
        t.coverage = rng.uniform01();

        RunSet rs;
        for (Tier tier : kAllTiers) {
            const double p = params.asymmetry.pass_probability(tier, worst);
            auto& runs = rs.at(tier);
            runs.reserve(static_cast<std::size_t>(params.runs_per_tier));
            for (int r = 0; r < params.runs_per_tier; ++r) {
                runs.push_back(rng.bernoulli(p));
            }
        }
        t.outcomes = std::move(rs);
        corpus.tasks.push_back(std::move(t));
    }
    return corpus;
}

} // namespace triage::outcomes
