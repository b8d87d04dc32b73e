#pragma once

#include "triage/rng.hpp"
#include "triage/task.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace triage::outcomes {

// Strict-majority pass rule. Throws DataError on empty or even run counts
// (no tie rule exists).
bool majority_pass(const std::vector<bool>& runs);

// Convenience: majority verdict of a task at a tier; DataError if the task
// carries no outcomes.
bool tier_verdict(const TaskRecord& task, Tier tier);

// Corpus schema, one JSON object per line:
//   {"task_id": str, "files": [{"path": str, "health": real?}],
//    "patch_size": int, "coverage": real?,
//    "runs": {"light": ["pass"|"fail",...], "standard": [...], "heavy": [...]}}
// Schema violations are reported with their line number; duplicate task_ids
// and uneven or even run counts are rejected.
Corpus ingest_runs(std::istream& in, const std::string& source_name = "<stream>");
Corpus ingest_runs_file(const std::filesystem::path& file);

// `runs` may be omitted when require_outcomes is false (e.g. `triage route`
// inputs); ingest_runs always requires them.
TaskRecord parse_task_line(const std::string& line, const std::string& where,
                           bool require_outcomes);

std::string task_to_json_line(const TaskRecord& task);
void write_corpus(const Corpus& corpus, const std::filesystem::path& file);

// Tier-dependent asymmetry: pass probability at health h is
// clamp(base_t + slope_t * (h - 1), 0, 1). Defaults make clean code help the
// light and standard tiers while the heavy tier stays flat.
struct AsymmetryParams {
    double base_light = 0.05;
    double slope_light = 0.06;
    double base_standard = 0.25;
    double slope_standard = 0.06;
    double base_heavy = 0.90;
    double slope_heavy = 0.0;

    double pass_probability(Tier t, double health) const;
};

struct HealthDistribution {
    enum class Kind { Uniform, Bimodal, Empirical };
    Kind kind = Kind::Uniform;
    double mu1 = 0, mu2 = 0, sigma = 0; // bimodal: 50/50 normal mixture, clamped
    std::vector<double> values;         // empirical pool

    static HealthDistribution uniform();
    static HealthDistribution bimodal(double mu1, double mu2, double sigma);
    static HealthDistribution empirical(std::vector<double> values);
    // "uniform" | "bimodal:mu1,mu2,sigma" | "empirical:<file>"
    static HealthDistribution parse(const std::string& spec);

    double sample(Rng& rng) const;
};

struct GenParams {
    int n_tasks = 300;
    HealthDistribution health;
    AsymmetryParams asymmetry;
    int runs_per_tier = 3; // must be odd
    int files_min = 1, files_max = 3;
    long patch_min = 1, patch_max = 1000; // log-uniform
    std::uint64_t seed = 42;
};

// Reproducible: task i draws only from substream (seed, i).
Corpus generate_corpus(const GenParams& params);

} // namespace triage::outcomes
