#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace triage {

// Capability tiers, ordered by cost: Light < Standard < Heavy.
enum class Tier : int { Light = 0, Standard = 1, Heavy = 2 };

inline constexpr std::array<Tier, 3> kAllTiers = {Tier::Light, Tier::Standard,
                                                  Tier::Heavy};

std::string_view tier_name(Tier t);
Tier tier_from_name(std::string_view name);

// Per-tier verdict lists; equal, odd run counts are enforced at ingestion.
struct RunSet {
    std::array<std::vector<bool>, 3> runs; // indexed by Tier ordinal

    const std::vector<bool>& at(Tier t) const {
        return runs[static_cast<std::size_t>(t)];
    }
    std::vector<bool>& at(Tier t) { return runs[static_cast<std::size_t>(t)]; }
    std::size_t total_runs() const {
        return runs[0].size() + runs[1].size() + runs[2].size();
    }
};

struct FileRef {
    std::string path;
    std::optional<double> health; // inline health (synthetic corpora); else store lookup
};

struct TaskRecord {
    std::string task_id;
    std::vector<FileRef> files; // non-empty
    long patch_size = 0;        // difficulty proxy
    std::optional<double> coverage;
    std::optional<RunSet> outcomes;
};

struct Corpus {
    std::vector<TaskRecord> tasks;

    std::size_t size() const { return tasks.size(); }
    std::size_t total_runs() const;
};

} // namespace triage
