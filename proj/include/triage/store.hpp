#pragma once

#include "triage/health.hpp"
#include "triage/subfactors.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace triage::store {

struct FeatureRecord {
    std::string path;
    std::string content_hash; // hex fnv1a64 of the file bytes
    health::SubFactorVector sub_factors;
    health::HealthScore score;
    std::optional<double> coverage; // externally supplied line coverage
    long updated_at = 0;            // store revision at last analysis

    bool equal_ignoring_revision(const FeatureRecord& other) const;
};

struct FileInput {
    std::string path;
    std::string content;
};

struct UpdateSummary {
    int analyzed = 0;
    int cache_hits = 0;
    std::vector<std::pair<std::string, std::string>> errors; // path, message
};

struct LookupResult {
    std::string path;
    std::optional<FeatureRecord> record; // empty = missing-path marker
};

// JSON Lines store: a header line (format version, weight-config digest,
// revision), then one record per line. Rewrites go through a temp file and
// an atomic rename; `triage store update` additionally holds a .lock file.
class FeatureStore {
public:
    FeatureStore() = default;
    explicit FeatureStore(health::WeightConfig weights);

    static FeatureStore load(const std::filesystem::path& file);
    void save(const std::filesystem::path& file) const;

    // Re-analyzes only files whose content hash (or the weight config) changed.
    // Files already in the store but absent from `files` are retained.
    UpdateSummary update(const std::vector<FileInput>& files,
                         const health::WeightConfig& weights,
                         health::Dialect dialect = health::Dialect::Brace);

    // Reads files from disk; unreadable files become per-file errors in the
    // summary while the rest proceed. Dialect chosen per file extension.
    UpdateSummary update_from_disk(const std::vector<std::string>& paths,
                                   const health::WeightConfig& weights);

    std::vector<LookupResult> lookup(const std::vector<std::string>& paths) const;
    const FeatureRecord* find(const std::string& path) const;

    // coverage file: JSON object mapping path -> fraction in [0,1]
    int apply_coverage(const std::map<std::string, double>& coverage);

    void remove(const std::string& path);

    long revision() const { return revision_; }
    std::size_t size() const { return records_.size(); }
    const std::map<std::string, FeatureRecord>& records() const { return records_; }
    const std::string& weights_digest() const { return weights_digest_; }

private:
    std::map<std::string, FeatureRecord> records_; // keyed by path
    std::string weights_digest_;
    long revision_ = 0;
};

// Built-in extension table; config can override the default dialect.
health::Dialect dialect_for_path(const std::string& path,
                                 health::Dialect fallback = health::Dialect::Brace);

} // namespace triage::store
