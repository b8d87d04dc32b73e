#include "triage/store.hpp"

#include "triage/errors.hpp"
#include "triage/io_util.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <unordered_set>

namespace triage::store {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kFormatVersion = 1;

json record_to_json(const FeatureRecord& r) {
    const auto& v = r.sub_factors;
    json j;
    j["path"] = r.path;
    j["content_hash"] = r.content_hash;
    j["sub_factors"] = {
        {"cyclomatic_max", v.cyclomatic_max},
        {"cyclomatic_mean", v.cyclomatic_mean},
        {"file_loc", v.file_loc},
        {"function_length_max", v.function_length_max},
        {"nesting_depth_max", v.nesting_depth_max},
        {"arg_count_max", v.arg_count_max},
        {"duplication_ratio", v.duplication_ratio},
        {"identifier_shortness", v.identifier_shortness},
    };
    j["score"] = {{"value", r.score.value},
                  {"band", std::string(health::band_name(r.score.band))}};
    if (r.coverage) j["coverage"] = *r.coverage;
    j["updated_at"] = r.updated_at;
    return j;
}

FeatureRecord record_from_json(const json& j) {
    FeatureRecord r;
    r.path = j.at("path").get<std::string>();
    r.content_hash = j.at("content_hash").get<std::string>();
    const json& sf = j.at("sub_factors");
    r.sub_factors.cyclomatic_max = sf.at("cyclomatic_max").get<int>();
    r.sub_factors.cyclomatic_mean = sf.at("cyclomatic_mean").get<double>();
    r.sub_factors.file_loc = sf.at("file_loc").get<int>();
    r.sub_factors.function_length_max = sf.at("function_length_max").get<int>();
    r.sub_factors.nesting_depth_max = sf.at("nesting_depth_max").get<int>();
    r.sub_factors.arg_count_max = sf.at("arg_count_max").get<int>();
    r.sub_factors.duplication_ratio = sf.at("duplication_ratio").get<double>();
    r.sub_factors.identifier_shortness = sf.at("identifier_shortness").get<double>();
    r.score.value = j.at("score").at("value").get<double>();
    r.score.band = health::band_from_name(j.at("score").at("band").get<std::string>());
    if (j.contains("coverage")) r.coverage = j.at("coverage").get<double>();
    r.updated_at = j.at("updated_at").get<long>();
    return r;
}

} // namespace

bool FeatureRecord::equal_ignoring_revision(const FeatureRecord& other) const {
    return path == other.path && content_hash == other.content_hash &&
           sub_factors == other.sub_factors && score == other.score &&
           coverage == other.coverage;
}

FeatureStore::FeatureStore(health::WeightConfig weights)
    : weights_digest_(weights.digest()) {}

FeatureStore FeatureStore::load(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open store: " + file.string());
    FeatureStore s;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(file.string() + ":" + std::to_string(line_no) +
                            ": corrupted store line: " + e.what());
        }
        try {
            if (line_no == 1) {
                if (!j.contains("format_version") ||
                    j.at("format_version").get<int>() != kFormatVersion) {
                    throw DataError("unsupported store format version");
                }
                s.weights_digest_ = j.at("weights_digest").get<std::string>();
                s.revision_ = j.at("revision").get<long>();
            } else {
                FeatureRecord r = record_from_json(j);
                if (s.records_.contains(r.path)) {
                    throw DataError("duplicate path " + r.path);
                }
                s.records_.emplace(r.path, std::move(r));
            }
        } catch (const DataError&) {
            throw;
        } catch (const std::exception& e) {
            throw DataError(file.string() + ":" + std::to_string(line_no) +
                            ": corrupted store line: " + e.what());
        }
    }
    if (line_no == 0) throw DataError(file.string() + ":1: missing store header");
    return s;
}

void FeatureStore::save(const fs::path& file) const {
    std::ostringstream out;
    json header = {{"format_version", kFormatVersion},
                   {"kind", "triage-feature-store"},
                   {"weights_digest", weights_digest_},
                   {"revision", revision_}};
    out << header.dump() << '\n';
    for (const auto& [path, record] : records_) {
        out << record_to_json(record).dump() << '\n';
    }
    io::write_file_atomic(file, out.str());
}

UpdateSummary FeatureStore::update(const std::vector<FileInput>& files,
                                   const health::WeightConfig& weights,
                                   health::Dialect dialect) {
    weights.validate();
    UpdateSummary summary;
    const std::string digest = weights.digest();
    const bool weights_changed = digest != weights_digest_;
    ++revision_;
    for (const FileInput& f : files) {
        const std::string hash = io::to_hex(io::fnv1a64(f.content));
        auto it = records_.find(f.path);
        if (!weights_changed && it != records_.end() &&
            it->second.content_hash == hash) {
            ++summary.cache_hits;
            continue;
        }
        try {
            FeatureRecord r;
            r.path = f.path;
            r.content_hash = hash;
            r.sub_factors = health::analyze_file(f.content, dialect);
            r.score = health::composite_score(r.sub_factors, weights);
            if (it != records_.end()) r.coverage = it->second.coverage;
            r.updated_at = revision_;
            records_[f.path] = std::move(r);
            ++summary.analyzed;
        } catch (const Error& e) {
            summary.errors.emplace_back(f.path, e.what());
        }
    }
    if (weights_changed) {
        // records analyzed under the old weights stay stale-marked by digest;
        // refresh any that were not part of this batch
        std::unordered_set<std::string> batch;
        for (const FileInput& f : files) batch.insert(f.path);
        for (auto& [path, record] : records_) {
            if (batch.contains(path)) continue;
            record.score = health::composite_score(record.sub_factors, weights);
            record.updated_at = revision_;
        }
        weights_digest_ = digest;
    }
    return summary;
}

UpdateSummary FeatureStore::update_from_disk(const std::vector<std::string>& paths,
                                             const health::WeightConfig& weights) {
    std::vector<FileInput> files;
    UpdateSummary read_errors;
    for (const std::string& p : paths) {
        try {
            files.push_back({p, io::read_file(p)});
        } catch (const Error& e) {
            read_errors.errors.emplace_back(p, e.what());
        }
    }
    // dialect may differ per file, so analyze in per-dialect batches
    UpdateSummary summary;
    std::vector<FileInput> brace, indent;
    for (auto& f : files) {
        (dialect_for_path(f.path) == health::Dialect::Indent ? indent : brace)
            .push_back(std::move(f));
    }
    if (!brace.empty()) {
        UpdateSummary s = update(brace, weights, health::Dialect::Brace);
        summary.analyzed += s.analyzed;
        summary.cache_hits += s.cache_hits;
        summary.errors.insert(summary.errors.end(), s.errors.begin(), s.errors.end());
    }
    if (!indent.empty()) {
        UpdateSummary s = update(indent, weights, health::Dialect::Indent);
        summary.analyzed += s.analyzed;
        summary.cache_hits += s.cache_hits;
        summary.errors.insert(summary.errors.end(), s.errors.begin(), s.errors.end());
    }
    summary.errors.insert(summary.errors.end(), read_errors.errors.begin(),
                          read_errors.errors.end());
    return summary;
}

std::vector<LookupResult> FeatureStore::lookup(
    const std::vector<std::string>& paths) const {
    std::vector<LookupResult> out;
    out.reserve(paths.size());
    for (const std::string& p : paths) {
        auto it = records_.find(p);
        if (it == records_.end()) out.push_back({p, std::nullopt});
        else out.push_back({p, it->second});
    }
    return out;
}

const FeatureRecord* FeatureStore::find(const std::string& path) const {
    auto it = records_.find(path);
    return it == records_.end() ? nullptr : &it->second;
}

int FeatureStore::apply_coverage(const std::map<std::string, double>& coverage) {
    int applied = 0;
    for (const auto& [path, fraction] : coverage) {
        if (fraction < 0.0 || fraction > 1.0) {
            throw DataError("coverage out of [0,1] for " + path);
        }
        auto it = records_.find(path);
        if (it != records_.end()) {
            it->second.coverage = fraction;
            ++applied;
        }
    }
    return applied;
}

void FeatureStore::remove(const std::string& path) { records_.erase(path); }

health::Dialect dialect_for_path(const std::string& path, health::Dialect fallback) {
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return fallback;
    std::string ext = path.substr(dot + 1);
    static const std::unordered_set<std::string> indent_exts = {"py", "pyi", "pyw"};
    static const std::unordered_set<std::string> brace_exts = {
        "c",  "h",  "cc", "hh", "cpp", "hpp", "cxx", "hxx", "java", "js",
        "ts", "jsx", "tsx", "go", "rs", "cs", "swift", "kt", "scala", "php"};
    if (indent_exts.contains(ext)) return health::Dialect::Indent;
    if (brace_exts.contains(ext)) return health::Dialect::Brace;
    return fallback;
}

} // namespace triage::store
