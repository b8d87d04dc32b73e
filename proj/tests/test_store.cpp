#include <doctest.h>

#include "triage/errors.hpp"
#include "triage/io_util.hpp"
#include "triage/rng.hpp"
#include "triage/store.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace triage;
using store::FeatureStore;
using store::FileInput;

namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) {
    return fs::temp_directory_path() / ("triage_test_" + name);
}

std::string fake_source(int seed, int loc) {
    Rng rng(static_cast<std::uint64_t>(seed));
    std::string out;
    for (int i = 0; i < loc; ++i) {
        out += "var" + std::to_string(rng.uniform_int(0, 50)) + " = " +
               std::to_string(rng.uniform_int(0, 999)) + "\n";
    }
    return out;
}

} // namespace

TEST_CASE("cold start analyzes everything") {
    FeatureStore s{health::WeightConfig{}};
    std::vector<FileInput> files;
    for (int i = 0; i < 5; ++i) {
        files.push_back({"f" + std::to_string(i) + ".py", fake_source(i, 10)});
    }
    const auto summary = s.update(files, health::WeightConfig{}, health::Dialect::Indent);
    CHECK(summary.analyzed == 5);
    CHECK(summary.cache_hits == 0);
    CHECK(s.size() == 5);
}

TEST_CASE("identical content is a cache hit, not a re-analysis") {
    FeatureStore s{health::WeightConfig{}};
    std::vector<FileInput> files = {{"a.py", "x = 1\n"}, {"b.py", "y = 2\n"},
                                    {"c.py", "z = 3\n"}};
    s.update(files, health::WeightConfig{}, health::Dialect::Indent);
    const auto second = s.update(files, health::WeightConfig{}, health::Dialect::Indent);
    CHECK(second.analyzed == 0);
    CHECK(second.cache_hits == 3);

    files[1].content = "y = 99\n";
    const auto third = s.update(files, health::WeightConfig{}, health::Dialect::Indent);
    CHECK(third.analyzed == 1);
    CHECK(third.cache_hits == 2);
}

TEST_CASE("files absent from an update are retained") {
    FeatureStore s{health::WeightConfig{}};
    s.update({{"keep.py", "x = 1\n"}}, health::WeightConfig{}, health::Dialect::Indent);
    s.update({{"other.py", "y = 2\n"}}, health::WeightConfig{}, health::Dialect::Indent);
    CHECK(s.size() == 2);
    CHECK(s.find("keep.py") != nullptr);
    s.remove("keep.py");
    CHECK(s.find("keep.py") == nullptr);
}

TEST_CASE("lookup preserves order and marks missing paths") {
    FeatureStore s{health::WeightConfig{}};
    s.update({{"a.py", "x = 1\n"}, {"b.py", "y = 2\n"}}, health::WeightConfig{},
             health::Dialect::Indent);
    const auto results = s.lookup({"b.py", "nope.py", "a.py"});
    REQUIRE(results.size() == 3);
    CHECK(results[0].path == "b.py");
    CHECK(results[0].record.has_value());
    CHECK(results[1].path == "nope.py");
    CHECK_FALSE(results[1].record.has_value());
    CHECK(results[2].path == "a.py");
    CHECK(results[2].record.has_value());
}

TEST_CASE("save and load round-trip") {
    const fs::path file = temp_path("store_roundtrip.jsonl");
    FeatureStore s{health::WeightConfig{}};
    s.update({{"a.py", fake_source(1, 30)}, {"b.cy", fake_source(2, 60)}},
             health::WeightConfig{}, health::Dialect::Indent);
    s.apply_coverage({{"a.py", 0.5}});
    s.save(file);

    const FeatureStore loaded = FeatureStore::load(file);
    CHECK(loaded.size() == s.size());
    CHECK(loaded.revision() == s.revision());
    CHECK(loaded.weights_digest() == s.weights_digest());
    const auto* a = loaded.find("a.py");
    REQUIRE(a != nullptr);
    CHECK(a->coverage == 0.5);
    CHECK(a->sub_factors == s.find("a.py")->sub_factors);
    CHECK(a->score == s.find("a.py")->score);
    fs::remove(file);
}

TEST_CASE("corrupted store lines are reported with their line number") {
    const fs::path file = temp_path("store_corrupt.jsonl");
    {
        std::ofstream out(file);
        out << R"({"format_version":1,"kind":"triage-feature-store","weights_digest":"x","revision":1})"
            << "\n";
        out << "this is not json\n";
    }
    CHECK_THROWS_WITH_AS(FeatureStore::load(file), doctest::Contains(":2"), DataError);
    fs::remove(file);
}

TEST_CASE("missing header is an integrity error") {
    const fs::path file = temp_path("store_empty.jsonl");
    { std::ofstream out(file); }
    CHECK_THROWS_AS(FeatureStore::load(file), DataError);
    fs::remove(file);
}

TEST_CASE("single-writer lock") {
    const fs::path file = temp_path("store_locked.jsonl");
    {
        io::FileLock lock(file);
        CHECK_THROWS_AS(io::FileLock{file}, StoreLockError);
    }
    // released on scope exit
    CHECK_NOTHROW(io::FileLock{file});
}

TEST_CASE("coverage outside [0,1] is rejected") {
    FeatureStore s{health::WeightConfig{}};
    s.update({{"a.py", "x = 1\n"}}, health::WeightConfig{}, health::Dialect::Indent);
    CHECK_THROWS_AS(s.apply_coverage({{"a.py", 1.5}}), DataError);
}

TEST_CASE("cache hit soundness and incremental equivalence under random edits") {
    Rng rng(99);
    const int n_files = 12;
    std::vector<std::string> contents(n_files);
    for (int i = 0; i < n_files; ++i) contents[static_cast<std::size_t>(i)] = fake_source(i, 20);

    FeatureStore incremental{health::WeightConfig{}};
    auto files_of = [&] {
        std::vector<FileInput> files;
        for (int i = 0; i < n_files; ++i) {
            files.push_back({"f" + std::to_string(i) + ".py",
                             contents[static_cast<std::size_t>(i)]});
        }
        return files;
    };
    incremental.update(files_of(), health::WeightConfig{}, health::Dialect::Indent);

    for (int round = 0; round < 6; ++round) {
        int changed = 0;
        for (int i = 0; i < n_files; ++i) {
            if (rng.bernoulli(0.3)) {
                contents[static_cast<std::size_t>(i)] =
                    fake_source(i + 100 * (round + 1), 20);
                ++changed;
            }
        }
        const auto summary =
            incremental.update(files_of(), health::WeightConfig{}, health::Dialect::Indent);
        CHECK(summary.analyzed == changed);
        CHECK(summary.cache_hits == n_files - changed);
    }

    FeatureStore scratch{health::WeightConfig{}};
    scratch.update(files_of(), health::WeightConfig{}, health::Dialect::Indent);
    for (const auto& [path, record] : scratch.records()) {
        const auto* inc = incremental.find(path);
        REQUIRE(inc != nullptr);
        CHECK(inc->equal_ignoring_revision(record));
    }
}

TEST_CASE("changing the weight config refreshes scores consistently") {
    FeatureStore s{health::WeightConfig{}};
    std::string big = fake_source(5, 400); // enough loc to trigger the file_loc ramp
    s.update({{"a.py", big}}, health::WeightConfig{}, health::Dialect::Indent);
    const double before = s.find("a.py")->score.value;

    health::WeightConfig harsher;
    harsher.file_loc.low = 50;
    harsher.file_loc.high = 200;
    s.update({{"a.py", big}}, harsher, health::Dialect::Indent);
    const auto* rec = s.find("a.py");
    CHECK(rec->score.value < before);
    CHECK(rec->score == health::composite_score(rec->sub_factors, harsher));
    CHECK(s.weights_digest() == harsher.digest());
}

TEST_CASE("update_from_disk records unreadable files and proceeds") {
    const fs::path good = temp_path("readable.py");
    { std::ofstream out(good); out << "x = 1\n"; }
    FeatureStore s{health::WeightConfig{}};
    const auto summary = s.update_from_disk(
        {good.string(), temp_path("missing_file.py").string()}, health::WeightConfig{});
    CHECK(summary.analyzed == 1);
    REQUIRE(summary.errors.size() == 1);
    CHECK(summary.errors[0].first == temp_path("missing_file.py").string());
    fs::remove(good);
}

TEST_CASE("dialect table picks indent for python extensions") {
    CHECK(store::dialect_for_path("pkg/mod.py") == health::Dialect::Indent);
    CHECK(store::dialect_for_path("src/main.cpp") == health::Dialect::Brace);
    CHECK(store::dialect_for_path("Makefile") == health::Dialect::Brace); // fallback
}
