#include <doctest.h>

#include "triage/errors.hpp"
#include "triage/health.hpp"
#include "triage/rng.hpp"
#include "triage/subfactors.hpp"

#include <algorithm>
#include <string>

using namespace triage;
using health::analyze_file;
using health::Band;
using health::Dialect;
using health::SubFactorVector;
using health::WeightConfig;

TEST_CASE("straight-line function has base complexity 1") {
    const auto v = analyze_file("int f(int x) { return x; }\n", Dialect::Brace);
    CHECK(v.cyclomatic_max == 1);
    CHECK(v.cyclomatic_mean == doctest::Approx(1.0));
    CHECK(v.file_loc == 1);
    CHECK(v.arg_count_max == 1);
    CHECK(v.nesting_depth_max == 1);
}

TEST_CASE("one if plus one while gives complexity 3") {
    const std::string src =
        "int f(int x) {\n"
        "  if (x > 0) { x = x + 1; }\n"
        "  while (x < 10) { x = x + 2; }\n"
        "  return x;\n"
        "}\n";
    const auto v = analyze_file(src, Dialect::Brace);
    CHECK(v.cyclomatic_max == 3);
    CHECK(v.nesting_depth_max == 2);
    CHECK(v.function_length_max == 5);
}

TEST_CASE("empty file yields the all-zero vector") {
    const auto v = analyze_file("", Dialect::Brace);
    CHECK(v == SubFactorVector{});
    const auto vi = analyze_file("", Dialect::Indent);
    CHECK(vi == SubFactorVector{});
}

TEST_CASE("indent dialect functions and decisions") {
    const std::string src =
        "def f(x):\n"
        "    if x > 0:\n"
        "        return x\n"
        "    return 0\n";
    const auto v = analyze_file(src, Dialect::Indent);
    CHECK(v.cyclomatic_max == 2);
    CHECK(v.arg_count_max == 1);
    CHECK(v.nesting_depth_max == 2);
    CHECK(v.file_loc == 4);
    CHECK(v.function_length_max == 4);
}

TEST_CASE("decision tokens inside strings and comments do not count") {
    const std::string brace =
        "int f() {\n"
        "  const char* s = \"if while for && ||\";\n"
        "  // if if if\n"
        "  /* while? */\n"
        "  return 0;\n"
        "}\n";
    CHECK(analyze_file(brace, Dialect::Brace).cyclomatic_max == 1);

    const std::string indent =
        "def f():\n"
        "    s = 'if and or'\n"
        "    # while while\n"
        "    return s\n";
    CHECK(analyze_file(indent, Dialect::Indent).cyclomatic_max == 1);
}

TEST_CASE("boolean operators and ternary count as decisions") {
    const auto v = analyze_file("int f(int a, int b) { return a && b ? 1 : a || b; }\n",
                                Dialect::Brace);
    // &&, ?, ||
    CHECK(v.cyclomatic_max == 4);
    CHECK(v.arg_count_max == 2);
}

TEST_CASE("python and/or keywords count") {
    const auto v = analyze_file("def f(a, b):\n    return a and b or a\n",
                                Dialect::Indent);
    CHECK(v.cyclomatic_max == 3);
    CHECK(v.arg_count_max == 2);
}

TEST_CASE("file with code but no functions is scored as one unit") {
    const auto v = analyze_file("x = 1\nif x:\n    x = 2\n", Dialect::Indent);
    CHECK(v.cyclomatic_max == 2); // the if
    CHECK(v.file_loc == 3);
    CHECK(v.function_length_max == 3);
}

TEST_CASE("duplication ratio marks repeated six-line windows") {
    std::string block;
    for (int i = 0; i < 6; ++i)
        block += "v" + std::to_string(i) + " = " + std::to_string(i) + "\n";
    std::string filler;
    for (int i = 0; i < 8; ++i)
        filler += "w" + std::to_string(i) + " = " + std::to_string(i + 10) + "\n";
    const auto v = analyze_file(block + block + filler, Dialect::Indent);
    CHECK(v.file_loc == 20);
    CHECK(v.duplication_ratio == doctest::Approx(12.0 / 20.0));

    // below the window size nothing can repeat
    const auto small = analyze_file("a = 1\na = 1\n", Dialect::Indent);
    CHECK(small.duplication_ratio == 0.0);
}

TEST_CASE("duplication hashing ignores whitespace differences") {
    std::string block, spaced;
    for (int i = 0; i < 6; ++i) {
        block += "v" + std::to_string(i) + " = " + std::to_string(i) + "\n";
        spaced += "v" + std::to_string(i) + "   =   " + std::to_string(i) + "\n";
    }
    const auto v = analyze_file(block + spaced, Dialect::Indent);
    CHECK(v.duplication_ratio == doctest::Approx(1.0));
}

TEST_CASE("identifier shortness over unique spellings") {
    const auto v = analyze_file(
        "int abc(int x) { int y = x; int defg = y; return defg; }\n", Dialect::Brace);
    // unique identifiers: abc, x, y, defg -> 2 of 4 shorter than 3 chars
    CHECK(v.identifier_shortness == doctest::Approx(0.5));
}

TEST_CASE("non-text input is rejected") {
    CHECK_THROWS_AS(analyze_file(std::string("a\0b", 3), Dialect::Brace), AnalysisError);
    CHECK_THROWS_AS(analyze_file("\xff\xfe", Dialect::Brace), AnalysisError);
    CHECK_NOTHROW(analyze_file("caf\xc3\xa9 = 1\n", Dialect::Indent)); // valid UTF-8
}

TEST_CASE("unknown dialect name is a configuration error") {
    CHECK_THROWS_AS(health::dialect_from_name("tabs"), ConfigError);
    CHECK(health::dialect_from_name("brace") == Dialect::Brace);
    CHECK(health::dialect_from_name("indent") == Dialect::Indent);
}

TEST_CASE("analysis is deterministic") {
    const std::string src =
        "def g(a, b, c):\n"
        "    for i in range(a):\n"
        "        if i % 2 == 0 and b:\n"
        "            c += i\n"
        "    return c\n";
    const auto v1 = analyze_file(src, Dialect::Indent);
    const auto v2 = analyze_file(src, Dialect::Indent);
    CHECK(v1 == v2);
}

// ---------------------------------------------------------------------------
// composite score
// ---------------------------------------------------------------------------

TEST_CASE("all-zero vector scores a perfect 10") {
    const auto s = health::composite_score(SubFactorVector{}, WeightConfig{});
    CHECK(s.value == doctest::Approx(10.0));
    CHECK(s.band == Band::Healthy);
}

TEST_CASE("fully saturated penalties drive the score to the floor") {
    SubFactorVector v;
    v.cyclomatic_max = 30;
    v.cyclomatic_mean = 10;
    v.file_loc = 1500;
    v.function_length_max = 200;
    v.nesting_depth_max = 7;
    v.arg_count_max = 8;
    v.duplication_ratio = 0.30;
    v.identifier_shortness = 0.6;
    const auto s = health::composite_score(v, WeightConfig{});
    CHECK(s.value == doctest::Approx(1.0));
    CHECK(s.band == Band::Unhealthy);

    // beyond the knees still clamps at 1
    v.cyclomatic_max = 1000;
    v.file_loc = 100000;
    CHECK(health::composite_score(v, WeightConfig{}).value == doctest::Approx(1.0));
}

TEST_CASE("single-factor ramp, evaluated by hand") {
    // cyclomatic_max = 20 with knees (10, 30): penalty (20-10)/20 = 0.5,
    // score = 10 - 1.125 * 0.5 = 9.4375
    SubFactorVector v;
    v.cyclomatic_max = 20;
    const auto s = health::composite_score(v, WeightConfig{});
    CHECK(s.value == doctest::Approx(9.4375).epsilon(1e-12));
    CHECK(s.band == Band::Healthy);
}

TEST_CASE("negative weight is a configuration error") {
    WeightConfig w;
    w.duplication_ratio.weight = -0.1;
    CHECK_THROWS_AS(health::composite_score(SubFactorVector{}, w), ConfigError);
    WeightConfig bad_knees;
    bad_knees.file_loc.low = 10;
    bad_knees.file_loc.high = 10;
    CHECK_THROWS_AS(health::composite_score(SubFactorVector{}, bad_knees), ConfigError);
}

namespace {
SubFactorVector random_vector(Rng& rng) {
    SubFactorVector v;
    v.cyclomatic_max = static_cast<int>(rng.uniform_int(0, 60));
    v.cyclomatic_mean = rng.uniform(0, 20);
    v.file_loc = static_cast<int>(rng.uniform_int(0, 3000));
    v.function_length_max = static_cast<int>(rng.uniform_int(0, 400));
    v.nesting_depth_max = static_cast<int>(rng.uniform_int(0, 12));
    v.arg_count_max = static_cast<int>(rng.uniform_int(0, 16));
    v.duplication_ratio = rng.uniform01();
    v.identifier_shortness = rng.uniform01();
    return v;
}
} // namespace

TEST_CASE("monotonicity: larger sub-factors never raise the score") {
    Rng rng(2024);
    const WeightConfig w;
    for (int trial = 0; trial < 200; ++trial) {
        SubFactorVector v = random_vector(rng);
        const double base = health::composite_score(v, w).value;
        SubFactorVector bumped = v;
        switch (trial % 8) {
            case 0: bumped.cyclomatic_max += 5; break;
            case 1: bumped.cyclomatic_mean += 2.5; break;
            case 2: bumped.file_loc += 400; break;
            case 3: bumped.function_length_max += 60; break;
            case 4: bumped.nesting_depth_max += 2; break;
            case 5: bumped.arg_count_max += 3; break;
            case 6:
                bumped.duplication_ratio = std::min(1.0, bumped.duplication_ratio + 0.2);
                break;
            case 7:
                bumped.identifier_shortness =
                    std::min(1.0, bumped.identifier_shortness + 0.2);
                break;
        }
        CHECK(health::composite_score(bumped, w).value <= base + 1e-12);
    }
}

TEST_CASE("score stays within [1,10] for any finite vector") {
    Rng rng(7);
    const WeightConfig w;
    for (int trial = 0; trial < 500; ++trial) {
        const double s = health::composite_score(random_vector(rng), w).value;
        CHECK(s >= 1.0);
        CHECK(s <= 10.0);
    }
}

// ---------------------------------------------------------------------------
// bands
// ---------------------------------------------------------------------------

TEST_CASE("band thresholds are closed at the low end") {
    CHECK(health::band_of(9.0) == Band::Healthy);
    CHECK(health::band_of(10.0) == Band::Healthy);
    CHECK(health::band_of(8.9) == Band::Problematic);
    CHECK(health::band_of(5.0) == Band::Problematic);
    CHECK(health::band_of(4.999) == Band::Unhealthy);
    CHECK(health::band_of(1.0) == Band::Unhealthy);
}

TEST_CASE("out-of-range values are a domain error") {
    CHECK_THROWS_AS(health::band_of(0.99), DomainError);
    CHECK_THROWS_AS(health::band_of(10.01), DomainError);
}

TEST_CASE("every value maps to exactly one band") {
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.uniform(1.0, 10.0);
        const Band b = health::band_of(v);
        const int matches = (v >= 9.0 && b == Band::Healthy ? 1 : 0) +
                            (v >= 5.0 && v < 9.0 && b == Band::Problematic ? 1 : 0) +
                            (v < 5.0 && b == Band::Unhealthy ? 1 : 0);
        CHECK(matches == 1);
    }
}
