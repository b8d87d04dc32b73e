#pragma once

#include <string>
#include <string_view>

namespace triage::health {

// How blocks and functions are delimited in the source language.
enum class Dialect { Brace, Indent };

Dialect dialect_from_name(std::string_view name);
std::string_view dialect_name(Dialect d);

// Per-file quality measurements. Counts are raw; ratios live in [0,1].
//
// identifier_shortness is computed over unique identifier spellings, not
// occurrences, so loop counters do not dominate large files.
struct SubFactorVector {
    int cyclomatic_max = 0;         // max per-function complexity in the file
    double cyclomatic_mean = 0.0;   // mean over functions
    int file_loc = 0;               // non-blank, non-comment lines
    int function_length_max = 0;    // lines, signature through body end
    int nesting_depth_max = 0;      // block levels inside function bodies
    int arg_count_max = 0;          // parameters, max over functions
    double duplication_ratio = 0.0; // lines in any repeated 6-line window / file_loc
    double identifier_shortness = 0.0; // unique identifiers shorter than 3 chars

    bool operator==(const SubFactorVector&) const = default;
};

// Lexer-level analysis: a string/comment stripper runs first, then decision
// tokens (if, elif, for, while, case, catch, except, and, or, &&, ||, ternary ?)
// are counted per function. Complexity of a function = 1 + its decision tokens.
// A file with code but no recognizable function is treated as one top-level
// function so scripts still get scored. Pure and deterministic.
//
// Throws AnalysisError for non-text input (NUL bytes / invalid UTF-8).
SubFactorVector analyze_file(std::string_view source, Dialect dialect);

// Window length for the duplicated-block detector (clone-detection default).
inline constexpr int kDuplicationWindow = 6;

} // namespace triage::health
