#include "triage/subfactors.hpp"

#include "triage/errors.hpp"
#include "triage/io_util.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace triage::health {

namespace {

bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
}

void require_text(std::string_view source) {
    // NUL bytes mean binary input; the UTF-8 walk rejects stray continuation
    // bytes and truncated sequences.
    std::size_t i = 0;
    while (i < source.size()) {
        unsigned char c = static_cast<unsigned char>(source[i]);
        if (c == 0) throw AnalysisError("input is not text (NUL byte)");
        std::size_t extra = 0;
        if (c < 0x80) extra = 0;
        else if ((c & 0xe0) == 0xc0) extra = 1;
        else if ((c & 0xf0) == 0xe0) extra = 2;
        else if ((c & 0xf8) == 0xf0) extra = 3;
        else throw AnalysisError("input is not valid UTF-8");
        for (std::size_t k = 1; k <= extra; ++k) {
            if (i + k >= source.size() ||
                (static_cast<unsigned char>(source[i + k]) & 0xc0) != 0x80) {
                throw AnalysisError("input is not valid UTF-8");
            }
        }
        i += extra + 1;
    }
}

// ---------------------------------------------------------------------------
// string/comment stripping
//
// Comments are blanked to spaces, string contents are dropped (the quote
// characters stay), newlines always survive so line numbers stay stable.
// ---------------------------------------------------------------------------

std::string strip_brace(std::string_view src) {
    std::string out;
    out.reserve(src.size());
    std::size_t i = 0;
    const std::size_t n = src.size();
    while (i < n) {
        char c = src[i];
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            i += 2;
            while (i < n && !(src[i] == '*' && i + 1 < n && src[i + 1] == '/')) {
                if (src[i] == '\n') out += '\n';
                ++i;
            }
            if (i < n) i += 2;
            continue;
        }
        if (c == '"' && !out.empty() && out.back() == 'R') {
            // C++ raw string: R"delim( ... )delim"
            std::size_t j = i + 1;
            std::string delim;
            while (j < n && src[j] != '(' && j - i <= 18 && src[j] != '\n') {
                delim += src[j];
                ++j;
            }
            if (j < n && src[j] == '(') {
                std::string close = ")" + delim + "\"";
                std::size_t end = src.find(close, j + 1);
                out += "\"\"";
                if (end == std::string_view::npos) {
                    for (std::size_t k = j; k < n; ++k)
                        if (src[k] == '\n') out += '\n';
                    i = n;
                } else {
                    for (std::size_t k = j; k < end; ++k)
                        if (src[k] == '\n') out += '\n';
                    i = end + close.size();
                }
                continue;
            }
        }
        if (c == '"' || c == '\'' || c == '`') {
            char quote = c;
            out += quote;
            ++i;
            while (i < n) {
                if (src[i] == '\\' && i + 1 < n) {
                    i += 2;
                    continue;
                }
                if (src[i] == quote) {
                    out += quote;
                    ++i;
                    break;
                }
                if (src[i] == '\n') {
                    if (quote == '`') {
                        out += '\n'; // template literals span lines
                        ++i;
                        continue;
                    }
                    break; // unterminated plain string: give up at EOL
                }
                ++i;
            }
            continue;
        }
        out += c;
        ++i;
    }
    return out;
}

std::string strip_indent(std::string_view src) {
    std::string out;
    out.reserve(src.size());
    std::size_t i = 0;
    const std::size_t n = src.size();
    while (i < n) {
        char c = src[i];
        if (c == '#') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if ((c == '"' || c == '\'') && i + 2 < n && src[i + 1] == c && src[i + 2] == c) {
            std::string close(3, c);
            std::size_t end = src.find(close, i + 3);
            if (end == std::string_view::npos) {
                for (std::size_t k = i; k < n; ++k)
                    if (src[k] == '\n') out += '\n';
                i = n;
            } else {
                for (std::size_t k = i; k < end; ++k)
                    if (src[k] == '\n') out += '\n';
                i = end + 3;
            }
            continue;
        }
        if (c == '"' || c == '\'') {
            char quote = c;
            out += quote;
            ++i;
            while (i < n) {
                if (src[i] == '\\' && i + 1 < n) {
                    i += 2;
                    continue;
                }
                if (src[i] == quote) {
                    out += quote;
                    ++i;
                    break;
                }
                if (src[i] == '\n') break;
                ++i;
            }
            continue;
        }
        out += c;
        ++i;
    }
    return out;
}

// ---------------------------------------------------------------------------
// tokenizer
// ---------------------------------------------------------------------------

struct Token {
    enum class Kind { Ident, Punct };
    Kind kind;
    std::string_view text;
    int line; // 0-based
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    int line = 0;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (is_ident_start(c)) {
            std::size_t start = i;
            while (i < n && is_ident_char(text[i])) ++i;
            tokens.push_back({Token::Kind::Ident, text.substr(start, i - start), line});
            continue;
        }
        if (c >= '0' && c <= '9') { // numeric literal, skip as one unit
            while (i < n && (is_ident_char(text[i]) || text[i] == '.')) ++i;
            continue;
        }
        // two-char operators that matter for decision counting
        if (i + 1 < n) {
            char d = text[i + 1];
            if ((c == '&' && d == '&') || (c == '|' && d == '|') ||
                (c == '-' && d == '>') || (c == '?' && (d == '?' || d == '.'))) {
                tokens.push_back({Token::Kind::Punct, text.substr(i, 2), line});
                i += 2;
                continue;
            }
        }
        tokens.push_back({Token::Kind::Punct, text.substr(i, 1), line});
        ++i;
    }
    return tokens;
}

const std::unordered_set<std::string_view>& keyword_set() {
    static const std::unordered_set<std::string_view> kw = {
        "abstract", "and", "as", "assert", "async", "auto", "await", "base",
        "begin", "bool", "boolean", "break", "byte", "case", "catch", "chan",
        "char", "class", "const", "constexpr", "continue", "crate", "decimal",
        "def", "default", "defer", "del", "delegate", "delete", "do", "double",
        "dyn", "elif", "else", "elsif", "end", "enum", "except", "explicit",
        "export", "extends", "extern", "final", "finally", "float", "fn",
        "for", "friend", "from", "func", "function", "global", "go", "goto",
        "if", "impl", "implements", "implicit", "import", "in", "inline",
        "instanceof", "int", "interface", "internal", "is", "lambda", "let",
        "long", "loop", "match", "mod", "module", "mut", "namespace", "native",
        "new", "nil", "noexcept", "nonlocal", "not", "null", "nullptr",
        "object", "of", "operator", "or", "out", "override", "package",
        "pass", "private", "protected", "pub", "public", "raise", "readonly",
        "ref", "register", "require", "return", "sealed", "self", "short",
        "signed", "sizeof", "static", "struct", "super", "switch", "template",
        "then", "this", "throw", "throws", "trait", "try", "type", "typedef",
        "typename", "typeof", "uint", "union", "unless", "unsafe", "unsigned",
        "until", "use", "using", "var", "virtual", "void", "volatile", "when",
        "where", "while", "with", "yield", "true", "false", "True", "False",
        "None",
    };
    return kw;
}

bool is_decision(const Token& t) {
    if (t.kind == Token::Kind::Punct) {
        return t.text == "&&" || t.text == "||" || t.text == "?";
    }
    static const std::unordered_set<std::string_view> words = {
        "if", "elif", "for", "while", "case", "catch", "except", "and", "or",
    };
    return words.contains(t.text);
}

struct FunctionInfo {
    int start_line = 0;
    int end_line = 0;
    int args = 0;
    int decisions = 0;
    int max_nesting = 0;
};

// ---------------------------------------------------------------------------
// brace dialect: functions look like  name ( params ) [trivia] {
// ---------------------------------------------------------------------------

struct SignatureMatch {
    std::size_t body_index; // token index of the opening '{'
    int args;
};

bool match_brace_signature(const std::vector<Token>& toks, std::size_t i,
                           SignatureMatch& out) {
    if (toks[i].kind != Token::Kind::Ident || keyword_set().contains(toks[i].text)) {
        return false;
    }
    std::size_t j = i + 1;
    if (j >= toks.size() || toks[j].text != "(") return false;
    int depth = 1;
    int commas = 0;
    bool non_empty = false;
    ++j;
    while (j < toks.size() && depth > 0) {
        const auto& t = toks[j];
        if (t.text == "(") ++depth;
        else if (t.text == ")") --depth;
        else {
            if (depth == 1 && t.text == ",") ++commas;
            non_empty = true;
        }
        ++j;
    }
    if (depth != 0) return false;
    // Trivia between ')' and the body: qualifiers, a return type after '->',
    // or a constructor init list (whose (...)/{...} groups are skipped).
    bool in_init_list = false;
    int budget = 64;
    while (j < toks.size() && budget-- > 0) {
        const auto& t = toks[j];
        if (t.text == "{") {
            if (in_init_list && j > 0 && toks[j - 1].kind == Token::Kind::Ident) {
                int d = 1;
                ++j;
                while (j < toks.size() && d > 0) {
                    if (toks[j].text == "{") ++d;
                    else if (toks[j].text == "}") --d;
                    ++j;
                }
                continue;
            }
            out.body_index = j;
            out.args = non_empty ? commas + 1 : 0;
            return true;
        }
        if (t.text == ":") { in_init_list = true; ++j; continue; }
        if (in_init_list && t.text == "(") {
            int d = 1;
            ++j;
            while (j < toks.size() && d > 0) {
                if (toks[j].text == "(") ++d;
                else if (toks[j].text == ")") --d;
                ++j;
            }
            continue;
        }
        if (t.kind == Token::Kind::Ident || t.text == "->" || t.text == "*" ||
            t.text == "&" || (in_init_list && t.text == ",")) {
            ++j;
            continue;
        }
        return false;
    }
    return false;
}

std::vector<FunctionInfo> scan_brace_functions(const std::vector<Token>& toks) {
    std::vector<FunctionInfo> fns;
    int depth = 0;
    bool in_fn = false;
    int body_depth = 0;
    FunctionInfo cur;
    std::size_t i = 0;
    while (i < toks.size()) {
        const Token& t = toks[i];
        if (!in_fn) {
            SignatureMatch m;
            if (match_brace_signature(toks, i, m)) {
                cur = FunctionInfo{};
                cur.start_line = t.line;
                cur.args = m.args;
                // fast-forward to the body brace
                while (i < m.body_index) {
                    if (toks[i].text == "{") ++depth;
                    else if (toks[i].text == "}") depth = std::max(0, depth - 1);
                    ++i;
                }
                ++depth; // the body '{'
                body_depth = depth;
                cur.max_nesting = 1;
                in_fn = true;
                ++i;
                continue;
            }
        }
        if (t.text == "{") {
            ++depth;
            if (in_fn) cur.max_nesting = std::max(cur.max_nesting, depth - body_depth + 1);
        } else if (t.text == "}") {
            if (in_fn && depth == body_depth) {
                cur.end_line = t.line;
                fns.push_back(cur);
                in_fn = false;
            }
            depth = std::max(0, depth - 1);
        } else if (in_fn && is_decision(t)) {
            ++cur.decisions;
        }
        ++i;
    }
    if (in_fn) { // unterminated body: close at EOF
        cur.end_line = toks.empty() ? 0 : toks.back().line;
        fns.push_back(cur);
    }
    return fns;
}

// ---------------------------------------------------------------------------
// indent dialect: functions are `def name(...)` suites
// ---------------------------------------------------------------------------

struct LineInfo {
    int indent = 0;   // leading whitespace, tabs advance to the next multiple of 4
    bool code = false;
    std::size_t begin = 0, end = 0; // byte range in the stripped text
};

std::vector<LineInfo> split_lines(std::string_view text) {
    std::vector<LineInfo> lines;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i <= n) {
        LineInfo li;
        li.begin = i;
        int col = 0;
        bool counting = true;
        std::size_t j = i;
        while (j < n && text[j] != '\n') {
            char c = text[j];
            if (counting) {
                if (c == ' ') ++col;
                else if (c == '\t') col = col / 4 * 4 + 4;
                else counting = false;
            }
            if (!counting && !std::isspace(static_cast<unsigned char>(c))) li.code = true;
            ++j;
        }
        li.indent = col;
        li.end = j;
        lines.push_back(li);
        if (j >= n) break;
        i = j + 1;
    }
    return lines;
}

int count_def_args(std::string_view text, std::size_t from) {
    std::size_t open = text.find('(', from);
    if (open == std::string_view::npos) return 0;
    int depth = 1;
    int commas = 0;
    bool non_empty = false;
    for (std::size_t i = open + 1; i < text.size() && depth > 0; ++i) {
        char c = text[i];
        if (c == '(' || c == '[' || c == '{') ++depth;
        else if (c == ')' || c == ']' || c == '}') --depth;
        else if (depth == 1 && c == ',') ++commas;
        else if (!std::isspace(static_cast<unsigned char>(c))) non_empty = true;
    }
    return non_empty ? commas + 1 : 0;
}

bool line_starts_def(std::string_view text, const LineInfo& li) {
    std::size_t i = li.begin;
    while (i < li.end && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::string_view rest = text.substr(i, li.end - i);
    if (rest.starts_with("async")) {
        rest.remove_prefix(5);
        while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    }
    return rest.starts_with("def") && (rest.size() == 3 || !is_ident_char(rest[3]));
}

std::vector<FunctionInfo> scan_indent_functions(std::string_view text,
                                                const std::vector<LineInfo>& lines,
                                                const std::vector<Token>& toks) {
    std::vector<FunctionInfo> fns;
    std::size_t li = 0;
    while (li < lines.size()) {
        if (!lines[li].code || !line_starts_def(text, lines[li])) {
            ++li;
            continue;
        }
        FunctionInfo fn;
        fn.start_line = static_cast<int>(li);
        fn.args = count_def_args(text, lines[li].begin);
        const int def_indent = lines[li].indent;
        int last_code = static_cast<int>(li);
        std::vector<int> stack = {def_indent};
        std::size_t j = li + 1;
        while (j < lines.size()) {
            const LineInfo& L = lines[j];
            if (L.code) {
                if (L.indent <= def_indent) break;
                last_code = static_cast<int>(j);
                if (L.indent > stack.back()) stack.push_back(L.indent);
                else {
                    while (stack.size() > 1 && stack.back() > L.indent) stack.pop_back();
                }
                fn.max_nesting = std::max<int>(fn.max_nesting,
                                               static_cast<int>(stack.size()) - 1);
            }
            ++j;
        }
        fn.end_line = last_code;
        for (const Token& t : toks) {
            if (t.line >= fn.start_line && t.line <= fn.end_line && is_decision(t)) {
                ++fn.decisions;
            }
        }
        fns.push_back(fn);
        li = static_cast<std::size_t>(last_code) + 1;
    }
    return fns;
}

// ---------------------------------------------------------------------------

std::string normalize_ws(std::string_view line) {
    std::string out;
    bool in_space = true; // also trims leading whitespace
    for (char c : line) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out += ' ';
            in_space = false;
            out += c;
        }
    }
    return out;
}

double duplication_ratio(const std::vector<std::string>& code_lines) {
    const int w = kDuplicationWindow;
    const int n = static_cast<int>(code_lines.size());
    if (n < w) return 0.0;
    std::unordered_map<std::uint64_t, std::vector<int>> windows;
    for (int i = 0; i + w <= n; ++i) {
        std::string joined;
        for (int k = 0; k < w; ++k) {
            joined += code_lines[static_cast<std::size_t>(i + k)];
            joined += '\n';
        }
        windows[io::fnv1a64(joined)].push_back(i);
    }
    std::vector<char> dup(static_cast<std::size_t>(n), 0);
    for (const auto& [hash, starts] : windows) {
        if (starts.size() < 2) continue;
        for (int s : starts) {
            for (int k = 0; k < w; ++k) dup[static_cast<std::size_t>(s + k)] = 1;
        }
    }
    int marked = static_cast<int>(std::count(dup.begin(), dup.end(), 1));
    return static_cast<double>(marked) / static_cast<double>(n);
}

} // namespace

Dialect dialect_from_name(std::string_view name) {
    if (name == "brace") return Dialect::Brace;
    if (name == "indent") return Dialect::Indent;
    throw ConfigError("unknown dialect: " + std::string(name) + " (expected brace|indent)");
}

std::string_view dialect_name(Dialect d) {
    return d == Dialect::Brace ? "brace" : "indent";
}

SubFactorVector analyze_file(std::string_view source, Dialect dialect) {
    require_text(source);
    SubFactorVector v;
    if (source.empty()) return v;

    const std::string stripped =
        dialect == Dialect::Brace ? strip_brace(source) : strip_indent(source);
    const std::vector<LineInfo> lines = split_lines(stripped);
    const std::vector<Token> toks = tokenize(stripped);

    std::vector<std::string> code_lines;
    for (const LineInfo& L : lines) {
        if (L.code) code_lines.push_back(normalize_ws(
            std::string_view(stripped).substr(L.begin, L.end - L.begin)));
    }
    v.file_loc = static_cast<int>(code_lines.size());
    if (v.file_loc == 0) return v;

    std::vector<FunctionInfo> fns = dialect == Dialect::Brace
                                        ? scan_brace_functions(toks)
                                        : scan_indent_functions(stripped, lines, toks);
    if (fns.empty()) {
        // no recognizable function: score the file as one top-level unit
        // spanning the first through last code line
        FunctionInfo whole;
        int first_code = -1, last_code = 0;
        for (int i = 0; i < static_cast<int>(lines.size()); ++i) {
            if (lines[static_cast<std::size_t>(i)].code) {
                if (first_code < 0) first_code = i;
                last_code = i;
            }
        }
        whole.start_line = std::max(first_code, 0);
        whole.end_line = last_code;
        for (const Token& t : toks)
            if (is_decision(t)) ++whole.decisions;
        int depth = 0;
        if (dialect == Dialect::Brace) {
            for (const Token& t : toks) {
                if (t.text == "{") whole.max_nesting = std::max(whole.max_nesting, ++depth);
                else if (t.text == "}") depth = std::max(0, depth - 1);
            }
        } else {
            std::vector<int> stack;
            for (const LineInfo& L : lines) {
                if (!L.code) continue;
                if (stack.empty()) { stack.push_back(L.indent); continue; }
                if (L.indent > stack.back()) stack.push_back(L.indent);
                else while (stack.size() > 1 && stack.back() > L.indent) stack.pop_back();
                whole.max_nesting = std::max<int>(whole.max_nesting,
                                                  static_cast<int>(stack.size()) - 1);
            }
        }
        whole.args = 0;
        fns.push_back(whole);
    }

    long total_cyclo = 0;
    for (const FunctionInfo& fn : fns) {
        const int cyclo = 1 + fn.decisions;
        total_cyclo += cyclo;
        v.cyclomatic_max = std::max(v.cyclomatic_max, cyclo);
        v.nesting_depth_max = std::max(v.nesting_depth_max, fn.max_nesting);
        v.arg_count_max = std::max(v.arg_count_max, fn.args);
        v.function_length_max =
            std::max(v.function_length_max, fn.end_line - fn.start_line + 1);
    }
    v.cyclomatic_mean =
        static_cast<double>(total_cyclo) / static_cast<double>(fns.size());

    v.duplication_ratio = duplication_ratio(code_lines);

    std::unordered_set<std::string_view> idents;
    for (const Token& t : toks) {
        if (t.kind == Token::Kind::Ident && !keyword_set().contains(t.text)) {
            idents.insert(t.text);
        }
    }
    if (!idents.empty()) {
        int shorties = 0;
        for (std::string_view id : idents)
            if (id.size() < 3) ++shorties;
        v.identifier_shortness =
            static_cast<double>(shorties) / static_cast<double>(idents.size());
    }
    return v;
}

} // namespace triage::health
