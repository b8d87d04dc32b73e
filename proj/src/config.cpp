#include "triage/config.hpp"

#include "triage/errors.hpp"
#include "triage/io_util.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <unordered_set>

namespace triage::cfg {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& key) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
        throw ConfigError("bad numeric value for " + key + ": " + v);
    }
    return d;
}

long parse_long(const std::string& v, const std::string& key) {
    char* end = nullptr;
    const long d = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') {
        throw ConfigError("bad integer value for " + key + ": " + v);
    }
    return d;
}

std::vector<double> parse_double_list(const std::string& v, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(item, key));
    }
    return out;
}

std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += fmt(values[i]);
    }
    return out;
}

} // namespace

std::string Config::to_ini() const {
    std::ostringstream out;
    out << "[codehealth]\n";
    out << "default_dialect = " << default_dialect << "\n";
    out << "extensions_indent = " << extensions_indent << "\n";
    out << "extensions_brace = " << extensions_brace << "\n";
    for (std::size_t i = 0; i < 8; ++i) {
        const auto& f = *weights.factors()[i];
        const std::string name(health::kSubFactorNames[i]);
        out << name << ".weight = " << fmt(f.weight) << "\n";
        out << name << ".low = " << fmt(f.low) << "\n";
        out << name << ".high = " << fmt(f.high) << "\n";
    }
    out << "\n[router]\n";
    out << "t_light = " << fmt(thresholds.light) << "\n";
    out << "t_standard = " << fmt(thresholds.standard) << "\n";
    out << "learning_rate = " << fmt(hyperparams.learning_rate) << "\n";
    out << "epochs = " << hyperparams.epochs << "\n";
    out << "lambda = " << fmt(hyperparams.l2) << "\n";
    out << "split_fraction = " << fmt(hyperparams.split_fraction) << "\n";
    out << "tau_grid = " << join(hyperparams.tau_grid) << "\n";
    out << "\n[costs]\n";
    out << "light = " << fmt(costs.light) << "\n";
    out << "standard = " << fmt(costs.standard) << "\n";
    out << "heavy = " << fmt(costs.heavy) << "\n";
    out << "\n[outcomes]\n";
    out << "runs_per_tier = " << runs_per_tier << "\n";
    out << "health_dist = " << health_dist << "\n";
    out << "base_light = " << fmt(asymmetry.base_light) << "\n";
    out << "slope_light = " << fmt(asymmetry.slope_light) << "\n";
    out << "base_standard = " << fmt(asymmetry.base_standard) << "\n";
    out << "slope_standard = " << fmt(asymmetry.slope_standard) << "\n";
    out << "base_heavy = " << fmt(asymmetry.base_heavy) << "\n";
    out << "slope_heavy = " << fmt(asymmetry.slope_heavy) << "\n";
    out << "files_min = " << files_min << "\n";
    out << "files_max = " << files_max << "\n";
    out << "patch_min = " << patch_min << "\n";
    out << "patch_max = " << patch_max << "\n";
    out << "\n[pilot]\n";
    out << "size = " << pilot_size << "\n";
    out << "min_size = " << pilot_min_size << "\n";
    out << "p_hat_threshold = " << fmt(p_hat_threshold) << "\n";
    out << "cost_ratio_override = "
        << (cost_ratio_override ? fmt(*cost_ratio_override) : std::string("none"))
        << "\n";
    out << "\n[evaluation]\n";
    out << "coverage_bins = " << fmt(coverage_edges[0]) << "," << fmt(coverage_edges[1])
        << "\n";
    out << "caliper_fraction = " << fmt(caliper_fraction) << "\n";
    out << "\n[cli]\n";
    out << "seed = " << seed << "\n";
    return out.str();
}

Config Config::from_ini(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": malformed section header");
            }
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string qual = section + "." + key;

        if (section == "codehealth") {
            if (key == "default_dialect") {
                health::dialect_from_name(value); // validates
                c.default_dialect = value;
                continue;
            }
            if (key == "extensions_indent") { c.extensions_indent = value; continue; }
            if (key == "extensions_brace") { c.extensions_brace = value; continue; }
            const auto dot = key.find('.');
            if (dot != std::string::npos) {
                const std::string factor = key.substr(0, dot);
                const std::string field = key.substr(dot + 1);
                bool found = false;
                for (std::size_t i = 0; i < 8; ++i) {
                    if (factor == health::kSubFactorNames[i]) {
                        auto* f = c.weights.factors()[i];
                        if (field == "weight") f->weight = parse_double(value, qual);
                        else if (field == "low") f->low = parse_double(value, qual);
                        else if (field == "high") f->high = parse_double(value, qual);
                        else throw ConfigError("unknown key " + qual);
                        found = true;
                        break;
                    }
                }
                if (found) continue;
            }
            throw ConfigError("unknown key " + qual);
        }
        if (section == "router") {
            if (key == "t_light") c.thresholds.light = parse_double(value, qual);
            else if (key == "t_standard") c.thresholds.standard = parse_double(value, qual);
            else if (key == "learning_rate") c.hyperparams.learning_rate = parse_double(value, qual);
            else if (key == "epochs") c.hyperparams.epochs = static_cast<int>(parse_long(value, qual));
            else if (key == "lambda") c.hyperparams.l2 = parse_double(value, qual);
            else if (key == "split_fraction") c.hyperparams.split_fraction = parse_double(value, qual);
            else if (key == "tau_grid") c.hyperparams.tau_grid = parse_double_list(value, qual);
            else throw ConfigError("unknown key " + qual);
            continue;
        }
        if (section == "costs") {
            if (key == "light") c.costs.light = parse_double(value, qual);
            else if (key == "standard") c.costs.standard = parse_double(value, qual);
            else if (key == "heavy") c.costs.heavy = parse_double(value, qual);
            else throw ConfigError("unknown key " + qual);
            continue;
        }
        if (section == "outcomes") {
            if (key == "runs_per_tier") c.runs_per_tier = static_cast<int>(parse_long(value, qual));
            else if (key == "health_dist") c.health_dist = value;
            else if (key == "base_light") c.asymmetry.base_light = parse_double(value, qual);
            else if (key == "slope_light") c.asymmetry.slope_light = parse_double(value, qual);
            else if (key == "base_standard") c.asymmetry.base_standard = parse_double(value, qual);
            else if (key == "slope_standard") c.asymmetry.slope_standard = parse_double(value, qual);
            else if (key == "base_heavy") c.asymmetry.base_heavy = parse_double(value, qual);
            else if (key == "slope_heavy") c.asymmetry.slope_heavy = parse_double(value, qual);
            else if (key == "files_min") c.files_min = static_cast<int>(parse_long(value, qual));
            else if (key == "files_max") c.files_max = static_cast<int>(parse_long(value, qual));
            else if (key == "patch_min") c.patch_min = parse_long(value, qual);
            else if (key == "patch_max") c.patch_max = parse_long(value, qual);
            else throw ConfigError("unknown key " + qual);
            continue;
        }
        if (section == "pilot") {
            if (key == "size") c.pilot_size = static_cast<int>(parse_long(value, qual));
            else if (key == "min_size") c.pilot_min_size = static_cast<int>(parse_long(value, qual));
            else if (key == "p_hat_threshold") c.p_hat_threshold = parse_double(value, qual);
            else if (key == "cost_ratio_override") {
                if (value == "none") c.cost_ratio_override.reset();
                else c.cost_ratio_override = parse_double(value, qual);
            } else throw ConfigError("unknown key " + qual);
            continue;
        }
        if (section == "evaluation") {
            if (key == "coverage_bins") {
                const auto edges = parse_double_list(value, qual);
                if (edges.size() != 2 || !(0.0 < edges[0] && edges[0] < edges[1] &&
                                           edges[1] < 1.0)) {
                    throw ConfigError("coverage_bins needs two edges inside (0,1)");
                }
                c.coverage_edges = {edges[0], edges[1]};
            } else if (key == "caliper_fraction") {
                c.caliper_fraction = parse_double(value, qual);
            } else throw ConfigError("unknown key " + qual);
            continue;
        }
        if (section == "cli") {
            if (key == "seed") {
                char* end = nullptr;
                c.seed = std::strtoull(value.c_str(), &end, 10);
                if (end == value.c_str() || *end != '\0') {
                    throw ConfigError("bad seed: " + value);
                }
            } else throw ConfigError("unknown key " + qual);
            continue;
        }
        throw ConfigError("unknown section [" + section + "]");
    }
    c.weights.validate();
    c.thresholds.validate();
    c.costs.validate();
    return c;
}

Config Config::load(const std::filesystem::path& file) {
    return from_ini(io::read_file(file));
}

router::Hyperparams Config::effective_hyperparams() const {
    router::Hyperparams hp = hyperparams;
    hp.costs = costs;
    hp.seed = seed;
    return hp;
}

health::Dialect Config::resolve_dialect(const std::string& path) const {
    const auto dot = path.find_last_of('.');
    const health::Dialect fallback = health::dialect_from_name(default_dialect);
    if (dot == std::string::npos) return fallback;
    const std::string ext = path.substr(dot + 1);
    auto contains = [&](const std::string& csv) {
        std::stringstream ss(csv);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (trim(item) == ext) return true;
        }
        return false;
    };
    if (contains(extensions_indent)) return health::Dialect::Indent;
    if (contains(extensions_brace)) return health::Dialect::Brace;
    return fallback;
}

bool Config::operator==(const Config& other) const {
    return to_ini() == other.to_ini();
}

} // namespace triage::cfg
