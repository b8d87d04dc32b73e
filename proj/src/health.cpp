#include "triage/health.hpp"

#include "triage/errors.hpp"
#include "triage/io_util.hpp"

#include <algorithm>
#include <cstdio>

namespace triage::health {

const std::array<std::string_view, 8> kSubFactorNames = {
    "cyclomatic_max",   "cyclomatic_mean",    "file_loc",
    "function_length_max", "nesting_depth_max", "arg_count_max",
    "duplication_ratio", "identifier_shortness",
};

std::string_view band_name(Band b) {
    switch (b) {
        case Band::Healthy: return "Healthy";
        case Band::Problematic: return "Problematic";
        case Band::Unhealthy: return "Unhealthy";
    }
    return "?";
}

Band band_from_name(std::string_view name) {
    if (name == "Healthy") return Band::Healthy;
    if (name == "Problematic") return Band::Problematic;
    if (name == "Unhealthy") return Band::Unhealthy;
    throw DataError("unknown band: " + std::string(name));
}

Band band_of(double value) {
    if (!(value >= 1.0 && value <= 10.0)) {
        throw DomainError("health value out of range [1,10]: " + std::to_string(value));
    }
    if (value >= 9.0) return Band::Healthy;
    if (value >= 5.0) return Band::Problematic;
    return Band::Unhealthy;
}

void WeightConfig::validate() const {
    for (std::size_t i = 0; i < 8; ++i) {
        const FactorParams& f = *factors()[i];
        if (f.weight < 0.0) {
            throw ConfigError("negative weight for " + std::string(kSubFactorNames[i]));
        }
        if (!(f.high > f.low)) {
            throw ConfigError("knee points must satisfy low < high for " +
                              std::string(kSubFactorNames[i]));
        }
    }
}

std::string WeightConfig::digest() const {
    std::string canonical;
    char buf[96];
    for (std::size_t i = 0; i < 8; ++i) {
        const FactorParams& f = *factors()[i];
        std::snprintf(buf, sizeof(buf), "%s:%.17g,%.17g,%.17g;",
                      std::string(kSubFactorNames[i]).c_str(), f.weight, f.low, f.high);
        canonical += buf;
    }
    return io::to_hex(io::fnv1a64(canonical));
}

bool WeightConfig::operator==(const WeightConfig& other) const {
    auto a = factors();
    auto b = other.factors();
    for (std::size_t i = 0; i < 8; ++i) {
        if (a[i]->weight != b[i]->weight || a[i]->low != b[i]->low ||
            a[i]->high != b[i]->high) {
            return false;
        }
    }
    return true;
}

std::array<double, 8> sub_factor_values(const SubFactorVector& v) {
    return {static_cast<double>(v.cyclomatic_max),
            v.cyclomatic_mean,
            static_cast<double>(v.file_loc),
            static_cast<double>(v.function_length_max),
            static_cast<double>(v.nesting_depth_max),
            static_cast<double>(v.arg_count_max),
            v.duplication_ratio,
            v.identifier_shortness};
}

namespace {
double ramp(double x, const FactorParams& f) {
    double p = (x - f.low) / (f.high - f.low);
    return std::clamp(p, 0.0, 1.0);
}
} // namespace

HealthScore composite_score(const SubFactorVector& v, const WeightConfig& weights) {
    weights.validate();
    const std::array<double, 8> values = sub_factor_values(v);
    double penalty = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
        const FactorParams& f = *weights.factors()[i];
        penalty += f.weight * ramp(values[i], f);
    }
    const double value = std::clamp(10.0 - penalty, 1.0, 10.0);
    return HealthScore{value, band_of(value)};
}

} // namespace triage::health
