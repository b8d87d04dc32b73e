#pragma once

#include "triage/subfactors.hpp"

#include <array>
#include <string>
#include <string_view>

namespace triage::health {

enum class Band { Healthy, Problematic, Unhealthy };

std::string_view band_name(Band b);
Band band_from_name(std::string_view name);

// value in [9,10] -> Healthy, [5,9) -> Problematic, [1,5) -> Unhealthy.
// Lower bounds are closed: 9.0 is Healthy, 5.0 is Problematic.
// Throws DomainError outside [1,10].
Band band_of(double value);

struct HealthScore {
    double value = 10.0; // clamped to [1,10]
    Band band = Band::Healthy;

    bool operator==(const HealthScore&) const = default;
};

// One saturating ramp per sub-factor: penalty = clamp((x-low)/(high-low), 0, 1).
struct FactorParams {
    double weight = 1.125;
    double low = 0.0;
    double high = 1.0;
};

// Defaults put a full set of saturated penalties at exactly 9 points, driving
// the score from 10 down to the floor of 1.
struct WeightConfig {
    FactorParams cyclomatic_max{1.125, 10, 30};
    FactorParams cyclomatic_mean{1.125, 4, 10};
    FactorParams file_loc{1.125, 300, 1500};
    FactorParams function_length_max{1.125, 50, 200};
    FactorParams nesting_depth_max{1.125, 3, 7};
    FactorParams arg_count_max{1.125, 4, 8};
    FactorParams duplication_ratio{1.125, 0.05, 0.30};
    FactorParams identifier_shortness{1.125, 0.2, 0.6};

    std::array<const FactorParams*, 8> factors() const {
        return {&cyclomatic_max,   &cyclomatic_mean,    &file_loc,
                &function_length_max, &nesting_depth_max, &arg_count_max,
                &duplication_ratio, &identifier_shortness};
    }
    std::array<FactorParams*, 8> factors() {
        return {&cyclomatic_max,   &cyclomatic_mean,    &file_loc,
                &function_length_max, &nesting_depth_max, &arg_count_max,
                &duplication_ratio, &identifier_shortness};
    }

    void validate() const; // ConfigError on negative weight or low >= high
    std::string digest() const;

    bool operator==(const WeightConfig&) const;
};

// Canonical sub-factor order used everywhere features are vectorized.
extern const std::array<std::string_view, 8> kSubFactorNames;

std::array<double, 8> sub_factor_values(const SubFactorVector& v);

// score = clamp(10 - sum_k w_k * penalty_k(v), 1, 10)
HealthScore composite_score(const SubFactorVector& v, const WeightConfig& weights);

} // namespace triage::health
