#pragma once

#include "triage/costmodel.hpp"
#include "triage/health.hpp"
#include "triage/outcomes.hpp"
#include "triage/router.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace triage::cfg {

// Every constant has a default identical to the module documentation; a run
// with no config file behaves exactly like the defaults below. File format is
// INI-style sections ([codehealth], [router], ...); flags override file
// values.
struct Config {
    // [codehealth]
    health::WeightConfig weights;
    std::string default_dialect = "brace";
    std::string extensions_indent = "py,pyi,pyw";
    std::string extensions_brace =
        "c,h,cc,hh,cpp,hpp,cxx,hxx,java,js,ts,jsx,tsx,go,rs,cs,swift,kt,scala,php";

    // [router]
    router::Thresholds thresholds{};
    router::Hyperparams hyperparams{}; // costs mirror the [costs] section

    // [costs]
    cost::CostParams costs{};

    // [outcomes]
    outcomes::AsymmetryParams asymmetry{};
    int runs_per_tier = 3;
    std::string health_dist = "uniform";
    int files_min = 1, files_max = 3;
    long patch_min = 1, patch_max = 1000;

    // [pilot]
    int pilot_size = 50;
    int pilot_min_size = 20;
    double p_hat_threshold = 0.56;
    std::optional<double> cost_ratio_override;

    // [evaluation]
    std::array<double, 2> coverage_edges = {0.3, 0.7};
    double caliper_fraction = 0.2;

    // [cli]
    std::uint64_t seed = 42;

    std::string to_ini() const;
    static Config from_ini(const std::string& text);
    static Config load(const std::filesystem::path& file);

    // applies [router]/[costs] consistently
    router::Hyperparams effective_hyperparams() const;

    health::Dialect resolve_dialect(const std::string& path) const;

    bool operator==(const Config& other) const;
};

} // namespace triage::cfg
