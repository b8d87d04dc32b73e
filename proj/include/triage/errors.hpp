#pragma once

#include <stdexcept>
#include <string>

namespace triage {

// Error taxonomy maps onto CLI exit codes: ConfigError -> 2, everything
// data-shaped -> 3. A NO-GO gate verdict is not an error (exit 1).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct DataError : Error { using Error::Error; };
struct AnalysisError : Error { using Error::Error; };
struct RoutingError : Error { using Error::Error; };
struct TrainingError : Error { using Error::Error; };
struct SimulationError : Error { using Error::Error; };
struct StatsError : Error { using Error::Error; };
struct StoreLockError : Error { using Error::Error; };

} // namespace triage
