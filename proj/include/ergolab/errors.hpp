#pragma once

#include <stdexcept>
#include <string>

namespace ergolab {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// measures
struct AtomOutOfRange : Error { using Error::Error; };
struct SolverFailure : Error { using Error::Error; };

// kernels
struct NotStochastic : Error { using Error::Error; };
struct BadParameter : Error { using Error::Error; };
struct BadGrid : Error { using Error::Error; };
struct BadDiffusion : Error { using Error::Error; };
struct CapExceeded : Error { using Error::Error; };

// ergodic
struct EmptyTrajectory : Error { using Error::Error; };
struct BadExponent : Error { using Error::Error; };
struct DegeneratePair : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };
struct NonPositiveValue : Error { using Error::Error; };

// oracle
struct NonUniqueStationary : Error { using Error::Error; };

// cli
struct ConfigError : Error { using Error::Error; };

}  // namespace ergolab
