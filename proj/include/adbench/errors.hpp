#pragma once

// Error taxonomy. Everything thrown by the library derives from adbench::Error
// so the CLI can catch one type at the process boundary; per-condition types
// exist so tests can assert the exact failure mode.

#include <iostream>
#include <stdexcept>
#include <string>

namespace adbench {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// dataset / csv
struct EmptyFileError : Error { using Error::Error; };
struct RaggedRowsError : Error { using Error::Error; };
struct MissingTargetError : Error { using Error::Error; };
struct SchemaMismatchError : Error { using Error::Error; };
struct DegenerateSplitError : Error { using Error::Error; };

// models
struct NotFittedError : Error { using Error::Error; };
struct SingularDesignError : Error { using Error::Error; };
struct CholeskyFailureError : Error { using Error::Error; };
struct DivergedTrainingError : Error { using Error::Error; };

// measures
struct MissingModelContextError : Error { using Error::Error; };
struct SingularGramError : Error { using Error::Error; };
struct ZeroVectorError : Error { using Error::Error; };
struct LengthMismatchError : Error { using Error::Error; };

// validation
struct DegenerateInputError : Error { using Error::Error; };
struct EvenWindowError : Error { using Error::Error; };
struct WindowTooLargeError : Error { using Error::Error; };

// config / io
struct ConfigError : Error { using Error::Error; };
struct VersionMismatchError : Error { using Error::Error; };
struct InvalidInputError : Error { using Error::Error; };

// Non-fatal conditions (NonConvergence, ZeroVarianceTarget, DegenerateScale,
// negative-variance clamps) go through here instead of throwing.
inline void warn(const std::string& msg) {
    std::cerr << "[adbench warn] " << msg << "\n";
}

}  // namespace adbench
