#pragma once

#include <stdexcept>
#include <string>

namespace mqsim {

/// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mismatched vector/matrix dimensions.
struct DimensionError : Error {
    using Error::Error;
};

/// A direct or iterative solve hit a numerically singular operator.
struct SingularError : Error {
    using Error::Error;
};

/// An iterative solver failed to reach its tolerance where convergence is mandatory.
struct ConvergenceError : Error {
    using Error::Error;
};

/// Model construction rejected its inputs (geometry, masks, materials).
struct ModelError : Error {
    using Error::Error;
};

/// Explicit run aborted because the iterate blew up.
struct InstabilityError : Error {
    using Error::Error;
};

/// File import/export failures, with a machine-checkable code.
struct IoError : Error {
    enum class Code {
        parse,
        dimension_mismatch,
        asymmetry,
        mass_on_nonconductive,
        empty_partition,
        inconsistent_source,
        file_missing,
    };
    Code code;
    IoError(Code c, const std::string& msg) : Error(msg), code(c) {}
};

/// Config-file errors carry the offending line for the CLI's exit-2 diagnostics.
struct ConfigError : Error {
    int line;
    ConfigError(int line_no, const std::string& msg) : Error(msg), line(line_no) {}
};

}  // namespace mqsim
