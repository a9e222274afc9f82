#ifndef MZSG_ERRORS_HPP
#define MZSG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mzsg {

/// Ill-posed problem data (empty grids, non-finite model output, bad bounds).
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure during a solve (singular matrix, CFL budget, overflow).
class NumericsError : public std::runtime_error {
public:
    explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

/// Game solving refused because the grid-level Isaacs gap is too large.
class IsaacsError : public NumericsError {
public:
    IsaacsError(const std::string& what, double gap)
        : NumericsError(what), gap_(gap) {}
    double gap() const { return gap_; }

private:
    double gap_;
};

/// Cross-sectional regression could not be solved (collinear features).
class RegressionError : public NumericsError {
public:
    explicit RegressionError(const std::string& what) : NumericsError(what) {}
};

/// Configuration parsing / schema violation.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mzsg

#endif // MZSG_ERRORS_HPP
