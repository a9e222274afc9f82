#ifndef MZSG_REGRESSION_HPP
#define MZSG_REGRESSION_HPP

#include <memory>
#include <string>
#include <vector>

#include "mzsg/forward_sde.hpp"
#include "mzsg/linalg.hpp"

namespace mzsg {

/// Cross-sectional conditional-expectation estimator family.
struct RegressionBasis {
    enum class Family { Polynomial, LocalBins };
    Family family = Family::Polynomial;
    int degree = 4;     // polynomial total degree
    int bin_count = 64; // local partitioning cells

    std::string tag() const {
        return family == Family::Polynomial ? "poly(" + std::to_string(degree) + ")"
                                            : "bins(" + std::to_string(bin_count) + ")";
    }
};

/// A fitted scalar function of the state, evaluable at arbitrary points
/// (feedback strategies query it off the training cross-section).
class FittedFn {
public:
    virtual ~FittedFn() = default;
    virtual double eval(const double* x) const = 0;
    double eval(const Vec& x) const { return eval(x.data()); }
};

/// Per-step regression workspace. Construction digests the cross-section of
/// states once (standardization + Gram factorization, or partition edges);
/// each fit() then projects one response vector. Constant coordinates are
/// dropped, so degenerate steps (all paths at x0) reduce to the plain mean.
class StepRegression {
public:
    StepRegression(const RegressionBasis& spec, const PathBundle& bundle, int step,
                   std::string label);
    ~StepRegression();
    StepRegression(StepRegression&&) noexcept;

    /// Least-squares fit; fills fitted[m] for every path and returns the
    /// evaluator. Throws RegressionError when features are collinear.
    std::shared_ptr<FittedFn> fit(const std::vector<double>& responses,
                                  std::vector<double>* fitted) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace mzsg

#endif // MZSG_REGRESSION_HPP
