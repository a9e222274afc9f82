#ifndef MZSG_DRBSDE_HPP
#define MZSG_DRBSDE_HPP

#include <memory>
#include <string>
#include <vector>

#include "mzsg/forward_sde.hpp"
#include "mzsg/hamiltonian.hpp"
#include "mzsg/regression.hpp"

namespace mzsg {

/// Which driver the backward recursion integrates.
struct GeneratorSpec {
    enum class Kind { Zero, HStar, TruncatedHStar, Phi, TruncatedPhi };
    Kind kind = Kind::HStar;
    int n = 0; // truncation level for the positive part / phi coefficient
    int m = 0; // truncation level for the negative part

    std::string tag() const;
};

/// phi(t,x,z) = C(1+x_norm)|z| + C(1+x_norm^p); the dominating generator.
/// x_norm is the current state magnitude (Markovian stand-in for the running
/// supremum).
double phi_generator(double t, double x_norm, const Vec& z, double C, double p);

/// min(C(1+x_norm), n)|z| + C(1+x_norm^p); Lipschitz in z, increases to phi.
double truncated_phi(double t, double x_norm, const Vec& z, double C, double p, int n);

/// H^{*n,m} = H^{*+} 1_{|x|<=n} - H^{*-} 1_{|x|<=m}.
double truncated_hamiltonian(const GameModel& model, double t, const Vec& x, const Vec& z,
                             int n, int m);

double generator_value(const GameModel& model, const GeneratorSpec& gen, double t, const Vec& x,
                       const Vec& z);

/// Regression evaluators kept per backward step so the solved process can be
/// queried at states off the training cross-section (feedback strategies,
/// PDE comparisons).
struct StepFits {
    std::shared_ptr<FittedFn> continuation;
    std::vector<std::shared_ptr<FittedFn>> z;
};

/// Discretized (Y, Z, K+, K-) along the grid; reflection is applied after
/// each driver step and the K increments are the clamping residuals.
struct ValueProcess {
    TimeGrid grid;
    int path_count = 0;
    int dim = 0;
    RegressionBasis basis;
    GeneratorSpec generator;

    std::vector<double> y;        // (N+1) x M
    std::vector<double> z;        // N x M x d
    std::vector<double> dk_plus;  // N x M
    std::vector<double> dk_minus; // N x M
    std::vector<StepFits> fits;   // per step 0..N-1

    double Y(int i, int m) const {
        return y[static_cast<std::size_t>(i) * path_count + m];
    }
    const double* Z(int i, int m) const {
        return &z[(static_cast<std::size_t>(i) * path_count + m) * dim];
    }
    double dKplus(int i, int m) const {
        return dk_plus[static_cast<std::size_t>(i) * path_count + m];
    }
    double dKminus(int i, int m) const {
        return dk_minus[static_cast<std::size_t>(i) * path_count + m];
    }
    double y0_mean() const;
};

struct DrbsdeOptions {
    IsaacsPolicy isaacs;
    bool audit_isaacs = true; // applies to the H*-based generators
};

/// Backward regression solve of the doubly reflected BSDE along the bundle.
/// Z by the martingale-increment projection, continuation by least squares,
/// then driver step and projection into the obstacle band.
ValueProcess solve_drbsde(const GameModel& model, const PathBundle& bundle,
                          const RegressionBasis& basis, const GeneratorSpec& generator,
                          const DrbsdeOptions& options = {});

/// Post-hoc check of the barrier sandwich, K sign/exclusivity and the
/// discrete complementarity sums. Throws NumericsError on violation.
struct ValueProcessCheck {
    double max_lower_breach = 0.0;
    double max_upper_breach = 0.0;
    double max_complementarity = 0.0;
    double tol_barrier = 1e-8;
};
ValueProcessCheck check_value_process(const GameModel& model, const PathBundle& bundle,
                                      const ValueProcess& vp, double tol_barrier = 1e-8);

/// Comparison-theorem orderings of the truncated solves under common random
/// numbers, plus domination by the phi-generator solve.
struct MonotonicityReport {
    struct Solve {
        int n = 0;
        int m = 0;
        double y0 = 0.0;
    };
    std::vector<Solve> solves;
    double phi_y0 = 0.0;
    double max_violation_n = 0.0;   // Y^{n,m} must be non-decreasing in n
    double max_violation_m = 0.0;   // ... non-increasing in m
    double max_violation_phi = 0.0; // Y^{n,m} <= Y^phi
    int worst_step = -1;
    int worst_path = -1;
};

MonotonicityReport monotonicity_audit(const GameModel& model, const PathBundle& bundle,
                                      const RegressionBasis& basis, std::vector<int> n_list,
                                      std::vector<int> m_list,
                                      const DrbsdeOptions& options = {});

} // namespace mzsg

#endif // MZSG_DRBSDE_HPP
