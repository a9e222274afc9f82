#ifndef MZSG_OBSTACLE_PDE_HPP
#define MZSG_OBSTACLE_PDE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mzsg/drbsde.hpp"
#include "mzsg/grids.hpp"
#include "mzsg/hamiltonian.hpp"

namespace mzsg {

enum class Contact : std::uint8_t { Interior = 0, Lower = 1, Upper = 2 };

/// PDE solution u(t_i, x_j) on the time x space grid, with the obstacle
/// projection recorded per node. The sandwich h <= u <= h' is exact at every
/// pre-terminal node; the terminal slice holds g unprojected.
struct ValueSurface {
    TimeGrid tgrid;
    SpaceGrid sgrid;
    std::vector<double> u;             // (N+1) x nodes
    std::vector<std::uint8_t> contact; // same shape
    int substeps_per_interval = 1;
    double cfl_dt = 0.0;
    bool exp_scaled = false;
    std::vector<std::string> warnings;

    std::size_t nodes() const { return sgrid.node_count(); }
    double at(int i, std::size_t j) const { return u[static_cast<std::size_t>(i) * nodes() + j]; }
    Contact contact_at(int i, std::size_t j) const {
        return static_cast<Contact>(contact[static_cast<std::size_t>(i) * nodes() + j]);
    }
    Vec node_coords(std::size_t j) const;
};

struct PdeOptions {
    IsaacsPolicy isaacs;
    bool audit_isaacs = true;
    double cfl_safety = 0.8;
    int max_substeps_per_interval = 20000;
};

/// Backward explicit monotone scheme: central second differences for the
/// diffusion, the Hamiltonian as an exhaustive min-max over the control
/// grids with one-sided differences upwinded per the sign of each control
/// pair's drift, then projection into the obstacle band. d <= 2 (d = 2
/// requires a diagonal sigma sigma*).
ValueSurface solve_double_obstacle_pde(const GameModel& model, const TimeGrid& tgrid,
                                       const SpaceGrid& sgrid, const PdeOptions& options = {});

/// Same scheme with the mollified truncation
///   ramp_n(|x|) H^{*+} - ramp_m(|x|) H^{*-},
/// ramp_k(r) = 1 for r <= k, 1+k-r on (k, k+1], 0 beyond.
ValueSurface truncated_pde_solve(const GameModel& model, const TimeGrid& tgrid,
                                 const SpaceGrid& sgrid, int n, int m,
                                 const PdeOptions& options = {});

/// Multilinear interpolation of slice i at x (clamped into the box).
double surface_value(const ValueSurface& surface, int i, const Vec& x);

/// z = sigma^T grad u at (t_i, x), gradient by central differences
/// (one-sided at the box boundary), interpolated between nodes.
Vec surface_z(const GameModel& model, const ValueSurface& surface, int i, const Vec& x);

struct ViscosityToleranceSpec {
    double c0 = 10.0; // tol = c0 * (dt + max dx)
};

struct ViscosityReport {
    double tol = 0.0;
    double fitted_c = 0.0;          // max interior residual / (dt + dx)
    double max_interior_abs = 0.0;  // |min(u-h, max(R, u-h'))| at interior nodes
    double max_lower_defect = 0.0;  // max(0, -tol - max(R, u-h')) at lower contact
    double max_upper_defect = 0.0;  // max(0, R - tol) at upper contact
    double max_lower_eq = 0.0;      // |u-h| at lower contact (exact by projection)
    double max_upper_eq = 0.0;
    int worst_step = -1;
    std::size_t worst_node = 0;
    bool passed = false;
};

/// Recomputes the discrete operator residual R = -du/dt - Lu - H* from the
/// stored slices and checks the variational-inequality sign conditions per
/// contact category.
ViscosityReport viscosity_residual_check(const GameModel& model, const ValueSurface& surface,
                                         const ViscosityToleranceSpec& spec = {});

/// exp(t) change of variable; forward scales, inverse undoes it.
enum class ExpDirection { Forward, Inverse };
ValueSurface exp_change_of_variable(const ValueSurface& surface, ExpDirection direction);

struct CompareOptions {
    std::vector<double> probe_fractions{0.25, 0.5, 0.75}; // of the time horizon
    std::vector<double> probe_offsets{-1.0, 0.0, 1.0};    // in units of sigma sqrt(t)
    double grid_allowance = 0.005;
    double regression_allowance = 0.005;
    double discretization_allowance = 0.02;
};

struct CompareReport {
    double u_pde_x0 = 0.0;
    double y0 = 0.0;
    double gap = 0.0;
    double mc_std_error = 0.0;
    double combined_tolerance = 0.0;
    bool flagged = false;
    struct Probe {
        double t = 0.0;
        Vec x;
        double u_pde = 0.0;
        double y_regression = 0.0;
        double gap = 0.0;
    };
    std::vector<Probe> probes;
    double max_probe_gap = 0.0;
};

/// |u_PDE(0,x0) - Y[0]| plus the same comparison at interior probe points,
/// against the combined (grid + Monte Carlo + regression) tolerance.
CompareReport compare_pde_probabilistic(const ValueSurface& surface, const ValueProcess& vp,
                                        const GameModel& model,
                                        const CompareOptions& options = {});

/// Regression-evaluated value of the solved process at an arbitrary state
/// (clamped into the obstacle band). Step N returns the terminal value.
double value_process_eval(const GameModel& model, const ValueProcess& vp, int step, const Vec& x);
Vec value_process_z(const ValueProcess& vp, int step, const Vec& x);

} // namespace mzsg

#endif // MZSG_OBSTACLE_PDE_HPP
