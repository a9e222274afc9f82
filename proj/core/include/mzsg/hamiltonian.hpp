#ifndef MZSG_HAMILTONIAN_HPP
#define MZSG_HAMILTONIAN_HPP

#include <cstdint>

#include "mzsg/model.hpp"

namespace mzsg {

/// Result of one exhaustive inf-sup / sup-inf scan over the control grids.
/// Ties are broken toward the lowest grid index, so repeated calls on
/// identical inputs return identical selectors.
struct HamiltonianResult {
    double value_infsup = 0.0;  // inf_a sup_b H
    double value_supinf = 0.0;  // sup_b inf_a H
    std::size_t ustar_index = 0;
    std::size_t vstar_index = 0;
    double gap = 0.0;           // value_infsup - value_supinf, >= 0
};

/// H(t,x,z,a,b) = z . sigma^{-1}(t,x) f(t,x,a,b) + Gamma(t,x,a,b).
double hamiltonian_value(const GameModel& model, double t, const Vec& x, const Vec& z,
                         double a, double b);

HamiltonianResult isaacs_infsup(const GameModel& model, double t, const Vec& x, const Vec& z);

/// Checks the pointwise saddle inequalities of the selected pair over the
/// whole grid, within tolerance.
bool saddle_pointwise_check(const GameModel& model, double t, const Vec& x, const Vec& z,
                            const HamiltonianResult& result, double tolerance = 1e-12);

struct IsaacsAuditOptions {
    double z_radius = 5.0;
    double x_radius = 10.0;
};

/// Maximum inf-sup minus sup-inf gap over seeded random (t, x, z) samples.
/// Zero certifies the model family as Isaacs-satisfying at the grid level.
double isaacs_gap_audit(const GameModel& model, int sample_count, double z_radius,
                        std::uint64_t seed, double x_radius = 10.0);

struct IsaacsPolicy {
    int sample_count = 1000;
    double z_radius = 5.0;
    double x_radius = 10.0;
    std::uint64_t seed = 0x15AAC5u;
    double gap_threshold = 1e-9; // absolute
};

/// Runs the audit and throws IsaacsError when the gap exceeds the threshold.
/// Game-solving operations call this before using the full H* generator.
void require_isaacs(const GameModel& model, const IsaacsPolicy& policy = {});

} // namespace mzsg

#endif // MZSG_HAMILTONIAN_HPP
