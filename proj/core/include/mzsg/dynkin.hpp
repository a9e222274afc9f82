#ifndef MZSG_DYNKIN_HPP
#define MZSG_DYNKIN_HPP

#include <vector>

#include "mzsg/model.hpp"

namespace mzsg {

/// Recombining binomial tree (equal up/down probabilities). Level j holds
/// j+1 nodes; node (j,k) moves to (j+1,k) or (j+1,k+1). Rows driver/lower/
/// upper cover levels 0..levels-1; terminal has levels+1 entries.
struct BinomialTreeSpec {
    int levels = 0;
    double dt = 0.0;
    std::vector<std::vector<double>> driver;
    std::vector<std::vector<double>> lower;
    std::vector<std::vector<double>> upper;
    std::vector<double> terminal;
};

/// Exact backward induction on the tree:
///   V_N = terminal;  V_j(k) = clamp(E[V_{j+1} | (j,k)] + driver*dt, [lower, upper]).
/// Independent brute-force oracle for the reflected value.
double dynkin_oracle(const BinomialTreeSpec& tree);

/// Maps a 1-d model with (numerically) constant diffusion onto a tree with
/// states x0 + (2k - j) sigma sqrt(dt). Controls are taken at grid index 0,
/// so this is meant for control-inert models.
BinomialTreeSpec tree_from_model(const GameModel& model, int levels);

} // namespace mzsg

#endif // MZSG_DYNKIN_HPP
