#ifndef MZSG_GRIDS_HPP
#define MZSG_GRIDS_HPP

#include <cstddef>
#include <vector>

#include "mzsg/errors.hpp"

namespace mzsg {

/// Uniform time grid t_i = i*T/N, i = 0..N.
struct TimeGrid {
    int step_count = 0;
    double horizon = 0.0;

    TimeGrid() = default;
    TimeGrid(int n, double T) : step_count(n), horizon(T) {
        if (n < 1 || !(T > 0.0)) throw ModelError("TimeGrid: need step_count >= 1 and T > 0");
    }

    double dt() const { return horizon / step_count; }
    double time(int i) const { return horizon * i / step_count; }
};

/// Uniform spatial box grid, per-dimension bounds and node counts.
struct SpaceGrid {
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<int> nodes;

    SpaceGrid() = default;
    SpaceGrid(std::vector<double> lo, std::vector<double> hi, std::vector<int> n)
        : lower(std::move(lo)), upper(std::move(hi)), nodes(std::move(n)) {
        if (lower.size() != upper.size() || lower.size() != nodes.size() || lower.empty())
            throw ModelError("SpaceGrid: inconsistent dimensions");
        for (std::size_t k = 0; k < lower.size(); ++k) {
            if (!(lower[k] < upper[k])) throw ModelError("SpaceGrid: lower must be < upper");
            if (nodes[k] < 3) throw ModelError("SpaceGrid: need at least 3 nodes per dimension");
        }
    }

    int dim() const { return static_cast<int>(lower.size()); }
    double spacing(int k) const { return (upper[k] - lower[k]) / (nodes[k] - 1); }
    double coord(int k, int j) const { return lower[k] + j * spacing(k); }

    std::size_t node_count() const {
        std::size_t n = 1;
        for (int c : nodes) n *= static_cast<std::size_t>(c);
        return n;
    }
};

} // namespace mzsg

#endif // MZSG_GRIDS_HPP
