// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace gkd {

/// Uniform cell-centred grid on [0, e_max].
struct EnergyGrid {
    double e_max = 1.0;
    int cells = 64;

    void validate() const;  // cells >= 8, e_max > 0
    double width() const { return e_max / cells; }
    double center(int k) const { return (k + 0.5) * width(); }
    double face(int k) const { return k * width(); }  // face k sits between cells k-1 and k
    std::vector<double> centers() const;

    bool operator==(const EnergyGrid&) const = default;
};

/// Probability density in e, piecewise constant on the cells of `grid`.
struct EnergyProfile {
    EnergyGrid grid;
    std::vector<double> density;

    EnergyProfile() = default;
    explicit EnergyProfile(EnergyGrid g);
    EnergyProfile(EnergyGrid g, std::vector<double> values);

    double mass() const;
    /// Energy below which half the mass lies (linear within the cell).
    double median() const;
    double mean() const;
    /// Rescales to unit mass; throws InvalidArgument if the mass is zero.
    void normalize();
};

/// Narrow Gaussian of standard deviation 2 de at e0 (cell-centre values), unit mass.
EnergyProfile delta_profile(const EnergyGrid& grid, double e0);

}  // namespace gkd
