// SPDX-License-Identifier: Apache-2.0
#include "profile.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace gkd {

void EnergyGrid::validate() const
{
    if (cells < 8) throw InvalidArgument("energy grid needs at least 8 cells");
    if (!(e_max > 0.0) || !std::isfinite(e_max)) throw InvalidArgument("e_max must be positive");
}

std::vector<double> EnergyGrid::centers() const
{
    std::vector<double> c(static_cast<std::size_t>(cells));
    for (int k = 0; k < cells; ++k) c[static_cast<std::size_t>(k)] = center(k);
    return c;
}

EnergyProfile::EnergyProfile(EnergyGrid g) : grid(g), density(static_cast<std::size_t>(g.cells), 0.0)
{
    grid.validate();
}

EnergyProfile::EnergyProfile(EnergyGrid g, std::vector<double> values) : grid(g), density(std::move(values))
{
    grid.validate();
    if (density.size() != static_cast<std::size_t>(grid.cells))
        throw InvalidArgument("profile has " + std::to_string(density.size()) + " values for " +
                              std::to_string(grid.cells) + " cells");
}

double EnergyProfile::mass() const
{
    double s = 0.0;
    for (double d : density) s += d;
    return s * grid.width();
}

double EnergyProfile::median() const
{
    const double total = mass();
    if (!(total > 0.0)) throw InvalidArgument("median of a profile with zero mass");
    const double de = grid.width();
    double acc = 0.0;
    for (std::size_t k = 0; k < density.size(); ++k) {
        const double cell = density[k] * de;
        if (acc + cell >= 0.5 * total && cell > 0.0)
            return grid.face(static_cast<int>(k)) + de * (0.5 * total - acc) / cell;
        acc += cell;
    }
    return grid.e_max;
}

double EnergyProfile::mean() const
{
    const double total = mass();
    if (!(total > 0.0)) throw InvalidArgument("mean of a profile with zero mass");
    double s = 0.0;
    for (std::size_t k = 0; k < density.size(); ++k) s += density[k] * grid.center(static_cast<int>(k));
    return s * grid.width() / total;
}

void EnergyProfile::normalize()
{
    const double total = mass();
    if (!(total > 0.0)) throw InvalidArgument("cannot normalize a profile with zero mass");
    for (double& d : density) d /= total;
}

EnergyProfile delta_profile(const EnergyGrid& grid, double e0)
{
    grid.validate();
    if (!(e0 >= 0.0 && e0 <= grid.e_max)) throw InvalidArgument("delta location outside the grid");
    const double sd = 2.0 * grid.width();
    EnergyProfile p(grid);
    for (int k = 0; k < grid.cells; ++k) {
        const double z = (grid.center(k) - e0) / sd;
        p.density[static_cast<std::size_t>(k)] = std::exp(-0.5 * z * z);
    }
    p.normalize();
    return p;
}

}  // namespace gkd
