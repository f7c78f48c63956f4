// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace gkd {

enum class QuadratureMethod { AdaptiveSimpson, CompositeGaussLegendre };

struct QuadratureOptions {
    QuadratureMethod method = QuadratureMethod::AdaptiveSimpson;
    int panels = 64;  // CompositeGaussLegendre only
    int order = 20;   // CompositeGaussLegendre only
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    std::optional<double> s_max_override;
    std::size_t max_evaluations = 1'000'000;

    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
};

using Integrand = std::function<double(double)>;

/// Adaptive Simpson with Richardson correction, started from `initial_panels`
/// uniform panels. Throws NonConvergedQuadrature when the evaluation budget
/// is exhausted before the estimated error drops below
/// max(abs_tol, rel_tol * |result|).
QuadratureResult adaptive_simpson(const Integrand& f, double a, double b, double abs_tol,
                                  double rel_tol, std::size_t max_evaluations,
                                  int initial_panels = 16);

/// Composite Gauss-Legendre on `panels` equal panels. The error estimate is
/// the difference to the same rule on half as many panels.
QuadratureResult gauss_legendre(const Integrand& f, double a, double b, int panels, int order);

/// Dispatches on opts.method.
QuadratureResult integrate(const Integrand& f, double a, double b, const QuadratureOptions& opts);

/// Nodes and weights of the order-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_rule(int order);

}  // namespace gkd
