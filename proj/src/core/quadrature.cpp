// SPDX-License-Identifier: Apache-2.0
#include "quadrature.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "errors.hpp"

namespace gkd {

void QuadratureOptions::validate() const
{
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw InvalidArgument("quadrature tolerances must be positive");
    if (method == QuadratureMethod::CompositeGaussLegendre && (panels < 1 || order < 1))
        throw InvalidArgument("Gauss-Legendre needs panels >= 1 and order >= 1");
    if (s_max_override && !(*s_max_override > 0.0))
        throw InvalidArgument("s_max_override must be positive");
}

namespace {

struct Panel {
    double a, m, b;
    double fa, fm, fb;
    double whole;
};

double simpson(double a, double b, double fa, double fm, double fb)
{
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

class SimpsonRefiner {
public:
    SimpsonRefiner(const Integrand& f, std::size_t budget) : f_(f), budget_(budget) {}

    double eval(double x)
    {
        if (++evaluations_ > budget_)
            throw NonConvergedQuadrature("adaptive Simpson exceeded " + std::to_string(budget_) +
                                         " integrand evaluations");
        return f_(x);
    }

    // Returns the refined value of one panel; accumulates the error estimate.
    double refine(const Panel& p, double tol, int depth)
    {
        const double lm = 0.5 * (p.a + p.m);
        const double rm = 0.5 * (p.m + p.b);
        const double flm = eval(lm);
        const double frm = eval(rm);
        const double left = simpson(p.a, p.m, p.fa, flm, p.fm);
        const double right = simpson(p.m, p.b, p.fm, frm, p.fb);
        const double delta = left + right - p.whole;
        if (depth >= kMaxDepth || std::abs(delta) <= 15.0 * tol) {
            if (depth >= kMaxDepth && std::abs(delta) > 15.0 * tol)
                throw NonConvergedQuadrature("adaptive Simpson hit the recursion limit");
            error_ += std::abs(delta) / 15.0;
            return left + right + delta / 15.0;
        }
        return refine({p.a, lm, p.m, p.fa, flm, p.fm, left}, 0.5 * tol, depth + 1) +
               refine({p.m, rm, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth + 1);
    }

    std::size_t evaluations() const { return evaluations_; }
    double error() const { return error_; }
    void reset_error() { error_ = 0.0; }

private:
    static constexpr int kMaxDepth = 48;
    const Integrand& f_;
    std::size_t budget_;
    std::size_t evaluations_ = 0;
    double error_ = 0.0;
};

}  // namespace

QuadratureResult adaptive_simpson(const Integrand& f, double a, double b, double abs_tol,
                                  double rel_tol, std::size_t max_evaluations, int initial_panels)
{
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw InvalidArgument("quadrature tolerances must be positive");
    if (a == b) return {};
    if (initial_panels < 1) initial_panels = 1;

    SimpsonRefiner refiner(f, max_evaluations);
    std::vector<Panel> panels;
    panels.reserve(static_cast<std::size_t>(initial_panels));
    const double h = (b - a) / initial_panels;
    double coarse = 0.0;
    double prev_x = a;
    double prev_f = refiner.eval(a);
    for (int i = 0; i < initial_panels; ++i) {
        const double right = (i + 1 == initial_panels) ? b : a + (i + 1) * h;
        const double mid = 0.5 * (prev_x + right);
        const double fm = refiner.eval(mid);
        const double fr = refiner.eval(right);
        const double s = simpson(prev_x, right, prev_f, fm, fr);
        panels.push_back({prev_x, mid, right, prev_f, fm, fr, s});
        coarse += s;
        prev_x = right;
        prev_f = fr;
    }

    double tol = std::max(abs_tol, rel_tol * std::abs(coarse));
    for (;;) {
        refiner.reset_error();
        double total = 0.0;
        for (const auto& p : panels)
            total += refiner.refine(p, tol * (p.b - p.a) / (b - a), 0);
        const double target = std::max(abs_tol, rel_tol * std::abs(total));
        if (tol <= target * (1.0 + 1e-12))
            return {total, refiner.error(), refiner.evaluations()};
        // Cancellation made the result much smaller than the coarse estimate.
        tol = target;
    }
}

const GaussRule& gauss_rule(int order)
{
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    // Boost returns the non-negative zeros; mirror them into ascending order.
    std::vector<std::pair<double, double>> pts;
    for (double z : boost::math::legendre_p_zeros<double>(order)) {
        const double dp = boost::math::legendre_p_prime(order, z);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        pts.emplace_back(z, w);
        if (z != 0.0) pts.emplace_back(-z, w);
    }
    std::sort(pts.begin(), pts.end());
    GaussRule rule;
    for (const auto& [z, w] : pts) {
        rule.nodes.push_back(z);
        rule.weights.push_back(w);
    }
    return cache.emplace(order, std::move(rule)).first->second;
}

namespace {

double gl_sum(const Integrand& f, double a, double b, int panels, const GaussRule& rule,
              std::size_t& evals)
{
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double half = 0.5 * h;
        const double centre = lo + half;
        double s = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k)
            s += rule.weights[k] * f(centre + half * rule.nodes[k]);
        total += half * s;
        evals += rule.nodes.size();
    }
    return total;
}

}  // namespace

QuadratureResult gauss_legendre(const Integrand& f, double a, double b, int panels, int order)
{
    if (panels < 1 || order < 1) throw InvalidArgument("Gauss-Legendre needs panels, order >= 1");
    const auto& rule = gauss_rule(order);
    std::size_t evals = 0;
    const double fine = gl_sum(f, a, b, panels, rule, evals);
    const double coarse = gl_sum(f, a, b, std::max(1, panels / 2), rule, evals);
    return {fine, std::abs(fine - coarse), evals};
}

QuadratureResult integrate(const Integrand& f, double a, double b, const QuadratureOptions& opts)
{
    opts.validate();
    if (opts.method == QuadratureMethod::CompositeGaussLegendre)
        return gauss_legendre(f, a, b, opts.panels, opts.order);
    return adaptive_simpson(f, a, b, opts.abs_tol, opts.rel_tol, opts.max_evaluations);
}

}  // namespace gkd
