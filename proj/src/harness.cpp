#include "darboux/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "darboux/quasirandom.hpp"

namespace darboux {

namespace {

std::string xvar(int i) { return "x" + std::to_string(i); }

std::vector<double> box_radii(const ValidatedSystem& sys,
                              const std::vector<double>& requested) {
    std::vector<double> xr = requested;
    if (xr.empty()) xr.assign(sys.n(), 0.25);
    if ((int)xr.size() != sys.n())
        throw std::invalid_argument("x_radius needs one entry per axis");
    for (int i = 1; i <= sys.n(); ++i)
        if (sys.pinned(i)) xr[i - 1] = 0.0;
    return xr;
}

}  // namespace

CandidateReport candidate_residual(const ValidatedSystem& sys,
                                   const std::map<std::string, Expr>& candidate,
                                   const CandidateOptions& opts) {
    const int n = sys.n();
    std::map<std::string, Expr> subst;
    for (const auto& v : sys.component_vars()) {
        auto it = candidate.find(v);
        if (it == candidate.end())
            throw std::invalid_argument("candidate missing component \"" + v + "\"");
        for (const auto& fv : it->second.free_vars())
            if (sys.group_of_var(fv))
                throw std::invalid_argument("candidate for \"" + v +
                                            "\" references unknown \"" + fv + "\"");
        subst.emplace(v, it->second);
    }

    CandidateReport rep;
    struct Probe {
        Expr residual;
        std::vector<double> radii;  // sampling box per axis
        double* sup;
        Env* at;
    };
    std::vector<Probe> probes;
    const std::vector<double> xr = box_radii(sys, opts.x_radius);

    for (const auto& g : sys.groups()) {
        for (std::size_t kk = 0; kk < g.index.axes.size(); ++kk) {
            int i = g.index.axes[kk];
            for (const auto& c : g.comps) {
                CandidatePdeEntry e;
                e.var = c.var;
                e.I = g.index;
                e.i = i;
                rep.pde.push_back(e);
            }
        }
        for (const auto& c : g.comps)
            if (c.data) {
                CandidateDataEntry e;
                e.var = c.var;
                rep.data.push_back(e);
            }
    }

    std::size_t pde_k = 0, data_k = 0;
    for (const auto& g : sys.groups()) {
        for (std::size_t kk = 0; kk < g.index.axes.size(); ++kk) {
            int i = g.index.axes[kk];
            for (const auto& c : g.comps) {
                Expr r = subst.at(c.var).diff(xvar(i)) - c.rhs[kk].substitute(subst);
                probes.push_back({std::move(r), xr, &rep.pde[pde_k].sup,
                                  &rep.pde[pde_k].at});
                ++pde_k;
            }
        }
        // data clause lives on {x_I = base_I}
        std::vector<double> dr = xr;
        std::map<std::string, Expr> pin;
        for (int i : g.index.axes) {
            dr[i - 1] = 0.0;
            pin.emplace(xvar(i), Expr::number(sys.base()[i - 1]));
        }
        for (const auto& c : g.comps)
            if (c.data) {
                Expr r = subst.at(c.var).substitute(pin) - *c.data;
                probes.push_back({std::move(r), dr, &rep.data[data_k].sup,
                                  &rep.data[data_k].at});
                ++data_k;
            }
    }

    HaltonSampler sampler(n);
    for (int s = 0; s < opts.samples; ++s) {
        auto p = sampler.centered(s);
        for (auto& pr : probes) {
            Env env;
            for (int i = 1; i <= n; ++i)
                env[xvar(i)] = sys.base()[i - 1] + pr.radii[i - 1] * p[i - 1];
            double v = std::fabs(pr.residual.eval(env));
            if (v > *pr.sup) {
                *pr.sup = v;
                *pr.at = env;
            }
        }
    }
    for (const auto& e : rep.pde) rep.max_residual = std::max(rep.max_residual, e.sup);
    for (const auto& e : rep.data) rep.max_residual = std::max(rep.max_residual, e.sup);
    return rep;
}

ErrorReport error_report(const GridSolution& sol,
                         const std::map<std::string, Expr>& reference) {
    const Grid& grid = sol.grid;
    const int n = grid.dim();
    ErrorReport rep;
    std::vector<int> idx;
    for (const auto& var : sol.vars) {
        auto it = reference.find(var);
        if (it == reference.end())
            throw std::invalid_argument("reference missing component \"" + var + "\"");
        CompiledExpr ref = it->second.compile([&] {
            std::vector<std::string> layout;
            for (int i = 1; i <= n; ++i) layout.push_back(xvar(i));
            return layout;
        }());
        std::vector<double> slots(n), stack(ref.stack_size());
        const auto& f = sol.field(var);
        ErrorEntry e;
        e.var = var;
        double sq = 0.0;
        for (std::size_t node = 0; node < grid.size(); ++node) {
            grid.unflatten(node, idx);
            for (int i = 1; i <= n; ++i) slots[i - 1] = grid.coord(i, idx[i - 1]);
            double d = std::fabs(f[node] - ref.eval(slots, stack));
            e.sup = std::max(e.sup, d);
            sq += d * d;
        }
        e.rms = std::sqrt(sq / (double)grid.size());
        rep.max_sup = std::max(rep.max_sup, e.sup);
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

ConvergenceReport convergence_study(const ValidatedSystem& sys, const Grid& grid,
                                    int levels,
                                    const std::map<std::string, Expr>& reference,
                                    const DarbouxOptions& opts) {
    if (levels < 2) throw std::invalid_argument("need at least 2 levels");
    ConvergenceReport rep;
    std::vector<Grid::Axis> axes;
    for (int i = 1; i <= grid.dim(); ++i) axes.push_back(grid.axis(i));

    for (int lvl = 0; lvl < levels; ++lvl) {
        Grid g(axes);
        DarbouxResult r = solve_darboux(sys, g, opts);
        ErrorReport err = error_report(r.solution, reference);
        ConvergenceLevel entry;
        for (int i = 1; i <= g.dim(); ++i) entry.counts.push_back(g.count(i));
        entry.max_spacing = g.max_spacing();
        entry.sup_error = err.max_sup;
        rep.levels.push_back(std::move(entry));
        for (auto& a : axes)
            if (a.count > 1) a.count = 2 * (a.count - 1) + 1;
    }

    // Errors at rounding level carry no rate information.
    double coarsest = rep.levels.front().sup_error;
    rep.exact = coarsest < 1e-12;
    if (!rep.exact)
        for (std::size_t k = 0; k + 1 < rep.levels.size(); ++k) {
            double e0 = rep.levels[k].sup_error, e1 = rep.levels[k + 1].sup_error;
            rep.orders.push_back(e1 > 0.0 ? std::log2(e0 / e1)
                                          : std::numeric_limits<double>::infinity());
        }
    return rep;
}

}  // namespace darboux
