#include "darboux/darboux_solver.hpp"

#include <algorithm>
#include <cmath>

namespace darboux {

std::vector<double> grid_derivative(const Grid& grid, const std::vector<double>& f,
                                    int axis) {
    const int m = grid.count(axis);
    if (m < 3)
        throw std::invalid_argument("grid_derivative needs >= 3 nodes along axis " +
                                    std::to_string(axis));
    const std::size_t stride = grid.stride(axis);
    const double delta = grid.spacing(axis);
    const std::size_t nlines = grid.size() / m;
    std::vector<double> out(grid.size());
    for (std::size_t s = 0; s < nlines; ++s) {
        std::size_t low = s % stride, high = s / stride;
        std::size_t base = low + high * stride * m;
        auto at = [&](int k) -> double { return f[base + (std::size_t)k * stride]; };
        auto put = [&](int k, double v) { out[base + (std::size_t)k * stride] = v; };
        put(0, (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * delta));
        for (int k = 1; k < m - 1; ++k)
            put(k, (at(k + 1) - at(k - 1)) / (2.0 * delta));
        put(m - 1, (3.0 * at(m - 1) - 4.0 * at(m - 2) + at(m - 3)) / (2.0 * delta));
    }
    return out;
}

DeltaReport delta_residuals(const ValidatedSystem& sys, const GridSolution& sol,
                            double threshold) {
    const Grid& grid = sol.grid;
    const int n = sys.n();
    std::vector<std::string> layout;
    for (int i = 1; i <= n; ++i) layout.push_back("x" + std::to_string(i));
    for (const auto& v : sol.vars) layout.push_back(v);

    DeltaReport rep;
    std::vector<double> slots(layout.size());
    std::vector<int> idx;
    for (const auto& g : sys.groups()) {
        const int imin = g.index.min();
        for (std::size_t kk = 0; kk < g.index.axes.size(); ++kk) {
            int i = g.index.axes[kk];
            if (i == imin) continue;  // zero by construction, not reported
            DeltaEntry entry;
            entry.I = g.index;
            entry.i = i;
            entry.threshold = threshold;
            for (const auto& c : g.comps) {
                CompiledExpr rhs = c.rhs[kk].compile(layout);
                std::vector<double> stack(rhs.stack_size());
                std::vector<double> dfield =
                    grid_derivative(grid, sol.field(c.var), i);
                for (std::size_t node = 0; node < grid.size(); ++node) {
                    grid.unflatten(node, idx);
                    for (int a = 1; a <= n; ++a)
                        slots[a - 1] = grid.coord(a, idx[a - 1]);
                    for (std::size_t v = 0; v < sol.vars.size(); ++v)
                        slots[n + v] = sol.fields[v][node];
                    double r = std::fabs(dfield[node] - rhs.eval(slots, stack));
                    entry.sup = std::max(entry.sup, r);
                }
            }
            rep.entries.push_back(std::move(entry));
        }
    }
    rep.pass = std::all_of(rep.entries.begin(), rep.entries.end(),
                           [](const DeltaEntry& e) { return e.sup <= e.threshold; });
    return rep;
}

std::map<std::string, std::vector<double>> assemble_data_for_system_n(
    const ValidatedSystem& sys, const std::map<int, GridSolution>& subsolutions) {
    std::map<std::string, std::vector<double>> out;
    for (const auto& g : sys.groups()) {
        if (g.index.size() == 1) continue;  // keeps its data expression
        int i = g.index.min();
        auto it = subsolutions.find(i);
        if (it == subsolutions.end())
            throw std::invalid_argument("missing subsystem solution for axis " +
                                        std::to_string(i) + " (needed by " +
                                        g.index.str() + ")");
        for (const auto& c : g.comps) out[c.var] = it->second.field(c.var);
    }
    return out;
}

ConsistencyReport intersection_consistency(
    const ValidatedSystem& sys, const Grid& grid,
    const std::map<int, GridSolution>& subsolutions, double threshold) {
    ConsistencyReport rep;
    std::vector<int> idx;
    for (const auto& g : sys.groups()) {
        if (g.index.size() < 2) continue;
        for (std::size_t a = 0; a < g.index.axes.size(); ++a) {
            for (std::size_t b = a + 1; b < g.index.axes.size(); ++b) {
                int k = g.index.axes[a], ell = g.index.axes[b];
                auto itk = subsolutions.find(k), itl = subsolutions.find(ell);
                if (itk == subsolutions.end() || itl == subsolutions.end()) continue;
                const GridSolution& sk = itk->second;
                const GridSolution& sl = itl->second;
                ConsistencyEntry entry;
                entry.I = g.index;
                entry.k = k;
                entry.ell = ell;
                entry.threshold = threshold;
                Grid shared = grid.slice(k).slice(ell);
                for (const auto& c : g.comps) {
                    const auto& fk = sk.field(c.var);
                    const auto& fl = sl.field(c.var);
                    for (std::size_t node = 0; node < shared.size(); ++node) {
                        shared.unflatten(node, idx);
                        std::vector<int> ik = idx, il = idx;
                        ik[ell - 1] = sk.grid.mid(ell);  // axis ell lives in system k
                        il[k - 1] = sl.grid.mid(k);
                        double d = std::fabs(fk[sk.grid.flat(ik)] - fl[sl.grid.flat(il)]);
                        entry.sup = std::max(entry.sup, d);
                    }
                }
                rep.entries.push_back(std::move(entry));
            }
        }
    }
    rep.pass = std::all_of(rep.entries.begin(), rep.entries.end(),
                           [](const ConsistencyEntry& e) { return e.sup <= e.threshold; });
    return rep;
}

namespace {

void merge_with_prefix(DeltaReport& into, const DeltaReport& from,
                       const std::string& prefix) {
    for (DeltaEntry e : from.entries) {
        e.path = prefix + e.path;
        into.entries.push_back(std::move(e));
    }
    into.pass = into.pass && from.pass;
}

void merge_with_prefix(ConsistencyReport& into, const ConsistencyReport& from,
                       const std::string& prefix) {
    for (ConsistencyEntry e : from.entries) {
        e.path = prefix + e.path;
        into.entries.push_back(std::move(e));
    }
    into.pass = into.pass && from.pass;
}

}  // namespace

DarbouxResult solve_darboux(const ValidatedSystem& sys, const Grid& grid,
                            const DarbouxOptions& opts) {
    PicardOptions popts;
    popts.tol = opts.tol;
    popts.max_iter = opts.max_iter;
    popts.init = opts.init;
    popts.parallel = opts.parallel;

    DarbouxResult result;

    if (sys.is_determined()) {
        result.solution = solve_determined(sys, grid, popts);
        result.delta.pass = true;
        result.consistency.pass = true;
        return result;
    }

    const double threshold =
        opts.delta_tol_factor * (grid.max_spacing() * grid.max_spacing() + opts.tol);

    // Hyperplane restrictions, solved recursively on slices of this grid.
    std::map<int, GridSolution> subsols;
    for (int ell = 1; ell <= sys.n(); ++ell) {
        if (sys.pinned(ell) || sys.restrictable_indices(ell).empty()) continue;
        ValidatedSystem rsys = sys.restrict_to_hyperplane(ell);
        std::string prefix = "r" + std::to_string(ell) + "/";
        try {
            DarbouxResult sub = solve_darboux(rsys, grid.slice(ell), opts);
            merge_with_prefix(result.delta, sub.delta, prefix);
            merge_with_prefix(result.consistency, sub.consistency, prefix);
            subsols.emplace(ell, std::move(sub.solution));
        } catch (const SolveFailure& f) {
            throw SolveFailure("subsystem " + prefix.substr(0, prefix.size() - 1) +
                                   ": " + f.what(),
                               f.iterations, f.last_update, f.diverging);
        }
    }

    ValidatedSystem sysn = sys.build_system_n();
    popts.data_override = assemble_data_for_system_n(sys, subsols);
    result.solution = solve_determined(sysn, grid, popts);

    merge_with_prefix(result.delta, delta_residuals(sys, result.solution, threshold), "");
    merge_with_prefix(result.consistency,
                      intersection_consistency(sys, grid, subsols, threshold), "");
    return result;
}

}  // namespace darboux
