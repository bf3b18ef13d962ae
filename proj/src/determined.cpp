#include "darboux/determined.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "darboux/quasirandom.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace darboux {

bool openmp_enabled() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

int GridSolution::var_slot(const std::string& var) const {
    for (std::size_t k = 0; k < vars.size(); ++k)
        if (vars[k] == var) return (int)k;
    throw std::out_of_range("no field for variable \"" + var + "\"");
}

const std::vector<double>& GridSolution::field(const std::string& var) const {
    return fields[var_slot(var)];
}

// ---------------------------------------------------------------------------
// Constants estimation

Constants estimate_constants(const ValidatedSystem& sys, double a, double b,
                             int samples) {
    if (a <= 0.0 || b <= 0.0)
        throw std::invalid_argument("estimate_constants: radii must be positive");

    const int n = sys.n();
    const auto& vars = sys.component_vars();
    const int N = (int)vars.size();

    // Data value at the base point.
    Env base_env;
    for (int i = 1; i <= n; ++i)
        base_env["x" + std::to_string(i)] = sys.base()[i - 1];
    std::map<std::string, double> phi_bar;
    for (const auto& g : sys.groups())
        for (const auto& c : g.comps) {
            if (!c.data)
                throw std::invalid_argument(
                    "estimate_constants: component \"" + c.var +
                    "\" has no data expression");
            phi_bar[c.var] = c.data->eval(base_env);
        }

    // Symbolic u-partials, for the Lipschitz estimate in the 1-norm.
    struct Eq {
        const Expr* rhs;
        std::vector<Expr> du;
    };
    std::vector<Eq> eqs;
    for (const auto& g : sys.groups())
        for (const auto& c : g.comps)
            for (const auto& rhs : c.rhs) {
                Eq e{&rhs, {}};
                for (const auto& v : vars) e.du.push_back(rhs.diff(v));
                eqs.push_back(std::move(e));
            }

    HaltonSampler xs(n), us(N);
    double M = 0.0, L = 0.0;
    for (int s = 0; s < samples; ++s) {
        auto xp = xs.unit_l1_ball(s);
        auto up = us.unit_l1_ball(s);
        Env env;
        for (int i = 1; i <= n; ++i) {
            double r = sys.pinned(i) ? 0.0 : a;
            env["x" + std::to_string(i)] = sys.base()[i - 1] + r * xp[i - 1];
        }
        for (int k = 0; k < N; ++k) env[vars[k]] = phi_bar[vars[k]] + b * up[k];
        try {
            for (const auto& e : eqs) {
                M = std::max(M, std::fabs(e.rhs->eval(env)));
                for (const auto& d : e.du) L = std::max(L, std::fabs(d.eval(env)));
            }
        } catch (const EvalError& err) {
            std::ostringstream os;
            os << "estimate_constants: " << err.what() << " at x=(";
            for (int i = 1; i <= n; ++i)
                os << (i > 1 ? "," : "") << env["x" + std::to_string(i)];
            os << ")";
            throw EvalError(os.str());
        }
    }

    Constants c;
    c.a = a;
    c.b = b;
    c.M = M;
    c.L = L;
    c.N = N;
    c.sigma = (M > 0.0) ? std::min(a, b / (2.0 * M * N)) : a;
    return c;
}

// ---------------------------------------------------------------------------
// Picard solver

namespace {

struct CompiledComponent {
    int axis;            // integration axis (1-based); may be collapsed
    int slot;            // index into fields / var layout
    CompiledExpr rhs;
    std::vector<double> phi;  // data extension, full-grid array
};

struct Workspace {
    std::vector<double> slots;  // [x1..xn, vars...]
    std::vector<double> stack;
    std::vector<double> g;      // integrand values along a line
};

class PicardSolver {
public:
    PicardSolver(const ValidatedSystem& sys, const Grid& grid,
                 const PicardOptions& opts)
        : sys_(sys), grid_(grid), opts_(opts) {
        const int n = sys.n();
        if (grid.dim() != n)
            throw std::invalid_argument("grid dimension does not match system");
        for (int i = 1; i <= n; ++i) {
            if (std::fabs(grid.axis(i).center - sys.base()[i - 1]) >
                1e-12 * (1.0 + std::fabs(sys.base()[i - 1])))
                throw std::invalid_argument(
                    "grid must be centered at the system base point (axis " +
                    std::to_string(i) + ")");
            if (sys.pinned(i) && !grid.collapsed(i))
                throw std::invalid_argument("axis " + std::to_string(i) +
                                            " is pinned but not collapsed in grid");
        }

        layout_.reserve(n + sys.component_vars().size());
        for (int i = 1; i <= n; ++i) layout_.push_back("x" + std::to_string(i));
        for (const auto& v : sys.component_vars()) layout_.push_back(v);
        vars_.assign(sys.component_vars().begin(), sys.component_vars().end());

        for (const auto& g : sys.groups()) {
            if (g.index.size() != 1)
                throw std::invalid_argument(
                    "solve_determined requires a determined system; unknown \"" +
                    g.label + "\" has index " + g.index.str());
            int axis = g.index.axes[0];
            for (const auto& c : g.comps) {
                CompiledComponent cc;
                cc.axis = axis;
                cc.slot = slot_of(c.var);
                cc.rhs = c.rhs[0].compile(layout_);
                cc.phi = build_phi(c, axis);
                comps_.push_back(std::move(cc));
            }
        }
        max_stack_ = 1;
        for (const auto& c : comps_) max_stack_ = std::max(max_stack_, c.rhs.stack_size());
    }

    GridSolution run() {
        const std::size_t sz = grid_.size();
        std::vector<std::vector<double>> prev(comps_.size()),
            next(comps_.size(), std::vector<double>(sz));
        for (std::size_t c = 0; c < comps_.size(); ++c)
            prev[c] = (opts_.init == InitMode::DataExtension)
                          ? comps_[c].phi
                          : std::vector<double>(sz, 0.0);

        double last_update = std::numeric_limits<double>::infinity();
        int rising = 0;
        for (int iter = 1; iter <= opts_.max_iter; ++iter) {
            sweep(prev, next);
            double update = 0.0;
            for (std::size_t c = 0; c < comps_.size(); ++c)
                for (std::size_t k = 0; k < sz; ++k)
                    update = std::max(update, std::fabs(next[c][k] - prev[c][k]));
            prev.swap(next);
            if (update <= opts_.tol) return finish(std::move(prev), iter, update);
            rising = (update > last_update) ? rising + 1 : 0;
            if (rising >= 5)
                throw SolveFailure(
                    "Picard iteration diverging: sup update grew for 5 "
                    "consecutive sweeps (last update " + std::to_string(update) +
                    "); the box likely exceeds the contraction radius",
                    iter, update, true);
            last_update = update;
        }
        throw SolveFailure(
            "Picard iteration did not converge within " +
            std::to_string(opts_.max_iter) + " iterations (last update " +
            std::to_string(last_update) + "); suspected L*sigma >= 1",
            opts_.max_iter, last_update, false);
    }

private:
    int slot_of(const std::string& var) const {
        for (std::size_t k = 0; k < vars_.size(); ++k)
            if (vars_[k] == var) return (int)k;
        throw std::logic_error("unknown variable " + var);
    }

    // Data extension: phi(x) = data(x'^i), constant along the axis.
    std::vector<double> build_phi(const ScalarComponent& c, int axis) const {
        const std::size_t sz = grid_.size();
        std::vector<double> phi(sz);
        const std::size_t stride = grid_.stride(axis);
        const int m = grid_.count(axis);
        const std::size_t nlines = sz / m;

        const std::vector<double>* over = nullptr;
        auto it = opts_.data_override.find(c.var);
        if (it != opts_.data_override.end()) {
            over = &it->second;
            if (over->size() != nlines)
                throw std::invalid_argument("data override for \"" + c.var +
                                            "\" has wrong size");
        } else if (!c.data) {
            throw std::invalid_argument("component \"" + c.var +
                                        "\" has neither data expression nor override");
        }

        std::vector<int> idx;
        for (std::size_t s = 0; s < nlines; ++s) {
            std::size_t low = s % stride, high = s / stride;
            std::size_t base = low + high * stride * m;
            double val;
            if (over) {
                val = (*over)[s];
            } else {
                grid_.unflatten(base, idx);
                Env env;
                for (int i = 1; i <= grid_.dim(); ++i)
                    env["x" + std::to_string(i)] =
                        (i == axis) ? grid_.axis(i).center
                                    : grid_.coord(i, idx[i - 1]);
                val = c.data->eval(env);
            }
            for (int k = 0; k < m; ++k) phi[base + k * stride] = val;
        }
        return phi;
    }

    // One cumulative-trapezoid line update for component `c`, line `s`.
    void do_line(std::size_t c, std::size_t s,
                 const std::vector<std::vector<double>>& prev,
                 std::vector<std::vector<double>>& next, Workspace& ws) const {
        const CompiledComponent& cc = comps_[c];
        const int axis = cc.axis;
        const std::size_t stride = grid_.stride(axis);
        const int m = grid_.count(axis);
        const int mid = grid_.mid(axis);
        const double delta = grid_.spacing(axis);
        const int n = grid_.dim();

        std::size_t low = s % stride, high = s / stride;
        std::size_t base = low + high * stride * m;

        // Off-axis coordinates are fixed along the line.
        grid_.unflatten(base, idx_scratch());
        for (int i = 1; i <= n; ++i)
            ws.slots[i - 1] = grid_.coord(i, idx_scratch()[i - 1]);

        for (int k = 0; k < m; ++k) {
            std::size_t node = base + (std::size_t)k * stride;
            ws.slots[axis - 1] = grid_.coord(axis, k);
            for (std::size_t v = 0; v < comps_.size(); ++v)
                ws.slots[n + comps_[v].slot] = prev[v][node];
            ws.g[k] = cc.rhs.eval(ws.slots, ws.stack);
        }

        std::vector<double>& out = next[c];
        out[base + (std::size_t)mid * stride] = cc.phi[base];
        for (int k = mid + 1; k < m; ++k)
            out[base + (std::size_t)k * stride] =
                out[base + (std::size_t)(k - 1) * stride] +
                0.5 * delta * (ws.g[k - 1] + ws.g[k]);
        for (int k = mid - 1; k >= 0; --k)
            out[base + (std::size_t)k * stride] =
                out[base + (std::size_t)(k + 1) * stride] -
                0.5 * delta * (ws.g[k] + ws.g[k + 1]);
    }

    static std::vector<int>& idx_scratch() {
        thread_local std::vector<int> idx;
        return idx;
    }

    Workspace make_workspace() const {
        Workspace ws;
        ws.slots.assign(layout_.size(), 0.0);
        ws.stack.assign(max_stack_, 0.0);
        int maxm = 1;
        for (int i = 1; i <= grid_.dim(); ++i) maxm = std::max(maxm, grid_.count(i));
        ws.g.assign(maxm, 0.0);
        return ws;
    }

    // Serial reference sweep; kept as the oracle for the parallel kernel.
    void sweep_serial(const std::vector<std::vector<double>>& prev,
                      std::vector<std::vector<double>>& next) const {
        Workspace ws = make_workspace();
        for (std::size_t c = 0; c < comps_.size(); ++c) {
            const std::size_t nlines = grid_.size() / grid_.count(comps_[c].axis);
            for (std::size_t s = 0; s < nlines; ++s) do_line(c, s, prev, next, ws);
        }
    }

#ifdef _OPENMP
    // Lines are independent within a sweep: every node update reads only the
    // previous iterate, so the parallel kernel is bit-identical to the
    // serial one.
    void sweep_omp(const std::vector<std::vector<double>>& prev,
                   std::vector<std::vector<double>>& next) const {
        for (std::size_t c = 0; c < comps_.size(); ++c) {
            const std::size_t nlines = grid_.size() / grid_.count(comps_[c].axis);
            #pragma omp parallel
            {
                Workspace ws = make_workspace();
                #pragma omp for schedule(static)
                for (long s = 0; s < (long)nlines; ++s)
                    do_line(c, (std::size_t)s, prev, next, ws);
            }
        }
    }
#endif

    void sweep(const std::vector<std::vector<double>>& prev,
               std::vector<std::vector<double>>& next) const {
#ifdef _OPENMP
        if (opts_.parallel) {
            sweep_omp(prev, next);
            return;
        }
#endif
        sweep_serial(prev, next);
    }

    GridSolution finish(std::vector<std::vector<double>> fields, int iters,
                        double update) const {
        GridSolution sol;
        sol.grid = grid_;
        sol.vars = vars_;
        sol.fields.resize(vars_.size());
        for (std::size_t c = 0; c < comps_.size(); ++c)
            sol.fields[comps_[c].slot] = std::move(fields[c]);
        sol.iterations = iters;
        sol.final_update = update;
        return sol;
    }

    const ValidatedSystem& sys_;
    Grid grid_;
    PicardOptions opts_;
    std::vector<std::string> layout_;
    std::vector<std::string> vars_;
    std::vector<CompiledComponent> comps_;
    int max_stack_ = 1;
};

}  // namespace

GridSolution solve_determined(const ValidatedSystem& sys, const Grid& grid,
                              const PicardOptions& opts) {
    return PicardSolver(sys, grid, opts).run();
}

}  // namespace darboux
