#include "darboux/integrability.hpp"

#include <algorithm>
#include <cmath>

#include "darboux/quasirandom.hpp"

namespace darboux {

namespace {

// Symbolic terms of one side of the identity for a fixed component h of
// u^I: F^I_{i,x_j} plus, for every J >= I\i and every component c of u^J,
// F^I_{i,u^J_c} * F^J_{j,c}.
std::vector<Expr> side_terms(const ValidatedSystem& sys, const MultiIndex& I,
                             int i, int j, int h) {
    const UnknownGroup& g = sys.group(I);
    const Expr& F = g.rhs(i, h);
    std::vector<Expr> terms;
    terms.push_back(F.diff("x" + std::to_string(j)));
    for (const auto& J : sys.dependency_indices(I, i)) {
        const UnknownGroup& gj = sys.group(J);
        for (std::size_t c = 0; c < gj.comps.size(); ++c) {
            Expr dF = F.diff(gj.comps[c].var);
            if (dF.is_number(0.0)) continue;
            // j != i and J >= I\i imply j in J, so u^J_{x_j} is prescribed.
            terms.push_back(dF * gj.rhs(j, (int)c));
        }
    }
    return terms;
}

struct TripleResiduals {
    // per component h of u^I: terms of both sides
    std::vector<std::vector<Expr>> lhs, rhs;
};

TripleResiduals build_triple(const ValidatedSystem& sys, const MultiIndex& I,
                             int i, int j) {
    if (i == j || !I.contains(i) || !I.contains(j))
        throw std::invalid_argument("axes " + std::to_string(i) + "," +
                                    std::to_string(j) + " must be distinct members of " +
                                    I.str());
    TripleResiduals t;
    const int ncomp = (int)sys.group(I).comps.size();
    for (int h = 0; h < ncomp; ++h) {
        t.lhs.push_back(side_terms(sys, I, i, j, h));
        t.rhs.push_back(side_terms(sys, I, j, i, h));
    }
    return t;
}

double eval_triple(const TripleResiduals& t, const Env& env, double* scale_out) {
    double res = 0.0, max_term = 0.0;
    for (std::size_t h = 0; h < t.lhs.size(); ++h) {
        double lhs = 0.0, rhs = 0.0;
        for (const auto& e : t.lhs[h]) {
            double v = e.eval(env);
            lhs += v;
            max_term = std::max(max_term, std::fabs(v));
        }
        for (const auto& e : t.rhs[h]) {
            double v = e.eval(env);
            rhs += v;
            max_term = std::max(max_term, std::fabs(v));
        }
        res = std::max(res, std::fabs(lhs - rhs));
    }
    if (scale_out) *scale_out = 1.0 + max_term;
    return res;
}

std::vector<std::string> structural_violations(const ValidatedSystem& sys) {
    std::vector<std::string> bad;
    for (const auto& g : sys.groups()) {
        for (std::size_t k = 0; k < g.index.axes.size(); ++k) {
            int i = g.index.axes[k];
            auto allowed = sys.dependency_vars(g.index, i);
            for (const auto& c : g.comps) {
                for (const auto& v : c.rhs[k].free_vars()) {
                    if (!sys.group_of_var(v)) continue;  // coordinate
                    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
                        bad.push_back("dependency violation: I=" + g.index.str() +
                                      ", i=" + std::to_string(i) +
                                      ": F depends on \"" + v +
                                      "\" which is not in U^I_i");
                }
            }
        }
    }
    return bad;
}

}  // namespace

double residual_at_point(const ValidatedSystem& sys, const MultiIndex& I,
                         int i, int j, const Env& point) {
    TripleResiduals t = build_triple(sys, I, i, j);
    return eval_triple(t, point, nullptr);
}

IntegrabilityReport check_integrability(const ValidatedSystem& sys,
                                        const IntegrabilityOptions& opts) {
    IntegrabilityReport rep;
    rep.tol = opts.tol;
    rep.samples = opts.samples;
    rep.structural_violations = structural_violations(sys);
    if (!rep.structural_violations.empty()) {
        rep.pass = false;
        return rep;  // no point sampling a structurally broken system
    }

    const int n = sys.n();
    std::vector<double> xr = opts.x_radius;
    if (xr.empty()) xr.assign(n, 0.25);
    if ((int)xr.size() != n)
        throw std::invalid_argument("x_radius needs one entry per axis");
    for (int i = 1; i <= n; ++i)
        if (sys.pinned(i)) xr[i - 1] = 0.0;

    // Center of the U box: data evaluated at the base point.
    Env base_env;
    for (int i = 1; i <= n; ++i)
        base_env["x" + std::to_string(i)] = sys.base()[i - 1];
    std::vector<std::pair<std::string, double>> u_center;
    for (const auto& g : sys.groups())
        for (const auto& c : g.comps) {
            double v = c.data ? c.data->eval(base_env) : 0.0;
            u_center.emplace_back(c.var, v);
        }

    struct Item {
        MultiIndex I;
        int i, j;
        TripleResiduals t;
    };
    std::vector<Item> items;
    for (const auto& g : sys.groups())
        for (std::size_t a = 0; a < g.index.axes.size(); ++a)
            for (std::size_t b = a + 1; b < g.index.axes.size(); ++b) {
                int i = g.index.axes[a], j = g.index.axes[b];
                items.push_back({g.index, i, j, build_triple(sys, g.index, i, j)});
            }

    const int dim = n + (int)u_center.size();
    HaltonSampler sampler(dim);
    rep.entries.resize(items.size());
    for (std::size_t k = 0; k < items.size(); ++k) {
        rep.entries[k].I = items[k].I;
        rep.entries[k].i = items[k].i;
        rep.entries[k].j = items[k].j;
    }

    for (int s = 0; s < opts.samples; ++s) {
        auto p = sampler.centered(s);
        Env env;
        for (int i = 1; i <= n; ++i)
            env["x" + std::to_string(i)] = sys.base()[i - 1] + xr[i - 1] * p[i - 1];
        for (std::size_t k = 0; k < u_center.size(); ++k)
            env[u_center[k].first] = u_center[k].second + opts.u_radius * p[n + k];
        for (std::size_t k = 0; k < items.size(); ++k) {
            double scale = 1.0;
            double res = eval_triple(items[k].t, env, &scale);
            IntegrabilityEntry& e = rep.entries[k];
            if (res > e.max_residual) {
                e.max_residual = res;
                e.scale_at_max = scale;
                e.at = env;
            }
            e.max_scaled = std::max(e.max_scaled, res / scale);
        }
    }

    rep.pass = std::all_of(rep.entries.begin(), rep.entries.end(),
                           [&](const IntegrabilityEntry& e) {
                               return e.max_scaled <= opts.tol;
                           });
    return rep;
}

}  // namespace darboux
