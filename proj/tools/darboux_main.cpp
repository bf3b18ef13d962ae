#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "darboux/darboux_solver.hpp"
#include "darboux/harness.hpp"
#include "darboux/integrability.hpp"
#include "darboux/specfile.hpp"

using json = nlohmann::json;
using namespace darboux;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerdictFail = 1;
constexpr int kExitInputError = 2;
constexpr int kExitNoConvergence = 3;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void emit(const std::string& text, const std::string& report_path) {
    if (report_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(report_path);
        if (!out) throw std::runtime_error("cannot write \"" + report_path + "\"");
        out << text;
    }
}

Grid make_grid(const JobSpec& job) {
    if (!job.solve)
        throw std::runtime_error("spec file has no [solve] section");
    std::vector<Grid::Axis> axes;
    for (int i = 0; i < job.system.n; ++i)
        axes.push_back({job.system.base[i], job.solve->halfwidth[i],
                        job.solve->points[i]});
    return Grid(axes);
}

void write_csv(const std::string& path, const ValidatedSystem& sys,
               const GridSolution& sol) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write \"" + path + "\"");
    const Grid& grid = sol.grid;
    const int n = grid.dim();
    for (int i = 1; i <= n; ++i) out << "x" << i << ",";
    const auto& vars = sys.component_vars();
    for (std::size_t k = 0; k < vars.size(); ++k)
        out << vars[k] << (k + 1 < vars.size() ? "," : "\n");
    std::vector<const std::vector<double>*> cols;
    for (const auto& v : vars) cols.push_back(&sol.field(v));
    char buf[32];
    std::vector<int> idx;
    for (std::size_t node = 0; node < grid.size(); ++node) {
        grid.unflatten(node, idx);
        for (int i = 1; i <= n; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", grid.coord(i, idx[i - 1]));
            out << buf << ",";
        }
        for (std::size_t k = 0; k < cols.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", (*cols[k])[node]);
            out << buf << (k + 1 < cols.size() ? "," : "\n");
        }
    }
}

std::string render_integrability(const IntegrabilityReport& rep) {
    std::ostringstream os;
    os << "integrability check: " << rep.samples << " samples, tol " << fmt(rep.tol)
       << "\n";
    for (const auto& v : rep.structural_violations) os << "  " << v << "\n";
    if (!rep.entries.empty()) {
        os << "  I          i  j  max scaled    max raw       verdict\n";
        for (const auto& e : rep.entries) {
            std::ostringstream row;
            row << "  " << e.I.str();
            std::string s = row.str();
            s.resize(13, ' ');
            os << s << e.i << "  " << e.j << "  ";
            std::string a = fmt(e.max_scaled);
            a.resize(std::max<std::size_t>(a.size(), 12), ' ');
            std::string b = fmt(e.max_residual);
            b.resize(std::max<std::size_t>(b.size(), 12), ' ');
            os << a << "  " << b << "  "
               << (e.max_scaled <= rep.tol ? "pass" : "FAIL") << "\n";
        }
    }
    os << "verdict: " << (rep.pass ? "pass" : "FAIL") << "\n";
    return os.str();
}

json integrability_json(const IntegrabilityReport& rep) {
    json j;
    j["kind"] = "integrability";
    j["samples"] = rep.samples;
    j["tol"] = rep.tol;
    j["pass"] = rep.pass;
    j["structural_violations"] = rep.structural_violations;
    j["entries"] = json::array();
    for (const auto& e : rep.entries) {
        json je;
        je["I"] = e.I.axes;
        je["i"] = e.i;
        je["j"] = e.j;
        je["max_scaled"] = e.max_scaled;
        je["max_residual"] = e.max_residual;
        je["scale_at_max"] = e.scale_at_max;
        je["at"] = e.at;
        j["entries"].push_back(std::move(je));
    }
    return j;
}

std::string render_solution_reports(const DarbouxResult& r, const Constants* consts,
                                    double box_radius) {
    std::ostringstream os;
    os << "solve: " << r.solution.iterations << " iterations, final update "
       << fmt(r.solution.final_update) << "\n";
    if (consts) {
        os << "constants (sampled): M " << fmt(consts->M) << ", L " << fmt(consts->L)
           << ", sigma " << fmt(consts->sigma) << "\n";
        if (box_radius > consts->sigma)
            os << "warning: requested box 1-norm radius " << fmt(box_radius)
               << " exceeds estimated sigma " << fmt(consts->sigma)
               << "; convergence is not guaranteed there\n";
    }
    if (!r.delta.entries.empty()) {
        os << "off-axis equation residuals (delta):\n";
        os << "  path      I          i  sup           threshold     verdict\n";
        for (const auto& e : r.delta.entries) {
            std::string p = "  " + (e.path.empty() ? std::string("-") : e.path);
            p.resize(12, ' ');
            std::string I = e.I.str();
            I.resize(11, ' ');
            os << p << I << e.i << "  ";
            std::string a = fmt(e.sup);
            a.resize(std::max<std::size_t>(a.size(), 12), ' ');
            os << a << "  " << fmt(e.threshold) << "      "
               << (e.sup <= e.threshold ? "pass" : "FAIL") << "\n";
        }
    }
    if (!r.consistency.entries.empty()) {
        os << "subsystem intersection consistency:\n";
        os << "  path      I          k  l  sup           threshold     verdict\n";
        for (const auto& e : r.consistency.entries) {
            std::string p = "  " + (e.path.empty() ? std::string("-") : e.path);
            p.resize(12, ' ');
            std::string I = e.I.str();
            I.resize(11, ' ');
            os << p << I << e.k << "  " << e.ell << "  ";
            std::string a = fmt(e.sup);
            a.resize(std::max<std::size_t>(a.size(), 12), ' ');
            os << a << "  " << fmt(e.threshold) << "      "
               << (e.sup <= e.threshold ? "pass" : "FAIL") << "\n";
        }
    }
    os << "verdict: " << (r.delta.pass && r.consistency.pass ? "pass" : "FAIL")
       << "\n";
    return os.str();
}

json solution_json(const DarbouxResult& r) {
    json j;
    j["kind"] = "solve";
    j["iterations"] = r.solution.iterations;
    j["final_update"] = r.solution.final_update;
    j["delta"] = json::array();
    for (const auto& e : r.delta.entries)
        j["delta"].push_back({{"path", e.path},
                              {"I", e.I.axes},
                              {"i", e.i},
                              {"sup", e.sup},
                              {"threshold", e.threshold}});
    j["consistency"] = json::array();
    for (const auto& e : r.consistency.entries)
        j["consistency"].push_back({{"path", e.path},
                                    {"I", e.I.axes},
                                    {"k", e.k},
                                    {"l", e.ell},
                                    {"sup", e.sup},
                                    {"threshold", e.threshold}});
    j["pass"] = r.delta.pass && r.consistency.pass;
    return j;
}

int run_check(const std::string& spec_path, int samples, double tol, bool as_json,
              const std::string& report_path) {
    JobSpec job = parse_spec_file(spec_path);
    ValidatedSystem sys = ValidatedSystem::validate(job.system);
    IntegrabilityOptions opts;
    opts.samples = samples;
    opts.tol = tol;
    if (job.solve) opts.x_radius = job.solve->halfwidth;
    IntegrabilityReport rep = check_integrability(sys, opts);
    if (as_json)
        emit(integrability_json(rep).dump(2) + "\n", report_path);
    else
        emit(render_integrability(rep), report_path);
    return rep.pass ? kExitPass : kExitVerdictFail;
}

int run_solve(const std::string& spec_path, const std::string& out_csv,
              const std::string& report_path, double tol_override, int max_iter_override,
              double delta_tol_factor, int samples, double check_tol, bool skip_checks,
              bool serial, bool as_json) {
    JobSpec job = parse_spec_file(spec_path);
    ValidatedSystem sys = ValidatedSystem::validate(job.system);
    Grid grid = make_grid(job);

    std::string text;
    json jout;

    if (!skip_checks && sys.is_overdetermined()) {
        IntegrabilityOptions iopts;
        iopts.samples = samples;
        iopts.tol = check_tol;
        iopts.x_radius = job.solve->halfwidth;
        IntegrabilityReport irep = check_integrability(sys, iopts);
        text += render_integrability(irep);
        jout["integrability"] = integrability_json(irep);
        if (!irep.pass) {
            emit(as_json ? jout.dump(2) + "\n" : text, report_path);
            return kExitVerdictFail;
        }
    }

    DarbouxOptions opts;
    opts.tol = tol_override > 0 ? tol_override : job.picard.tol;
    opts.max_iter = max_iter_override > 0 ? max_iter_override : job.picard.max_iter;
    opts.delta_tol_factor = delta_tol_factor;
    opts.init = job.picard.init;
    opts.parallel = !serial;

    std::optional<Constants> consts;
    double box_radius = std::accumulate(job.solve->halfwidth.begin(),
                                        job.solve->halfwidth.end(), 0.0);
    if (sys.is_determined()) {
        try {
            consts = estimate_constants(sys, box_radius, 1.0, 2048);
        } catch (const EvalError&) {
            // constants are advisory; solve proceeds without them
        }
    }

    DarbouxResult result = solve_darboux(sys, grid, opts);
    if (!out_csv.empty()) write_csv(out_csv, sys, result.solution);

    text += render_solution_reports(result, consts ? &*consts : nullptr, box_radius);
    if (as_json) {
        jout["solve"] = solution_json(result);
        emit(jout.dump(2) + "\n", report_path);
    } else {
        emit(text, report_path);
    }
    return result.delta.pass && result.consistency.pass ? kExitPass
                                                        : kExitVerdictFail;
}

int run_verify(const std::string& spec_path, const std::string& cand_path,
               int samples, double tol, bool as_json, const std::string& report_path) {
    JobSpec job = parse_spec_file(spec_path);
    ValidatedSystem sys = ValidatedSystem::validate(job.system);
    auto candidate = parse_candidate_file(cand_path);
    CandidateOptions opts;
    opts.samples = samples;
    if (job.solve) opts.x_radius = job.solve->halfwidth;
    CandidateReport rep = candidate_residual(sys, candidate, opts);
    bool pass = rep.max_residual <= tol;
    if (as_json) {
        json j;
        j["kind"] = "verify";
        j["tol"] = tol;
        j["max_residual"] = rep.max_residual;
        j["pass"] = pass;
        j["pde"] = json::array();
        for (const auto& e : rep.pde)
            j["pde"].push_back(
                {{"var", e.var}, {"I", e.I.axes}, {"i", e.i}, {"sup", e.sup}});
        j["data"] = json::array();
        for (const auto& e : rep.data)
            j["data"].push_back({{"var", e.var}, {"sup", e.sup}});
        emit(j.dump(2) + "\n", report_path);
    } else {
        std::ostringstream os;
        os << "candidate residuals (" << samples << " samples, tol " << fmt(tol)
           << "):\n";
        os << "  equation residuals:\n";
        for (const auto& e : rep.pde)
            os << "    " << e.var << "  I=" << e.I.str() << "  i=" << e.i << "  sup "
               << fmt(e.sup) << "\n";
        if (!rep.data.empty()) {
            os << "  data residuals:\n";
            for (const auto& e : rep.data)
                os << "    " << e.var << "  sup " << fmt(e.sup) << "\n";
        }
        os << "max residual: " << fmt(rep.max_residual) << "\n";
        os << "verdict: " << (pass ? "pass" : "FAIL") << "\n";
        emit(os.str(), report_path);
    }
    return pass ? kExitPass : kExitVerdictFail;
}

int run_convergence(const std::string& spec_path, const std::string& ref_path,
                    int levels, bool as_json, const std::string& report_path) {
    JobSpec job = parse_spec_file(spec_path);
    ValidatedSystem sys = ValidatedSystem::validate(job.system);
    Grid grid = make_grid(job);
    auto reference = parse_candidate_file(ref_path);
    DarbouxOptions opts;
    opts.tol = job.picard.tol;
    opts.max_iter = job.picard.max_iter;
    opts.init = job.picard.init;
    ConvergenceReport rep = convergence_study(sys, grid, levels, reference, opts);
    if (as_json) {
        json j;
        j["kind"] = "convergence";
        j["levels"] = json::array();
        for (const auto& l : rep.levels)
            j["levels"].push_back({{"counts", l.counts},
                                   {"max_spacing", l.max_spacing},
                                   {"sup_error", l.sup_error}});
        j["orders"] = rep.orders;
        j["exact"] = rep.exact;
        emit(j.dump(2) + "\n", report_path);
    } else {
        std::ostringstream os;
        os << "convergence study (" << levels << " levels):\n";
        os << "  nodes               spacing       sup error\n";
        for (const auto& l : rep.levels) {
            std::ostringstream nodes;
            for (std::size_t k = 0; k < l.counts.size(); ++k)
                nodes << (k ? "x" : "") << l.counts[k];
            std::string s = "  " + nodes.str();
            s.resize(22, ' ');
            std::string sp = fmt(l.max_spacing);
            sp.resize(std::max<std::size_t>(sp.size(), 12), ' ');
            os << s << sp << "  " << fmt(l.sup_error) << "\n";
        }
        if (rep.exact) {
            os << "order: exact (errors at rounding level)\n";
        } else {
            os << "orders:";
            for (double p : rep.orders) os << " " << fmt(p);
            os << "\n";
        }
        emit(os.str(), report_path);
    }
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver and verification harness for first-order PDE systems "
                 "prescribing one partial derivative per equation"};
    app.require_subcommand(1);

    std::string spec_path, out_csv, report_path, cand_path;
    int samples = 4096;
    double tol = 1e-10;
    bool as_json = false;

    auto* check = app.add_subcommand("check", "Check the cross-derivative "
                                              "integrability identities");
    check->add_option("spec", spec_path, "system spec file")->required();
    check->add_option("--samples", samples, "sample count");
    check->add_option("--tol", tol, "scaled residual tolerance");
    check->add_flag("--json", as_json, "machine-readable output");
    check->add_option("--report", report_path, "write the report to a file");

    double solve_tol = -1.0, delta_tol_factor = 10.0, check_tol = 1e-10;
    int max_iter = -1;
    bool skip_checks = false, serial = false;
    auto* solve = app.add_subcommand("solve", "Solve the system on the grid of "
                                              "the [solve] section");
    solve->add_option("spec", spec_path, "system spec file")->required();
    solve->add_option("-o,--output", out_csv, "write the solution as CSV");
    solve->add_option("--report", report_path, "write the report to a file");
    solve->add_option("--tol", solve_tol, "iteration tolerance (overrides [picard])");
    solve->add_option("--max-iter", max_iter, "iteration cap (overrides [picard])");
    solve->add_option("--delta-tol-factor", delta_tol_factor,
                      "off-axis residual threshold factor");
    solve->add_option("--samples", samples, "integrability sample count");
    solve->add_option("--check-tol", check_tol, "integrability tolerance");
    solve->add_flag("--skip-checks", skip_checks,
                    "solve without the integrability check");
    solve->add_flag("--serial", serial, "disable the parallel sweep");
    solve->add_flag("--json", as_json, "machine-readable output");

    double verify_tol = 1e-6;
    int verify_samples = 2048;
    auto* verify = app.add_subcommand("verify", "Residuals of a closed-form "
                                                "candidate solution");
    verify->add_option("spec", spec_path, "system spec file")->required();
    verify->add_option("--candidate", cand_path, "candidate expression file")
        ->required();
    verify->add_option("--samples", verify_samples, "sample count");
    verify->add_option("--tol", verify_tol, "residual tolerance");
    verify->add_flag("--json", as_json, "machine-readable output");
    verify->add_option("--report", report_path, "write the report to a file");

    int levels = 3;
    auto* conv = app.add_subcommand("convergence", "Empirical convergence order "
                                                   "against a reference");
    conv->add_option("spec", spec_path, "system spec file")->required();
    conv->add_option("--reference", cand_path, "reference expression file")
        ->required();
    conv->add_option("--levels", levels, "grid refinement levels")
        ->check(CLI::Range(2, 10));
    conv->add_flag("--json", as_json, "machine-readable output");
    conv->add_option("--report", report_path, "write the report to a file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInputError;
    }

    try {
        if (check->parsed())
            return run_check(spec_path, samples, tol, as_json, report_path);
        if (solve->parsed())
            return run_solve(spec_path, out_csv, report_path, solve_tol, max_iter,
                             delta_tol_factor, samples, check_tol, skip_checks,
                             serial, as_json);
        if (verify->parsed())
            return run_verify(spec_path, cand_path, verify_samples, verify_tol,
                              as_json, report_path);
        if (conv->parsed())
            return run_convergence(spec_path, cand_path, levels, as_json,
                                   report_path);
    } catch (const ValidationError& e) {
        std::cerr << "system validation failed:\n";
        for (const auto& v : e.violations) std::cerr << "  " << v << "\n";
        return kExitVerdictFail;
    } catch (const SolveFailure& e) {
        std::cerr << "solver did not converge: " << e.what() << " (iterations "
                  << e.iterations << ", last update " << fmt(e.last_update) << ")\n";
        return kExitNoConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
