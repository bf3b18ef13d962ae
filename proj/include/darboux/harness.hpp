#pragma once

#include <map>
#include <string>
#include <vector>

#include "darboux/darboux_solver.hpp"
#include "darboux/determined.hpp"
#include "darboux/grid.hpp"
#include "darboux/system.hpp"

namespace darboux {

// How well a closed-form candidate satisfies one equation: the symbolic
// derivative of the candidate along x_i minus the right-hand side with the
// candidate substituted for every unknown, sampled over the box.
struct CandidatePdeEntry {
    std::string var;
    MultiIndex I;
    int i = 0;
    double sup = 0.0;
    Env at;
};

struct CandidateDataEntry {
    std::string var;
    double sup = 0.0;
    Env at;
};

struct CandidateReport {
    std::vector<CandidatePdeEntry> pde;
    std::vector<CandidateDataEntry> data;
    double max_residual = 0.0;
};

struct CandidateOptions {
    std::vector<double> x_radius;  // per axis; empty means 0.25 everywhere
    int samples = 2048;
};

// `candidate` binds every component variable to an expression in x1..xn.
CandidateReport candidate_residual(const ValidatedSystem& sys,
                                   const std::map<std::string, Expr>& candidate,
                                   const CandidateOptions& opts = {});

struct ErrorEntry {
    std::string var;
    double sup = 0.0;
    double rms = 0.0;
};

struct ErrorReport {
    std::vector<ErrorEntry> entries;
    double max_sup = 0.0;
};

// Node-wise comparison of a grid solution against reference expressions.
ErrorReport error_report(const GridSolution& sol,
                         const std::map<std::string, Expr>& reference);

struct ConvergenceLevel {
    std::vector<int> counts;  // per axis
    double max_spacing = 0.0;
    double sup_error = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceLevel> levels;
    std::vector<double> orders;  // log2(e_k / e_{k+1}) between adjacent levels
    bool exact = false;          // all errors at rounding level; orders meaningless
};

// Solves on `levels` nested grids, halving the spacing each time
// (m -> 2(m-1)+1 nodes per refined axis), and reports the observed
// convergence order of the sup error against the reference.
ConvergenceReport convergence_study(const ValidatedSystem& sys, const Grid& grid,
                                    int levels,
                                    const std::map<std::string, Expr>& reference,
                                    const DarbouxOptions& opts = {});

}  // namespace darboux
