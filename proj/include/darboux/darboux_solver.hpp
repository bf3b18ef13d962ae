#pragma once

#include <map>
#include <string>
#include <vector>

#include "darboux/determined.hpp"
#include "darboux/grid.hpp"
#include "darboux/system.hpp"

namespace darboux {

// Defect of a non-min-axis equation: the solved field differentiated
// numerically along x_i minus the equation's right-hand side. Exactly zero
// in the continuum theory; bounded by the grid-order threshold here.
struct DeltaEntry {
    std::string path;  // recursion path, "" for the top system
    MultiIndex I;
    int i = 0;
    double sup = 0.0;
    double threshold = 0.0;
};

struct DeltaReport {
    std::vector<DeltaEntry> entries;
    bool pass = true;
};

// Discrepancy of two hyperplane restrictions that the construction
// requires to coincide: u^{k,I} on {x_l = base} vs u^{l,I} on {x_k = base}.
struct ConsistencyEntry {
    std::string path;
    MultiIndex I;
    int k = 0, ell = 0;
    double sup = 0.0;
    double threshold = 0.0;
};

struct ConsistencyReport {
    std::vector<ConsistencyEntry> entries;
    bool pass = true;
};

struct DarbouxOptions {
    double tol = 1e-12;
    int max_iter = 200;
    double delta_tol_factor = 10.0;
    InitMode init = InitMode::DataExtension;
    bool parallel = true;
};

struct DarbouxResult {
    GridSolution solution;
    DeltaReport delta;
    ConsistencyReport consistency;
};

// Finite-difference derivative of a grid field along one axis (central in
// the interior, second-order one-sided at the box faces).
std::vector<double> grid_derivative(const Grid& grid, const std::vector<double>& f,
                                    int axis);

DeltaReport delta_residuals(const ValidatedSystem& sys, const GridSolution& sol,
                            double threshold);

// Data fields for the final determined system: for each unknown with
// |I| > 1 the slice {x_{min I} = base} of the corresponding subsystem
// solution, node for node.
std::map<std::string, std::vector<double>> assemble_data_for_system_n(
    const ValidatedSystem& sys, const std::map<int, GridSolution>& subsolutions);

ConsistencyReport intersection_consistency(
    const ValidatedSystem& sys, const Grid& grid,
    const std::map<int, GridSolution>& subsolutions, double threshold);

// Inductive construction: recursively solve the hyperplane restrictions,
// hand their slices to the determined min-axis system, then verify the
// leftover equations through the delta residuals. Expects the system to
// have passed check_integrability; the solver does not re-check.
DarbouxResult solve_darboux(const ValidatedSystem& sys, const Grid& grid,
                            const DarbouxOptions& opts = {});

}  // namespace darboux
