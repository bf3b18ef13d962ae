#pragma once

#include <map>
#include <string>
#include <vector>

#include "darboux/grid.hpp"
#include "darboux/system.hpp"

namespace darboux {

// Constants of the determined existence theorem: on the product of 1-norm
// balls of radii a (in x) and b (around the data value at the base point),
// M bounds |F|, L is a Lipschitz bound of F in the unknowns, and
// sigma = min(a, b/(2MN)) is the guaranteed convergence radius.
struct Constants {
    double a = 0.0;
    double b = 0.0;
    double L = 0.0;
    double M = 0.0;
    double sigma = 0.0;
    int N = 0;  // total scalar unknown count
};

// Sampled estimates (not certified bounds) of the constants above.
Constants estimate_constants(const ValidatedSystem& sys, double a, double b,
                             int samples);

enum class InitMode { DataExtension, Zeros };

struct PicardOptions {
    double tol = 1e-12;
    int max_iter = 200;
    InitMode init = InitMode::DataExtension;
    bool parallel = true;  // ignored when built without OpenMP
    // Per-component data fields on grid.slice(axis), replacing the data
    // expression; used to hand sub-solution slices to the final solve.
    std::map<std::string, std::vector<double>> data_override;
};

struct GridSolution {
    Grid grid;
    std::vector<std::string> vars;              // component order
    std::vector<std::vector<double>> fields;    // one per var, grid.size() each

    int iterations = 0;
    double final_update = 0.0;

    int var_slot(const std::string& var) const;
    const std::vector<double>& field(const std::string& var) const;
};

struct SolveFailure : std::runtime_error {
    int iterations;
    double last_update;
    bool diverging;
    SolveFailure(std::string msg, int it, double upd, bool div)
        : std::runtime_error(std::move(msg)),
          iterations(it), last_update(upd), diverging(div) {}
};

// Picard iteration of the data-plus-line-integral map, discretized with
// composite trapezoid quadrature along each component's prescribed axis.
// Stops when the sup-norm update drops below tol.
GridSolution solve_determined(const ValidatedSystem& sys, const Grid& grid,
                              const PicardOptions& opts = {});

bool openmp_enabled();

}  // namespace darboux
