#pragma once

#include <string>
#include <vector>

#include "darboux/system.hpp"

namespace darboux {

// One cross-derivative identity, for unknown u^I and axes i < j in I:
// the two ways of forming (u^I_{x_i})_{x_j} after substituting the system
// must agree. Residuals are evaluated by symbolic differentiation plus
// dense sampling; an exact symbolic zero test is not attempted.
struct IntegrabilityEntry {
    MultiIndex I;
    int i = 0, j = 0;
    double max_residual = 0.0;   // raw, at the worst sample
    double max_scaled = 0.0;     // residual / scale, max over samples
    double scale_at_max = 1.0;   // 1 + largest |individual term| at that sample
    Env at;                      // worst sample point (x and U)
};

struct IntegrabilityReport {
    std::vector<IntegrabilityEntry> entries;
    std::vector<std::string> structural_violations;
    double tol = 0.0;
    int samples = 0;
    bool pass = false;
};

struct IntegrabilityOptions {
    std::vector<double> x_radius;  // per axis; empty means 0.25 everywhere
    double u_radius = 1.0;
    int samples = 4096;
    double tol = 1e-10;
};

// |lhs - rhs| of the identity at one point (max over the components of
// u^I); `point` must bind x1..xn and every component variable.
double residual_at_point(const ValidatedSystem& sys, const MultiIndex& I,
                         int i, int j, const Env& point);

// Samples the identity for every triple (I, i, j), i < j in I, over the
// product box centered at (base, data-at-base). Verdict passes when every
// scaled residual is below tol and no structural violation exists.
IntegrabilityReport check_integrability(const ValidatedSystem& sys,
                                        const IntegrabilityOptions& opts = {});

}  // namespace darboux
