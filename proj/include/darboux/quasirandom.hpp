#pragma once

#include <cstddef>
#include <vector>

namespace darboux {

// Halton low-discrepancy sequence; deterministic, so sampled reports are
// reproducible run to run.
double halton(std::size_t index, int base);

class HaltonSampler {
public:
    explicit HaltonSampler(int dim);

    // Point `index` of the sequence, mapped to [-1,1]^dim.
    std::vector<double> centered(std::size_t index) const;

    // Same, but scaled into the unit 1-norm ball (points outside are pulled
    // radially onto it, which keeps the boundary well covered for sup
    // estimates).
    std::vector<double> unit_l1_ball(std::size_t index) const;

private:
    std::vector<int> bases_;
};

}  // namespace darboux
