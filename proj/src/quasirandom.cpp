#include "darboux/quasirandom.hpp"

#include <cmath>
#include <stdexcept>

namespace darboux {

double halton(std::size_t index, int base) {
    double f = 1.0, r = 0.0;
    // index 0 maps to 0; shift by 1 so the first point is interior
    std::size_t i = index + 1;
    while (i > 0) {
        f /= base;
        r += f * (double)(i % base);
        i /= base;
    }
    return r;
}

namespace {

const int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                       41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

}  // namespace

HaltonSampler::HaltonSampler(int dim) {
    if (dim < 0 || dim > (int)(sizeof kPrimes / sizeof *kPrimes))
        throw std::invalid_argument("HaltonSampler: unsupported dimension " +
                                    std::to_string(dim));
    bases_.assign(kPrimes, kPrimes + dim);
}

std::vector<double> HaltonSampler::centered(std::size_t index) const {
    std::vector<double> p(bases_.size());
    for (std::size_t k = 0; k < bases_.size(); ++k)
        p[k] = 2.0 * halton(index, bases_[k]) - 1.0;
    return p;
}

std::vector<double> HaltonSampler::unit_l1_ball(std::size_t index) const {
    std::vector<double> p = centered(index);
    double s = 0.0;
    for (double v : p) s += std::fabs(v);
    if (s > 1.0)
        for (double& v : p) v /= s;
    return p;
}

}  // namespace darboux
