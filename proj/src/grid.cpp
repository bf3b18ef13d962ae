#include "darboux/grid.hpp"

#include <algorithm>

namespace darboux {

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes)) {
    stride_.resize(axes_.size());
    size_ = 1;
    for (std::size_t k = 0; k < axes_.size(); ++k) {
        const Axis& a = axes_[k];
        if (a.count < 1 || a.count % 2 == 0)
            throw std::invalid_argument("grid axis " + std::to_string(k + 1) +
                                        ": point count must be odd and >= 1");
        if (a.count > 1 && a.halfwidth <= 0.0)
            throw std::invalid_argument("grid axis " + std::to_string(k + 1) +
                                        ": halfwidth must be positive");
        stride_[k] = size_;
        size_ *= (std::size_t)a.count;
    }
}

double Grid::max_spacing() const {
    double d = 0.0;
    for (int i = 1; i <= dim(); ++i) d = std::max(d, spacing(i));
    return d;
}

Grid Grid::slice(int i) const {
    std::vector<Axis> axes = axes_;
    axes[i - 1].count = 1;
    axes[i - 1].halfwidth = 0.0;
    return Grid(std::move(axes));
}

std::size_t Grid::flat(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (std::size_t k = 0; k < axes_.size(); ++k) f += idx[k] * stride_[k];
    return f;
}

void Grid::unflatten(std::size_t flat, std::vector<int>& idx) const {
    idx.resize(axes_.size());
    for (std::size_t k = 0; k < axes_.size(); ++k) {
        idx[k] = (int)(flat % axes_[k].count);
        flat /= axes_[k].count;
    }
}

std::vector<double> Grid::node_coords(std::size_t flat) const {
    std::vector<int> idx;
    unflatten(flat, idx);
    std::vector<double> x(axes_.size());
    for (int i = 1; i <= dim(); ++i) x[i - 1] = coord(i, idx[i - 1]);
    return x;
}

}  // namespace darboux
