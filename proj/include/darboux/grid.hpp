#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace darboux {

// Tensor-product grid over a box centered at the base point. Axis indices
// are 1-based throughout (matching the variable names x1..xn). A collapsed
// axis (count 1) pins the coordinate to the center; hyperplane slices of a
// grid are grids with one more collapsed axis, so data hand-offs between
// nested solves are node-for-node copies.
class Grid {
public:
    struct Axis {
        double center = 0.0;
        double halfwidth = 0.0;
        int count = 1;  // odd, so the base point is a node
    };

    Grid() = default;
    Grid(std::vector<Axis> axes);

    int dim() const { return (int)axes_.size(); }
    std::size_t size() const { return size_; }
    const Axis& axis(int i) const { return axes_[i - 1]; }

    int count(int i) const { return axes_[i - 1].count; }
    int mid(int i) const { return (axes_[i - 1].count - 1) / 2; }
    double spacing(int i) const {
        const Axis& a = axes_[i - 1];
        return a.count > 1 ? 2.0 * a.halfwidth / (a.count - 1) : 0.0;
    }
    double coord(int i, int k) const {
        return axes_[i - 1].center + (k - mid(i)) * spacing(i);
    }
    std::size_t stride(int i) const { return stride_[i - 1]; }

    // Largest spacing over non-collapsed axes (0 if all collapsed).
    double max_spacing() const;

    bool collapsed(int i) const { return axes_[i - 1].count == 1; }

    Grid slice(int i) const;  // collapse axis i to the center node

    // Flat index <-> per-axis node indices (row-major, axis 1 fastest).
    std::size_t flat(const std::vector<int>& idx) const;
    void unflatten(std::size_t flat, std::vector<int>& idx) const;

    std::vector<double> node_coords(std::size_t flat) const;

private:
    std::vector<Axis> axes_;
    std::vector<std::size_t> stride_;
    std::size_t size_ = 1;
};

}  // namespace darboux
