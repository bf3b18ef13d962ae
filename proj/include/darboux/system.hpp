#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "darboux/expr.hpp"

namespace darboux {

// Strictly increasing multi-index over the axes 1..n. Indexes the unknowns:
// u^I is the unknown whose partials along exactly the axes of I are
// prescribed by the system.
struct MultiIndex {
    std::vector<int> axes;  // strictly increasing, 1-based

    MultiIndex() = default;
    MultiIndex(std::initializer_list<int> a) : axes(a) {}
    explicit MultiIndex(std::vector<int> a) : axes(std::move(a)) {}

    int size() const { return (int)axes.size(); }
    int min() const { return axes.front(); }
    int max() const { return axes.back(); }
    bool contains(int i) const;
    MultiIndex minus(int i) const;          // I \ i (i must be in I)
    MultiIndex complement(int n) const;     // I^c within 1..n
    bool superset_of(const MultiIndex& other) const;  // I >= other as sets

    void check(int n) const;  // throws unless strictly increasing in [1,n]

    std::string str() const;  // "(1,3)"

    auto operator<=>(const MultiIndex&) const = default;
};

struct UnknownSpec {
    std::string name;
    MultiIndex index;
    int dim = 1;
};

// Raw, as-parsed system description. Equation and data keys refer to the
// unknown name, the axis, and the 1-based component.
struct SystemSpec {
    int n = 0;
    std::vector<double> base;  // base point, size n
    std::vector<UnknownSpec> unknowns;
    std::map<std::tuple<std::string, int, int>, Expr> equations;  // (name, axis, comp)
    std::map<std::pair<std::string, int>, Expr> data;             // (name, comp)
};

struct ValidationError : std::runtime_error {
    std::vector<std::string> violations;
    explicit ValidationError(std::vector<std::string> v);
};

// One scalar component of a (possibly merged) vector unknown.
struct ScalarComponent {
    std::string var;      // name used inside expressions ("w" or "w_2")
    std::string unknown;  // declared unknown this component came from
    int component = 1;    // 1-based within the declared unknown
    std::vector<Expr> rhs;        // one per axis of the group's index, in order
    std::optional<Expr> data;     // expression in x_{I^c}; absent only for
                                  // internally built systems with field data
};

// All components sharing one multi-index (merged into one vector unknown).
struct UnknownGroup {
    MultiIndex index;
    std::string label;  // display name; merged groups join names with '+'
    std::vector<ScalarComponent> comps;

    const Expr& rhs(int axis, int comp) const;  // axis value, comp 0-based
};

// A validated Darboux-form system. Restricted subsystems stay in the full
// n-dimensional coordinate frame: restricting to {x_l = base_l} pins axis l
// (expressions have x_l substituted by the base value) and the grid slice
// collapses that axis. This keeps every data hand-off a node copy.
class ValidatedSystem {
public:
    static ValidatedSystem validate(const SystemSpec& spec);

    int n() const { return n_; }
    const std::vector<double>& base() const { return base_; }
    const std::vector<UnknownGroup>& groups() const { return groups_; }
    const std::vector<int>& pinned_axes() const { return pinned_; }
    bool pinned(int axis) const;

    bool is_determined() const;    // every |I| == 1
    bool is_overdetermined() const;

    // All component variable names, in user declaration order.
    const std::vector<std::string>& component_vars() const { return var_order_; }
    int total_components() const { return (int)var_order_.size(); }

    const UnknownGroup* find_group(const MultiIndex& I) const;
    const UnknownGroup& group(const MultiIndex& I) const;
    // Group owning a component variable, or nullptr.
    const UnknownGroup* group_of_var(const std::string& var) const;

    std::vector<MultiIndex> index_set() const;  // the set of multi-indices

    // I^I_i = {J : J >= I\i}; the restricted variant additionally drops (l).
    std::vector<MultiIndex> dependency_indices(const MultiIndex& I, int i) const;
    std::vector<MultiIndex> dependency_indices_restricted(const MultiIndex& I,
                                                          int i, int ell) const;
    // Component variables of U^I_i.
    std::vector<std::string> dependency_vars(const MultiIndex& I, int i) const;

    // {I : l in I != (l)} — the unknowns that survive restriction at l.
    std::vector<MultiIndex> restrictable_indices(int ell) const;

    // System l: copies of the axis-i equations (i in I\l) for I with
    // l in I != (l), pinned to {x_l = base_l}, with any occurrence of the
    // unknown u^(l) replaced by its data expression.
    ValidatedSystem restrict_to_hyperplane(int ell) const;

    // The determined system keeping, per unknown, only the min-axis
    // equation. Data expressions survive only for |I| == 1 unknowns; the
    // rest is supplied as grid fields by the overdetermined solver.
    ValidatedSystem build_system_n() const;

    SystemSpec as_spec() const;

private:
    ValidatedSystem() = default;
    void finalize_and_check(bool require_data);

    int n_ = 0;
    std::vector<double> base_;
    std::vector<UnknownGroup> groups_;   // sorted by index
    std::vector<int> pinned_;            // sorted
    std::vector<std::string> var_order_;
};

}  // namespace darboux
