#include "darboux/system.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace darboux {

bool MultiIndex::contains(int i) const {
    return std::find(axes.begin(), axes.end(), i) != axes.end();
}

MultiIndex MultiIndex::minus(int i) const {
    MultiIndex out;
    for (int a : axes)
        if (a != i) out.axes.push_back(a);
    return out;
}

MultiIndex MultiIndex::complement(int n) const {
    MultiIndex out;
    for (int a = 1; a <= n; ++a)
        if (!contains(a)) out.axes.push_back(a);
    return out;
}

bool MultiIndex::superset_of(const MultiIndex& other) const {
    // both strictly increasing
    std::size_t k = 0;
    for (int a : axes) {
        if (k < other.axes.size() && other.axes[k] == a) ++k;
    }
    return k == other.axes.size();
}

void MultiIndex::check(int n) const {
    if (axes.empty())
        throw std::invalid_argument("multi-index must be non-empty");
    int prev = 0;
    for (int a : axes) {
        if (a < 1 || a > n)
            throw std::invalid_argument("multi-index entry " + std::to_string(a) +
                                        " outside [1," + std::to_string(n) + "]");
        if (a <= prev)
            throw std::invalid_argument("multi-index " + str() +
                                        " is not strictly increasing");
        prev = a;
    }
}

std::string MultiIndex::str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < axes.size(); ++k) {
        if (k) os << ',';
        os << axes[k];
    }
    os << ')';
    return os.str();
}

ValidationError::ValidationError(std::vector<std::string> v)
    : std::runtime_error([&] {
          std::string msg = "system validation failed:";
          for (const auto& s : v) msg += "\n  - " + s;
          return msg;
      }()),
      violations(std::move(v)) {}

const Expr& UnknownGroup::rhs(int axis, int comp) const {
    for (std::size_t k = 0; k < index.axes.size(); ++k)
        if (index.axes[k] == axis) return comps[comp].rhs[k];
    throw std::out_of_range("axis " + std::to_string(axis) +
                            " not prescribed for unknown with index " + index.str());
}

namespace {

// "x<k>" for k in 1..n
bool is_x_var(const std::string& name, int n, int* axis_out = nullptr) {
    if (name.size() < 2 || name[0] != 'x') return false;
    int v = 0;
    for (std::size_t k = 1; k < name.size(); ++k) {
        if (!std::isdigit((unsigned char)name[k])) return false;
        v = v * 10 + (name[k] - '0');
    }
    if (v < 1 || v > n) return false;
    if (axis_out) *axis_out = v;
    return true;
}

std::string component_var(const UnknownSpec& u, int comp) {
    if (u.dim == 1) return u.name;
    return u.name + "_" + std::to_string(comp);
}

}  // namespace

bool ValidatedSystem::pinned(int axis) const {
    return std::find(pinned_.begin(), pinned_.end(), axis) != pinned_.end();
}

bool ValidatedSystem::is_determined() const {
    return std::all_of(groups_.begin(), groups_.end(),
                       [](const UnknownGroup& g) { return g.index.size() == 1; });
}

bool ValidatedSystem::is_overdetermined() const { return !is_determined(); }

const UnknownGroup* ValidatedSystem::find_group(const MultiIndex& I) const {
    for (const auto& g : groups_)
        if (g.index == I) return &g;
    return nullptr;
}

const UnknownGroup& ValidatedSystem::group(const MultiIndex& I) const {
    const UnknownGroup* g = find_group(I);
    if (!g) throw std::out_of_range("no unknown with multi-index " + I.str());
    return *g;
}

const UnknownGroup* ValidatedSystem::group_of_var(const std::string& var) const {
    for (const auto& g : groups_)
        for (const auto& c : g.comps)
            if (c.var == var) return &g;
    return nullptr;
}

std::vector<MultiIndex> ValidatedSystem::index_set() const {
    std::vector<MultiIndex> out;
    out.reserve(groups_.size());
    for (const auto& g : groups_) out.push_back(g.index);
    return out;
}

std::vector<MultiIndex> ValidatedSystem::dependency_indices(const MultiIndex& I,
                                                            int i) const {
    if (!I.contains(i))
        throw std::invalid_argument("axis " + std::to_string(i) + " not in " + I.str());
    MultiIndex Imi = I.minus(i);
    std::vector<MultiIndex> out;
    for (const auto& g : groups_)
        if (g.index.superset_of(Imi)) out.push_back(g.index);
    return out;
}

std::vector<MultiIndex> ValidatedSystem::dependency_indices_restricted(
    const MultiIndex& I, int i, int ell) const {
    MultiIndex l{ell};
    std::vector<MultiIndex> out;
    for (const auto& J : dependency_indices(I, i))
        if (J != l) out.push_back(J);
    return out;
}

std::vector<std::string> ValidatedSystem::dependency_vars(const MultiIndex& I,
                                                          int i) const {
    std::vector<std::string> out;
    for (const auto& J : dependency_indices(I, i))
        for (const auto& c : group(J).comps) out.push_back(c.var);
    return out;
}

std::vector<MultiIndex> ValidatedSystem::restrictable_indices(int ell) const {
    std::vector<MultiIndex> out;
    for (const auto& g : groups_)
        if (g.index.contains(ell) && g.index.size() > 1) out.push_back(g.index);
    return out;
}

// ---------------------------------------------------------------------------

void ValidatedSystem::finalize_and_check(bool require_data) {
    std::vector<std::string> bad;

    std::sort(groups_.begin(), groups_.end(),
              [](const UnknownGroup& a, const UnknownGroup& b) {
                  return a.index < b.index;
              });

    // All component variables, and collisions with x1..xn.
    std::set<std::string> vars;
    for (const auto& g : groups_) {
        for (const auto& c : g.comps) {
            if (!vars.insert(c.var).second)
                bad.push_back("duplicate component variable \"" + c.var + "\"");
            if (is_x_var(c.var, n_))
                bad.push_back("component variable \"" + c.var +
                              "\" collides with an independent variable");
        }
    }

    for (const auto& g : groups_) {
        // Data expressions live in exactly the variables x_{I^c} (subset;
        // they need not use all of them).
        for (const auto& c : g.comps) {
            if (!c.data) {
                if (require_data)
                    bad.push_back("missing data for component \"" + c.var + "\"");
                continue;
            }
            for (const auto& v : c.data->free_vars()) {
                int axis = 0;
                if (!is_x_var(v, n_, &axis)) {
                    bad.push_back("data for \"" + c.var + "\" uses non-coordinate \"" +
                                  v + "\"");
                } else if (g.index.contains(axis)) {
                    bad.push_back("data for \"" + c.var + "\" depends on x" +
                                  std::to_string(axis) + " which lies in I=" +
                                  g.index.str());
                } else if (pinned(axis)) {
                    bad.push_back("data for \"" + c.var + "\" depends on pinned axis x" +
                                  std::to_string(axis));
                }
            }
        }

        // Closure and the structural dependency condition per equation.
        for (std::size_t k = 0; k < g.index.axes.size(); ++k) {
            int i = g.index.axes[k];
            std::vector<std::string> allowed = dependency_vars(g.index, i);
            for (const auto& c : g.comps) {
                if (c.rhs.size() != g.index.axes.size()) {
                    bad.push_back("internal: equation count mismatch for \"" + c.var +
                                  "\"");
                    continue;
                }
                for (const auto& v : c.rhs[k].free_vars()) {
                    if (is_x_var(v, n_)) continue;
                    if (!vars.count(v)) {
                        bad.push_back("closure violation: equation for \"" + c.var +
                                      "\" (axis " + std::to_string(i) +
                                      ") references \"" + v +
                                      "\" which is not an unknown of the system");
                        continue;
                    }
                    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
                        bad.push_back("dependency violation: I=" + g.index.str() +
                                      ", i=" + std::to_string(i) + ": F depends on \"" +
                                      v + "\" which is not in U^I_i");
                }
            }
        }
    }

    if (!bad.empty()) throw ValidationError(std::move(bad));

    // Keep only surviving variables in declaration order, appending any
    // internally introduced ones.
    std::vector<std::string> order;
    for (const auto& v : var_order_)
        if (vars.count(v)) order.push_back(v);
    for (const auto& g : groups_)
        for (const auto& c : g.comps)
            if (std::find(order.begin(), order.end(), c.var) == order.end())
                order.push_back(c.var);
    var_order_ = std::move(order);
}

ValidatedSystem ValidatedSystem::validate(const SystemSpec& spec) {
    std::vector<std::string> bad;
    if (spec.n < 1) throw ValidationError({"number of variables must be >= 1"});
    if ((int)spec.base.size() != spec.n)
        throw ValidationError({"base point has " + std::to_string(spec.base.size()) +
                               " coordinates, expected " + std::to_string(spec.n)});

    ValidatedSystem sys;
    sys.n_ = spec.n;
    sys.base_ = spec.base;

    std::set<std::string> names;
    for (const auto& u : spec.unknowns) {
        if (!names.insert(u.name).second)
            bad.push_back("duplicate unknown name \"" + u.name + "\"");
        if (u.dim < 1)
            bad.push_back("unknown \"" + u.name + "\" has non-positive dimension");
        try {
            u.index.check(spec.n);
        } catch (const std::exception& e) {
            bad.push_back("unknown \"" + u.name + "\": " + e.what());
        }
    }
    if (!bad.empty()) throw ValidationError(std::move(bad));

    // Group unknowns by multi-index: unknowns with
    // identical prescribed-partial sets merge into one vector unknown.
    for (const auto& u : spec.unknowns) {
        UnknownGroup* g = nullptr;
        for (auto& gg : sys.groups_)
            if (gg.index == u.index) g = &gg;
        if (!g) {
            sys.groups_.push_back({u.index, u.name, {}});
            g = &sys.groups_.back();
        } else {
            g->label += "+" + u.name;
        }
        for (int comp = 1; comp <= u.dim; ++comp) {
            ScalarComponent c;
            c.var = component_var(u, comp);
            c.unknown = u.name;
            c.component = comp;
            c.rhs.resize(u.index.axes.size());
            for (std::size_t k = 0; k < u.index.axes.size(); ++k) {
                auto it = spec.equations.find({u.name, u.index.axes[k], comp});
                if (it == spec.equations.end()) {
                    bad.push_back("missing equation for \"" + c.var + "\" along x" +
                                  std::to_string(u.index.axes[k]));
                } else {
                    c.rhs[k] = it->second;
                }
            }
            auto dit = spec.data.find({u.name, comp});
            if (dit != spec.data.end()) c.data = dit->second;
            g->comps.push_back(std::move(c));
            sys.var_order_.push_back(g->comps.back().var);
        }
    }

    // Equations that refer to no declared unknown/axis/component.
    for (const auto& [key, rhs] : spec.equations) {
        const auto& [name, axis, comp] = key;
        bool ok = false;
        for (const auto& u : spec.unknowns)
            if (u.name == name && u.index.contains(axis) && comp >= 1 && comp <= u.dim)
                ok = true;
        if (!ok)
            bad.push_back("equation for \"" + name + "\" axis " + std::to_string(axis) +
                          " component " + std::to_string(comp) +
                          " does not match any declared unknown");
    }
    for (const auto& [key, expr] : spec.data) {
        bool ok = false;
        for (const auto& u : spec.unknowns)
            if (u.name == key.first && key.second >= 1 && key.second <= u.dim) ok = true;
        if (!ok)
            bad.push_back("data for \"" + key.first + "\" component " +
                          std::to_string(key.second) +
                          " does not match any declared unknown");
    }
    if (!bad.empty()) throw ValidationError(std::move(bad));

    sys.finalize_and_check(/*require_data=*/true);
    return sys;
}

ValidatedSystem ValidatedSystem::restrict_to_hyperplane(int ell) const {
    if (ell < 1 || ell > n_ || pinned(ell))
        throw std::invalid_argument("cannot restrict along axis " + std::to_string(ell));
    std::vector<MultiIndex> keep = restrictable_indices(ell);
    if (keep.empty())
        throw std::invalid_argument("nothing to restrict: no unknown has " +
                                    std::to_string(ell) +
                                    " in a multi-index of size > 1");

    // x_l -> base_l, and any occurrence of the unknown u^(l) -> its data.
    std::map<std::string, Expr> repl;
    repl.emplace("x" + std::to_string(ell), Expr::number(base_[ell - 1]));
    if (const UnknownGroup* gl = find_group(MultiIndex{ell})) {
        for (const auto& c : gl->comps)
            if (c.data) repl.emplace(c.var, *c.data);
    }

    ValidatedSystem out;
    out.n_ = n_;
    out.base_ = base_;
    out.pinned_ = pinned_;
    out.pinned_.push_back(ell);
    std::sort(out.pinned_.begin(), out.pinned_.end());
    out.var_order_ = var_order_;

    for (const auto& I : keep) {
        const UnknownGroup& g = group(I);
        UnknownGroup ng;
        ng.index = I.minus(ell);
        ng.label = g.label + "__r" + std::to_string(ell);
        for (const auto& c : g.comps) {
            ScalarComponent nc;
            nc.var = c.var;
            nc.unknown = c.unknown;
            nc.component = c.component;
            nc.data = c.data;
            for (int i : ng.index.axes)
                nc.rhs.push_back(g.rhs(i, (int)(&c - g.comps.data())).substitute(repl));
            ng.comps.push_back(std::move(nc));
        }
        out.groups_.push_back(std::move(ng));
    }

    out.finalize_and_check(/*require_data=*/false);
    return out;
}

ValidatedSystem ValidatedSystem::build_system_n() const {
    ValidatedSystem out;
    out.n_ = n_;
    out.base_ = base_;
    out.pinned_ = pinned_;
    out.var_order_ = var_order_;

    // One equation per unknown, along min I; unknowns sharing that axis
    // merge into a single vector unknown for the determined solve.
    for (const auto& g : groups_) {
        int i = g.index.min();
        MultiIndex key{i};
        UnknownGroup* ng = nullptr;
        for (auto& gg : out.groups_)
            if (gg.index == key) ng = &gg;
        if (!ng) {
            out.groups_.push_back({key, g.label, {}});
            ng = &out.groups_.back();
        } else {
            ng->label += "+" + g.label;
        }
        for (std::size_t k = 0; k < g.comps.size(); ++k) {
            const auto& c = g.comps[k];
            ScalarComponent nc;
            nc.var = c.var;
            nc.unknown = c.unknown;
            nc.component = c.component;
            nc.rhs.push_back(g.rhs(i, (int)k));
            if (g.index.size() == 1) nc.data = c.data;
            ng->comps.push_back(std::move(nc));
        }
    }

    out.finalize_and_check(/*require_data=*/false);
    return out;
}

SystemSpec ValidatedSystem::as_spec() const {
    SystemSpec spec;
    spec.n = n_;
    spec.base = base_;
    // Reconstruct the original unknown declarations from the components,
    // keeping the user's declaration order.
    for (const auto& var : var_order_) {
        const UnknownGroup* g = group_of_var(var);
        const ScalarComponent* c = nullptr;
        for (const auto& cc : g->comps)
            if (cc.var == var) c = &cc;
        UnknownSpec* u = nullptr;
        for (auto& uu : spec.unknowns)
            if (uu.name == c->unknown) u = &uu;
        if (!u) {
            spec.unknowns.push_back({c->unknown, g->index, 1});
            u = &spec.unknowns.back();
        }
        u->dim = std::max(u->dim, c->component);
        for (std::size_t k = 0; k < g->index.axes.size(); ++k)
            spec.equations.insert(
                {{c->unknown, g->index.axes[k], c->component}, c->rhs[k]});
        if (c->data) spec.data.insert({{c->unknown, c->component}, *c->data});
    }
    return spec;
}

}  // namespace darboux
