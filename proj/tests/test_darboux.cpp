#include "doctest.h"

#include <cmath>

#include "darboux/darboux_solver.hpp"
#include "darboux/specfile.hpp"

using namespace darboux;

namespace {

ValidatedSystem load(const std::string& name) {
    JobSpec job = parse_spec_file(std::string(FIXTURE_DIR) + "/" + name);
    return ValidatedSystem::validate(job.system);
}

Grid fixture_grid(const std::string& name) {
    JobSpec job = parse_spec_file(std::string(FIXTURE_DIR) + "/" + name);
    std::vector<Grid::Axis> axes;
    for (int i = 0; i < job.system.n; ++i)
        axes.push_back({job.system.base[i], job.solve->halfwidth[i],
                        job.solve->points[i]});
    return Grid(axes);
}

}  // namespace

TEST_CASE("numeric grid derivative is second order") {
    Grid g({{0, 0.5, 33}, {0, 0.5, 5}});
    std::vector<double> f(g.size());
    std::vector<int> idx;
    for (std::size_t k = 0; k < g.size(); ++k) {
        g.unflatten(k, idx);
        f[k] = std::sin(g.coord(1, idx[0])) * (1.0 + g.coord(2, idx[1]));
    }
    std::vector<double> df = grid_derivative(g, f, 1);
    double d = g.spacing(1), sup = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        g.unflatten(k, idx);
        double exact = std::cos(g.coord(1, idx[0])) * (1.0 + g.coord(2, idx[1]));
        sup = std::max(sup, std::fabs(df[k] - exact));
    }
    CHECK(sup <= 2.0 * d * d);

    Grid flat({{0, 0.5, 5}, {0, 0.0, 1}});
    std::vector<double> one(flat.size(), 1.0);
    CHECK_THROWS(grid_derivative(flat, one, 2));
}

TEST_CASE("determined systems pass through unchanged") {
    ValidatedSystem sys = load("two_plus_two.sys");
    Grid grid({{0, 0.2, 9}, {0, 0.2, 9}, {0, 0.2, 9}});
    DarbouxResult r = solve_darboux(sys, grid);
    GridSolution direct = solve_determined(sys, grid);
    CHECK(r.delta.entries.empty());
    CHECK(r.consistency.entries.empty());
    CHECK(r.delta.pass);
    CHECK(r.solution.iterations == direct.iterations);
    for (std::size_t k = 0; k < direct.fields.size(); ++k)
        CHECK(r.solution.field(direct.vars[k]) == direct.fields[k]);
}

TEST_CASE("fully prescribed gradient reproduces the exponential") {
    ValidatedSystem sys = load("frobenius2d.sys");
    Grid grid = fixture_grid("frobenius2d.sys");
    DarbouxResult r = solve_darboux(sys, grid);
    double sup = 0.0;
    std::vector<int> idx;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        grid.unflatten(k, idx);
        double exact = std::exp(grid.coord(1, idx[0]) + grid.coord(2, idx[1]));
        sup = std::max(sup, std::fabs(r.solution.field("u")[k] - exact));
    }
    CHECK(sup <= 5e-4);
    REQUIRE(r.delta.entries.size() == 1);
    CHECK(r.delta.entries[0].I == MultiIndex{1, 2});
    CHECK(r.delta.entries[0].i == 2);
    double d = grid.max_spacing();
    CHECK(r.delta.entries[0].sup <= 10 * (d * d + 1e-12));
    CHECK(r.delta.pass);
    CHECK(r.consistency.pass);
}

TEST_CASE("three-variable fixture reproduces the closed forms") {
    ValidatedSystem sys = load("maximal3d.sys");
    Grid grid({{0, 0.25, 33}, {0, 0.25, 33}, {0, 0.25, 33}});
    DarbouxResult r = solve_darboux(sys, grid);
    CHECK(r.delta.pass);
    CHECK(r.consistency.pass);

    std::map<std::string, Expr> exact = parse_candidate_file(
        std::string(FIXTURE_DIR) + "/maximal3d.ref");
    double d = grid.max_spacing();
    std::vector<int> idx;
    for (const auto& [var, e] : exact) {
        double sup = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            grid.unflatten(k, idx);
            Env env{{"x1", grid.coord(1, idx[0])},
                    {"x2", grid.coord(2, idx[1])},
                    {"x3", grid.coord(3, idx[2])}};
            sup = std::max(sup, std::fabs(r.solution.field(var)[k] - e.eval(env)));
        }
        CAPTURE(var);
        CHECK(sup <= 10 * d * d);
    }
}

TEST_CASE("assigned data hold exactly at grid nodes") {
    ValidatedSystem sys = load("maximal3d.sys");
    Grid grid({{0, 0.25, 17}, {0, 0.25, 17}, {0, 0.25, 17}});
    DarbouxResult r = solve_darboux(sys, grid);
    std::vector<int> idx;
    for (const auto& g : sys.groups()) {
        const MultiIndex& I = g.index;
        for (const auto& c : g.comps) {
            const auto& field = r.solution.field(c.var);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                grid.unflatten(k, idx);
                bool on_plane = true;
                for (int i : I.axes)
                    if (idx[i - 1] != grid.mid(i)) on_plane = false;
                if (!on_plane) continue;
                Env env;
                for (int i = 1; i <= 3; ++i)
                    env["x" + std::to_string(i)] = grid.coord(i, idx[i - 1]);
                CHECK(std::fabs(field[k] - c.data->eval(env)) <= 1e-13);
            }
        }
    }
}

TEST_CASE("skipping the identity check surfaces in the leftover residuals") {
    ValidatedSystem sys = load("maximal3d_bad_identity.sys");
    Grid grid({{0, 0.25, 33}, {0, 0.25, 33}, {0, 0.25, 33}});
    DarbouxResult r = solve_darboux(sys, grid);
    CHECK_FALSE(r.delta.pass);
    double worst = 0.0;
    for (const auto& e : r.delta.entries)
        if (e.path.empty() && e.I == MultiIndex{1, 2, 3} && e.i == 2)
            worst = e.sup;
    CHECK(worst >= 0.01);
}

TEST_CASE("subsystem solutions agree where their hyperplanes intersect") {
    ValidatedSystem sys = load("maximal3d.sys");
    Grid grid({{0, 0.25, 17}, {0, 0.25, 17}, {0, 0.25, 17}});
    DarbouxResult r = solve_darboux(sys, grid);
    bool top_pair = false;
    for (const auto& e : r.consistency.entries) {
        CHECK(e.sup <= e.threshold);
        if (e.path.empty() && e.I == MultiIndex{1, 2, 3}) top_pair = true;
    }
    CHECK(top_pair);
}
