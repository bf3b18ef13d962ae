#include "doctest.h"

#include "darboux/grid.hpp"

using namespace darboux;

TEST_CASE("grid layout and coordinates") {
    Grid g({{0.0, 0.5, 5}, {1.0, 0.25, 3}});
    CHECK(g.dim() == 2);
    CHECK(g.size() == 15);
    CHECK(g.stride(1) == 1);
    CHECK(g.stride(2) == 5);
    CHECK(g.spacing(1) == doctest::Approx(0.25));
    CHECK(g.spacing(2) == doctest::Approx(0.25));
    CHECK(g.mid(1) == 2);
    CHECK(g.coord(1, 2) == 0.0);
    CHECK(g.coord(1, 0) == -0.5);
    CHECK(g.coord(2, 2) == doctest::Approx(1.25));
    CHECK(g.max_spacing() == doctest::Approx(0.25));
}

TEST_CASE("flat index round trip, axis 1 fastest") {
    Grid g({{0, 1, 3}, {0, 1, 5}, {0, 1, 3}});
    CHECK(g.flat({1, 0, 0}) == 1);
    CHECK(g.flat({0, 1, 0}) == 3);
    CHECK(g.flat({0, 0, 1}) == 15);
    std::vector<int> idx;
    for (std::size_t f = 0; f < g.size(); ++f) {
        g.unflatten(f, idx);
        CHECK(g.flat(idx) == f);
    }
}

TEST_CASE("slices collapse one axis onto the center") {
    Grid g({{0.0, 0.5, 5}, {1.0, 0.25, 3}});
    Grid s = g.slice(1);
    CHECK(s.collapsed(1));
    CHECK_FALSE(s.collapsed(2));
    CHECK(s.size() == 3);
    CHECK(s.coord(1, 0) == 0.0);  // pinned to the center
    CHECK(s.spacing(1) == 0.0);
    CHECK(s.max_spacing() == doctest::Approx(0.25));
    // slice flat indices enumerate the kept axes in the same order
    std::vector<int> idx;
    s.unflatten(2, idx);
    CHECK(idx == std::vector<int>{0, 2});
}

TEST_CASE("grid validation") {
    CHECK_THROWS(Grid({{0.0, 0.5, 4}}));   // even count
    CHECK_THROWS(Grid({{0.0, 0.0, 5}}));   // no width but multiple nodes
    CHECK_THROWS(Grid({{0.0, -1.0, 3}}));
    CHECK_NOTHROW(Grid({{0.0, 0.0, 1}}));  // collapsed axis is fine
}
