#include "foilmqs/errors.hpp"
#include "foilmqs/mesh.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace foil;

namespace {

double total_area(const Mesh& m) {
    double s = 0.0;
    for (Index t = 0; t < m.triangle_count(); ++t) {
        s += m.signed_area(t);
    }
    return s;
}

void check_edges_shared(const Mesh& m) {
    Index boundary_edges = 0;
    for (const auto& [e, count] : edge_multiplicities(m)) {
        REQUIRE((count == 1 || count == 2));
        if (count == 1) {
            ++boundary_edges;
            CHECK(m.is_boundary(e[0]));
            CHECK(m.is_boundary(e[1]));
        }
    }
    // simply connected triangulated domain: V - E + F = 1
    CHECK(m.node_count() - m.edge_count() + m.triangle_count() == 1);
    CHECK(boundary_edges > 0);
}

}  // namespace

TEST_CASE("square with h = side gives the minimal triangulation") {
    const Mesh m = generate_rectangle_mesh(1.0, 2.0, 0.0, 1.0, 1.0);
    CHECK(m.node_count() == 4);
    CHECK(m.triangle_count() == 2);
    CHECK(total_area(m) == Catch::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("refine_uniform splits into four and keeps area") {
    const Mesh m = generate_rectangle_mesh(0.5, 1.5, 0.0, 1.0, 1.0);
    const Mesh r1 = refine_uniform(m);
    CHECK(r1.triangle_count() == 8);
    CHECK(r1.node_count() == m.node_count() + m.edge_count());
    const Mesh r2 = refine_uniform(r1);
    CHECK(r2.triangle_count() == 32);
    CHECK(std::abs(total_area(r2) - total_area(m)) <= 1e-13 * total_area(m));
    check_edges_shared(r2);
    // all boundary-flagged nodes lie on the rectangle boundary
    for (Index i = 0; i < r2.node_count(); ++i) {
        const auto& p = r2.nodes()[static_cast<std::size_t>(i)];
        const bool on = p.r == 0.5 || p.r == 1.5 || p.z == 0.0 || p.z == 1.0;
        CHECK(r2.is_boundary(i) == on);
    }
}

TEST_CASE("parametric mesh region areas match the geometry") {
    const GeometrySpec g;
    for (double h : {8e-3, 3e-3, 1.6e-3}) {
        const Mesh m = generate_parametric_mesh(g, h);
        for (Region region : kAllRegions) {
            const double exact = g.region_area(region);
            CHECK(std::abs(m.region_area(region) - exact) <= 1e-12 * exact);
        }
        check_edges_shared(m);
        for (Index i = 0; i < m.node_count(); ++i) {
            const auto& p = m.nodes()[static_cast<std::size_t>(i)];
            if (p.r == 0.0 || p.r == g.outer_radius || p.z == 0.0 || p.z == g.height) {
                CHECK(m.is_boundary(i));
            }
        }
    }
}

TEST_CASE("node count is monotone in h and reaches the reference sizes") {
    const GeometrySpec g;
    Index previous = 0;
    for (double h = 20e-3; h >= 1.5e-3; h *= 0.9) {
        const Index n = generate_parametric_mesh(g, h).node_count();
        CHECK(n >= previous);
        previous = n;
    }
    const Index fine = generate_parametric_mesh(g, 1.6e-3).node_count();
    CHECK(fine >= 1200);
    CHECK(fine <= 1600);
    const Index coarse = generate_parametric_mesh(g, 8e-3).node_count();
    CHECK(coarse >= 80);
    CHECK(coarse <= 150);
}

TEST_CASE("winding has at least two layers and is deterministic") {
    const GeometrySpec g;
    const Mesh a = generate_parametric_mesh(g, 50e-3);
    const Mesh b = generate_parametric_mesh(g, 50e-3);
    CHECK(a == b);
    Index inside = 0;
    for (const auto& p : a.nodes()) {
        if (p.r > g.winding_inner_radius && p.r < g.winding_outer_radius() && p.z == g.winding_bottom()) {
            ++inside;
        }
    }
    CHECK(inside >= 1);
}

TEST_CASE("degenerate geometry is rejected") {
    GeometrySpec g;
    g.winding_thickness = 30e-3;
    CHECK_THROWS_AS(generate_parametric_mesh(g, 5e-3), DegenerateGeometry);
    GeometrySpec z;
    z.air_gap = 0.0;
    CHECK_THROWS_AS(generate_parametric_mesh(z, 5e-3), DegenerateGeometry);
    CHECK_THROWS_AS(generate_parametric_mesh(GeometrySpec{}, 0.0), DegenerateGeometry);
}

TEST_CASE("refinement preserves tag bookkeeping") {
    const Mesh m = generate_parametric_mesh(GeometrySpec{}, 8e-3);
    const Mesh r = refine_uniform(m);
    for (Region region : kAllRegions) {
        CHECK(r.region_triangle_count(region) == 4 * m.region_triangle_count(region));
        CHECK(std::abs(r.region_area(region) - m.region_area(region)) <= 1e-13 * m.region_area(region));
    }
}

TEST_CASE("mesh text round trip") {
    const Mesh small = generate_rectangle_mesh(0.0, 1.0, 0.0, 1.0, 1.0, Region::FoilWinding);
    CHECK(read_mesh(write_mesh(small)) == small);
    const Mesh fine = generate_parametric_mesh(GeometrySpec{}, 1.6e-3);
    CHECK(read_mesh(write_mesh(fine)) == fine);
    const Mesh refined = refine_uniform(generate_parametric_mesh(GeometrySpec{}, 7e-3));
    CHECK(read_mesh(write_mesh(refined)) == refined);
}

TEST_CASE("mesh parse errors carry line numbers") {
    const std::string bad = "foilmesh v1\nnodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 7 air\nboundary 0\n";
    try {
        (void)read_mesh(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 7);
    }
    CHECK_THROWS_AS(read_mesh("foilmesh v2\n"), ParseError);
    CHECK_THROWS_AS(read_mesh("foilmesh v1\nnodes 1\n0 x\n"), ParseError);
    // clockwise triangle parses but fails validation
    const std::string cw = "foilmesh v1\nnodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 2 1 air\nboundary 0\n";
    CHECK_THROWS_AS(read_mesh(cw), ValidationError);
    const std::string neg = "foilmesh v1\nnodes 3\n-1 0\n1 0\n0 1\ntriangles 1\n0 1 2 air\nboundary 0\n";
    CHECK_THROWS_AS(read_mesh(neg), ValidationError);
}

TEST_CASE("hanging node is rejected") {
    // big triangle next to two small ones sharing a split edge
    std::vector<Point> nodes{{0, 0}, {1, 0}, {1, 1}, {2, 0.5}, {1, 0.5}};
    std::vector<Triangle> tris{{{0, 1, 2}, Region::Air}, {{1, 3, 4}, Region::Air}, {{4, 3, 2}, Region::Air}};
    CHECK_THROWS_AS(Mesh(nodes, tris, std::vector<bool>(5, false)), ValidationError);
}
