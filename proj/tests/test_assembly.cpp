#include "foilmqs/assembly.hpp"
#include "foilmqs/errors.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace foil;

namespace {

constexpr DirichletPolicy kNoDirichlet{false, false};

MaterialSpec uniform(double sigma, double nu) {
    MaterialSpec m;
    for (Region r : kAllRegions) {
        m.set(r, RegionMaterial::isotropic(sigma, nu));
    }
    return m;
}

MaterialSpec table_like() {
    constexpr double nu0 = 1.0 / (4e-7 * std::numbers::pi);
    MaterialSpec m;
    m.set(Region::Yoke, RegionMaterial::isotropic(10.0, nu0 / 1000.0));
    m.set(Region::FoilWinding, {0.0, 4.8e7, nu0, nu0});
    return m;
}

}  // namespace

TEST_CASE("stiffness approaches the planar P1 Laplacian far from the axis") {
    const double r0 = 1e5;
    const Mesh m = generate_rectangle_mesh(r0, r0 + 1.0, 0.0, 1.0, 1.0);
    const auto disc = make_discretization(m, QuadratureRule::order2(), kNoDirichlet);
    const double nu = 3.0;
    const DenseMatrix k = assemble_stiffness(m, uniform(0.0, nu), disc).to_dense();
    DenseMatrix hand(4, 4);
    hand << 1.0, -0.5, -0.5, 0.0,  //
        -0.5, 1.0, 0.0, -0.5,      //
        -0.5, 0.0, 1.0, -0.5,      //
        0.0, -0.5, -0.5, 1.0;
    hand *= 2.0 * std::numbers::pi * nu / (r0 + 0.5);
    CHECK((k - hand).norm() <= 1e-3 * hand.norm());
}

TEST_CASE("stiffness is linear in nu and isotropic when nu_alpha = nu_beta") {
    const Mesh m = generate_parametric_mesh(GeometrySpec{}, 8e-3);
    const auto disc = make_discretization(m);
    const auto base = table_like();
    const auto k1 = assemble_stiffness(m, base, disc);
    const auto k2 = assemble_stiffness(m, base.scaled(1.0, 2.0), disc);
    CHECK(k2 == k1.scaled(2.0));

    MaterialSpec iso = uniform(0.0, 5.0);
    MaterialSpec aniso = iso;
    aniso.set(Region::Air, {0.0, 0.0, 5.0, 5.0});
    CHECK(assemble_stiffness(m, iso, disc) == assemble_stiffness(m, aniso, disc));
}

TEST_CASE("mass vanishes without conductivity") {
    const Mesh m = generate_parametric_mesh(GeometrySpec{}, 8e-3);
    CHECK(assemble_mass(m, uniform(0.0, 1.0), make_discretization(m)).nnz() == 0);
}

TEST_CASE("mass reproduces sigma times volume for A_phi = 1") {
    // psi = r * A_phi, so A_phi = 1 is interpolated exactly by psi_i = r_i.
    const double sigma = 7.0;
    const Mesh m = refine_uniform(generate_rectangle_mesh(0.2, 0.5, 0.1, 0.4, 0.1));
    const auto disc = make_discretization(m, QuadratureRule::order2(), kNoDirichlet);
    const auto mass = assemble_mass(m, uniform(sigma, 1.0), disc);
    Vector r(m.node_count());
    for (Index i = 0; i < m.node_count(); ++i) {
        r(i) = m.nodes()[static_cast<std::size_t>(i)].r;
    }
    const double volume = std::numbers::pi * (0.5 * 0.5 - 0.2 * 0.2) * 0.3;
    CHECK(std::abs(r.dot(mass * r) - sigma * volume) <= 1e-12 * sigma * volume);

    // plain partition of unity: sum M_ij = 2 pi sigma int dA / r
    const Vector ones = Vector::Ones(m.node_count());
    const double exact = 2.0 * std::numbers::pi * sigma * 0.3 * std::log(0.5 / 0.2);
    CHECK(std::abs(ones.dot(mass * ones) - exact) <= 1e-3 * exact);
}

TEST_CASE("winding-only conductivity confines mass to the winding support") {
    const Mesh m = generate_parametric_mesh(GeometrySpec{}, 5e-3);
    const auto disc = make_discretization(m);
    const auto mass = assemble_mass(m, table_like().scaled(1.0, 1.0), disc);
    MaterialSpec only_winding;
    only_winding.set(Region::FoilWinding, {0.0, 1.0, 1.0, 1.0});
    const auto mw = assemble_mass(m, only_winding, disc);
    std::vector<char> in_winding(static_cast<std::size_t>(m.node_count()), 0);
    for (const auto& t : m.triangles()) {
        if (t.region == Region::FoilWinding) {
            for (Index v : t.v) {
                in_winding[static_cast<std::size_t>(v)] = 1;
            }
        }
    }
    const auto offs = mw.row_offsets();
    for (Index d = 0; d < disc.dof_count(); ++d) {
        const bool has_entries = offs[static_cast<std::size_t>(d + 1)] > offs[static_cast<std::size_t>(d)];
        CHECK(has_entries == static_cast<bool>(in_winding[static_cast<std::size_t>(disc.node_of_dof[static_cast<std::size_t>(d)])]));
    }
    CHECK(mass.nnz() > mw.nnz());
}

TEST_CASE("modified mass reductions") {
    const Mesh m = generate_parametric_mesh(GeometrySpec{}, 5e-3);
    const auto disc = make_discretization(m);
    const auto mat = table_like();
    const auto one = [](double, double) { return 1.0; };
    const auto zero = [](double, double) { return 0.0; };
    CHECK(assemble_modified_mass(m, mat, disc, one) == assemble_region_mass(m, mat, disc, Region::FoilWinding));
    CHECK(assemble_modified_mass(m, mat, disc, zero).nnz() == 0);
    CHECK(assemble_double_modified_mass(m, mat, disc, one, one) == assemble_region_mass(m, mat, disc, Region::FoilWinding));

    const GeometrySpec g;
    const auto pk = [&](double r, double) { return 2.0 * (r - g.winding_inner_radius) / g.winding_thickness - 1.0; };
    const auto pl = [&](double r, double z) { return 0.5 * (3.0 * pk(r, z) * pk(r, z) - 1.0); };
    const auto a = assemble_double_modified_mass(m, mat, disc, pk, pl);
    const auto b = assemble_double_modified_mass(m, mat, disc, pl, pk);
    CHECK(a == b);
    CHECK(a.symmetry_defect() == 0.0);
}

TEST_CASE("modified mass agrees with a doubled quadrature order") {
    const GeometrySpec g;
    const Mesh m = generate_parametric_mesh(g, 5e-3);
    const auto mat = table_like();
    const auto p = [&](double r, double) { return 2.0 * (r - g.winding_inner_radius) / g.winding_thickness - 1.0; };
    const auto d8 = make_discretization(m, QuadratureRule::collapsed_gauss(8));
    const auto d16 = make_discretization(m, QuadratureRule::collapsed_gauss(16));
    const auto m8 = assemble_modified_mass(m, mat, d8, p).to_dense();
    const auto m16 = assemble_modified_mass(m, mat, d16, p).to_dense();
    CHECK((m8 - m16).norm() <= 1e-10 * m16.norm());
    const auto q8 = assemble_double_modified_mass(m, mat, d8, p, p).to_dense();
    const auto q16 = assemble_double_modified_mass(m, mat, d16, p, p).to_dense();
    CHECK((q8 - q16).norm() <= 1e-10 * q16.norm());
}

TEST_CASE("quadrature rules integrate polynomials") {
    for (const auto& rule : {QuadratureRule::order2(), QuadratureRule::collapsed_gauss(4)}) {
        double w = 0.0, x2 = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            w += rule.weights[q];
            x2 += rule.weights[q] * rule.points[q][1] * rule.points[q][1];
        }
        CHECK(w == Catch::Approx(1.0).epsilon(1e-14));
        CHECK(x2 == Catch::Approx(1.0 / 6.0).epsilon(1e-14));   // 2 * int l^2 = 2/12
    }
    CHECK(QuadratureRule::by_id("gauss5").points.size() == 25);
    CHECK_THROWS_AS(QuadratureRule::by_id("simpson"), ValidationError);
}

TEST_CASE("symmetry, semidefiniteness and pencil regularity") {
    const Mesh m = generate_parametric_mesh(GeometrySpec{}, 5e-3);
    const auto disc = make_discretization(m);
    const auto mat = table_like();
    const auto k = assemble_stiffness(m, mat, disc);
    const auto mass = assemble_mass(m, mat, disc);
    CHECK(k.symmetry_defect() == 0.0);
    CHECK(mass.symmetry_defect() == 0.0);
    std::mt19937 gen(1234);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 100; ++trial) {
        Vector x(disc.dof_count());
        for (Index i = 0; i < x.size(); ++i) {
            x(i) = n01(gen);
        }
        CHECK(x.dot(k * x) >= 0.0);
        CHECK(x.dot(mass * x) >= 0.0);
    }
    FactorizeOptions spd;
    spd.symmetric_positive_definite = true;
    CHECK_NOTHROW(sparse_factorize(k, spd));
    CHECK_NOTHROW(sparse_factorize(add(mass, 1.0, k, 1.0)));
    // without Dirichlet nodes psi = const lies in the kernel
    const auto free_disc = make_discretization(m, QuadratureRule::order2(), kNoDirichlet);
    CHECK_THROWS_AS(sparse_factorize(assemble_stiffness(m, mat, free_disc), spd), SingularMatrix);
}

TEST_CASE("interpolated field energy converges under refinement") {
    Mesh m = generate_rectangle_mesh(0.0, 1.0, 0.0, 1.0, 0.5);
    const auto mat = uniform(0.0, 1.0);
    std::vector<double> energy;
    for (int level = 0; level < 5; ++level) {
        const auto disc = make_discretization(m, QuadratureRule::order2(), kNoDirichlet);
        Vector psi(m.node_count());
        for (Index i = 0; i < m.node_count(); ++i) {
            const auto& p = m.nodes()[static_cast<std::size_t>(i)];
            psi(i) = p.r * p.r * std::sin(2.0 * p.z);
        }
        energy.push_back(psi.dot(assemble_stiffness(m, mat, disc) * psi));
        m = refine_uniform(m);
    }
    for (std::size_t k = 2; k < energy.size(); ++k) {
        CHECK(std::abs(energy[k] - energy[k - 1]) < std::abs(energy[k - 1] - energy[k - 2]));
    }
}
