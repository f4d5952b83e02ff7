#include "foilmqs/errors.hpp"
#include "foilmqs/winding.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>

using namespace foil;

namespace {

constexpr DirichletPolicy kNoDirichlet{false, false};

struct Fixture {
    FoilWindingSpec spec;
    Mesh mesh;
    FieldDiscretization disc;
    MaterialSpec materials;
    Vector x;

    explicit Fixture(double h, int refinements = 0) {
        mesh = generate_parametric_mesh(geometry_for(spec), h);
        for (int k = 0; k < refinements; ++k) {
            mesh = refine_uniform(mesh);
        }
        disc = make_discretization(mesh);
        materials = default_materials(spec);
        x = distribution_coefficients(mesh, disc);
    }
};

// Gauss-Legendre on [-1, 1] by Golub-Welsch, independent of the library's rule.
void gauss(int n, Vector& nodes, Vector& weights) {
    DenseMatrix j = DenseMatrix::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        j(k, k - 1) = j(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
    }
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(j);
    nodes = es.eigenvalues();
    weights = 2.0 * es.eigenvectors().row(0).transpose().cwiseAbs2();
}

DenseMatrix dense_pinv(const DenseMatrix& a) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a);
    const double cut = 1e-13 * es.eigenvalues().cwiseAbs().maxCoeff();
    const Vector inv = es.eigenvalues().unaryExpr([cut](double l) { return std::abs(l) > cut ? 1.0 / l : 0.0; });
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

TEST_CASE("mixing rule") {
    const auto m = homogenize_materials(0.8, 6e7, 0.0, 1.0 / kMu0, 1.0 / kMu0);
    CHECK(m.sigma_alpha == 0.0);
    CHECK(m.sigma_beta == Catch::Approx(4.8e7).epsilon(1e-15));
    CHECK(m.nu_alpha == Catch::Approx(1.0 / kMu0).epsilon(1e-15));
    CHECK(m.nu_beta == Catch::Approx(1.0 / kMu0).epsilon(1e-15));
    const auto pure = homogenize_materials(1.0, 3.0, 0.0, 2.0, 5.0);
    CHECK(pure.sigma_beta == 3.0);
    CHECK(pure.nu_alpha == 2.0);
    CHECK(pure.nu_beta == 2.0);
    const auto mixed = homogenize_materials(0.5, 1.0, 1.0, 1.0, 3.0);
    CHECK(mixed.nu_alpha == 2.0);
    CHECK(mixed.nu_beta == Catch::Approx(1.5));
}

TEST_CASE("skin depth and validity check") {
    const double d = skin_depth(50.0, kMu0, 6e7);
    CHECK(d == Catch::Approx(std::sqrt(2.0 / (2 * std::numbers::pi * 50 * kMu0 * 6e7))));
    CHECK(d == Catch::Approx(9.19e-3).epsilon(1e-3));
    CHECK(skin_depth(50.0, kMu0, 4 * 6e7) == Catch::Approx(d / 2));
    const auto check = check_skin_depth(FoilWindingSpec{}, 50.0);
    CHECK(check.conductor_width == Catch::Approx(0.224e-3));
    CHECK_FALSE(check.warning);
    FoilWindingSpec thick;
    thick.pitch = 5e-3;
    thick.turns = 2;
    CHECK(check_skin_depth(thick, 50.0).warning);
}

TEST_CASE("winding parameter invariants") {
    FoilWindingSpec s;
    CHECK(s.radial_extent() == Catch::Approx(14e-3));
    CHECK_NOTHROW(s.check_matches(GeometrySpec{}));
    GeometrySpec g;
    g.winding_thickness = 13e-3;
    CHECK_THROWS_AS(s.check_matches(g), ValidationError);
    s.fill_factor = 1.2;
    CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("distribution coefficients") {
    SECTION("single element") {
        const Mesh m = generate_rectangle_mesh(0.3, 0.31, 0.0, 0.01, 0.01, Region::FoilWinding);
        const auto disc = make_discretization(m, QuadratureRule::order2(), kNoDirichlet);
        const Vector x = distribution_coefficients(m, disc);
        for (Index i = 0; i < x.size(); ++i) {
            CHECK(x(i) == 1.0 / (2.0 * std::numbers::pi));
        }
    }
    SECTION("support and unit line integral") {
        Fixture f(5e-3);
        for (Index d = 0; d < f.disc.dof_count(); ++d) {
            const Index node = f.disc.node_of_dof[static_cast<std::size_t>(d)];
            bool touches = false;
            for (const auto& t : f.mesh.triangles()) {
                if (t.region == Region::FoilWinding && (t.v[0] == node || t.v[1] == node || t.v[2] == node)) {
                    touches = true;
                }
            }
            CHECK((f.x(d) != 0.0) == touches);
        }
        for (int k = 0; k < 5; ++k) {
            const double r = f.spec.inner_radius + (k + 0.5) / 5.0 * f.spec.radial_extent();
            CHECK(std::abs(zeta_line_integral(f.mesh, f.disc, f.x, r, 0.0381 + 0.003 * k) - 1.0) <= 1e-12);
        }
    }
    SECTION("no winding") {
        const Mesh m = generate_rectangle_mesh(0.3, 0.31, 0.0, 0.01, 0.01, Region::Air);
        CHECK_THROWS_AS(distribution_coefficients(m, make_discretization(m)), EmptyWinding);
    }
}

TEST_CASE("voltage basis") {
    const VoltageBasis leg(BasisFamily::Legendre, 5);
    CHECK(leg.eval(0, 0.3) == 1.0);
    CHECK(leg.eval(1, 0.5) == 0.5);
    CHECK(leg.eval(2, 0.5) == Catch::Approx(-0.125));
    CHECK_THROWS_AS(leg.eval(5, 0.0), std::out_of_range);
    Vector nodes, weights;
    gauss(12, nodes, weights);
    for (BasisFamily fam : {BasisFamily::Legendre, BasisFamily::Hat}) {
        const VoltageBasis b(fam, 5);
        for (int l = 0; l < 5; ++l) {
            double s = 0.0;
            // hats are piecewise linear on a 4-interval grid: integrate each interval
            for (int seg = 0; seg < 4; ++seg) {
                const double a0 = -1.0 + 0.5 * seg;
                for (int q = 0; q < nodes.size(); ++q) {
                    s += 0.25 * weights(q) * b.eval(l, a0 + 0.25 * (nodes(q) + 1.0));
                }
            }
            CHECK(std::abs(s - b.integral(l)) < 1e-14);
        }
    }
    CHECK(leg.integrals()(0) == 2.0);
    // partition of unity of the hats
    const VoltageBasis hat(BasisFamily::Hat, 4);
    for (double a : {-1.0, -0.4, 0.1, 0.77, 1.0}) {
        double s = 0.0;
        for (int l = 0; l < 4; ++l) {
            s += hat.eval(l, a);
        }
        CHECK(s == Catch::Approx(1.0));
    }
}

TEST_CASE("terminal vector c") {
    const FoilWindingSpec spec;
    const Vector c = assemble_c(spec, VoltageBasis(BasisFamily::Legendre, 5));
    CHECK(c(0) == 50.0);
    CHECK(c.tail(4).norm() == 0.0);
    CHECK(assemble_c(spec, VoltageBasis(BasisFamily::Legendre, 1))(0) == 50.0);
    const Vector ch = assemble_c(spec, VoltageBasis(BasisFamily::Hat, 2));
    CHECK(ch(0) == 25.0);
    CHECK(ch(1) == 25.0);
}

TEST_CASE("coupling matrix") {
    Fixture f(8e-3);
    const auto mass = assemble_mass(f.mesh, f.materials, f.disc);
    const DenseMatrix x1 = assemble_X(f.mesh, f.spec, f.materials, f.disc, VoltageBasis(BasisFamily::Legendre, 1), f.x);
    CHECK((x1.col(0) - mass * f.x).cwiseAbs().maxCoeff() <= 1e-13 * (mass * f.x).cwiseAbs().maxCoeff());

    const DenseMatrix x5 = assemble_X(f.mesh, f.spec, f.materials, f.disc, VoltageBasis(BasisFamily::Legendre, 5), f.x);
    const Vector winding_mass_diag = assemble_region_mass(f.mesh, f.materials, f.disc, Region::FoilWinding).to_dense().diagonal();
    for (Index i = 0; i < x5.rows(); ++i) {
        if (winding_mass_diag(i) == 0.0) {
            CHECK(x5.row(i).norm() == 0.0);
        }
    }
    CHECK(rank(x5, 1e-10) == 5);

    Fixture fine(1.6e-3);
    CHECK(rank(assemble_X(fine.mesh, fine.spec, fine.materials, fine.disc, VoltageBasis(BasisFamily::Legendre, 5), fine.x),
               1e-10) == 5);

    DenseMatrix dup(3, 2);
    dup << 1, 2, 0, 0, 3, 6;
    CHECK_THROWS_AS(check_coupling_rank(dup), RankDeficientCoupling);

    // a two-triangle winding cannot carry five voltage functions
    const Mesh tiny = generate_rectangle_mesh(f.spec.inner_radius, f.spec.outer_radius(), 0.0, f.spec.height, 1.0,
                                              Region::FoilWinding);
    const auto tiny_disc = make_discretization(tiny, QuadratureRule::order2(), kNoDirichlet);
    CHECK_THROWS_AS(assemble_foil_system(tiny, f.spec, f.materials, tiny_disc, VoltageBasis(BasisFamily::Legendre, 5)),
                    RankDeficientCoupling);
}

TEST_CASE("original conductance matrix") {
    Fixture f(8e-3);
    const auto mass = assemble_mass(f.mesh, f.materials, f.disc);
    const DenseMatrix g1 = assemble_G_original(f.mesh, f.spec, f.materials, f.disc, VoltageBasis(BasisFamily::Legendre, 1), f.x);
    CHECK(g1(0, 0) == Catch::Approx(f.x.dot(mass * f.x)).epsilon(1e-14));

    const VoltageBasis basis(BasisFamily::Legendre, 4);
    const std::vector<int> perm{2, 0, 3, 1};
    const DenseMatrix g = assemble_G_original(f.mesh, f.spec, f.materials, f.disc, basis, f.x);
    const DenseMatrix gp = assemble_G_original(f.mesh, f.spec, f.materials, f.disc, basis.permuted(perm), f.x);
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            CHECK(gp(a, b) == g(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]));
        }
    }
    CHECK((g - g.transpose()).norm() == 0.0);
    CHECK(min_eigenvalue(g) > 0.0);
}

TEST_CASE("original conductance matches dense quadrature on a toy winding") {
    FoilWindingSpec spec;
    spec.turns = 4;
    spec.pitch = 1e-3;
    spec.inner_radius = 0.02;
    spec.height = 4e-3;
    const double sigma = homogenize_materials(spec).sigma_beta;
    const Mesh m = generate_rectangle_mesh(0.02, 0.024, 0.0, 4e-3, 4e-3, Region::FoilWinding);
    REQUIRE(m.triangle_count() == 2);
    const auto disc = make_discretization(m, QuadratureRule::collapsed_gauss(16), kNoDirichlet);
    const Vector x = distribution_coefficients(m, disc);
    const VoltageBasis basis(BasisFamily::Legendre, 3);
    const DenseMatrix g = assemble_G_original(m, spec, default_materials(spec), disc, basis, x);

    Vector nodes, weights;
    gauss(24, nodes, weights);
    DenseMatrix oracle = DenseMatrix::Zero(3, 3);
    for (int i = 0; i < nodes.size(); ++i) {
        const double r = 0.022 + 0.002 * nodes(i);
        for (int k = 0; k < 3; ++k) {
            for (int l = 0; l < 3; ++l) {
                // zeta = 1/(2 pi r): int sigma p_k p_l zeta^2 dV
                oracle(k, l) += 0.002 * weights(i) * 4e-3 * 2 * std::numbers::pi * r * sigma * basis.eval(k, nodes(i)) *
                                basis.eval(l, nodes(i)) / std::pow(2 * std::numbers::pi * r, 2);
            }
        }
    }
    CHECK((g - oracle).norm() <= 1e-12 * oracle.norm());
}

TEST_CASE("consistent conductance matrix") {
    SECTION("scalar toy") {
        const auto m = SparseMatrix::from_dense(DenseMatrix::Constant(1, 1, 4.0));
        const auto ge = assemble_G_consistent(m, DenseMatrix::Constant(1, 1, 3.0));
        CHECK(ge.G_e(0, 0) == Catch::Approx(9.0 / 4.0));
    }
    SECTION("solid limit and dense pseudo-inverse") {
        Fixture f(8e-3);
        const auto sys1 = assemble_foil_system(f.mesh, f.spec, f.materials, f.disc, VoltageBasis(BasisFamily::Legendre, 1));
        CHECK(std::abs(sys1.G(0, 0) - sys1.G_e(0, 0)) <= 1e-12 * sys1.G(0, 0));
        const auto solid = sys1.solid();
        CHECK(solid.G_sol == Catch::Approx(sys1.G(0, 0)).epsilon(1e-13));
        CHECK(solid.G_sol > 0.0);

        const auto sys = assemble_foil_system(f.mesh, f.spec, f.materials, f.disc, VoltageBasis(BasisFamily::Legendre, 5));
        const DenseMatrix oracle = sys.X.transpose() * dense_pinv(sys.M.to_dense()) * sys.X;
        CHECK((sys.G_e - oracle).norm() <= 1e-10 * oracle.norm());
        CHECK((sys.M * sys.E.col(2) - sys.X.col(2)).norm() <= 1e-10 * sys.X.col(2).norm());
        const auto raw = assemble_G_consistent(sys.M, sys.X);
        CHECK(raw.asymmetry < 1e-10);
        CHECK(min_eigenvalue(sys.G_e) >= -1e-10 * sys.G_e.norm());
    }
}

TEST_CASE("conductance difference is a Gram matrix that shrinks under refinement") {
    Fixture coarse(8e-3);
    const VoltageBasis basis(BasisFamily::Legendre, 5);
    Mesh m = coarse.mesh;
    double previous = INFINITY;
    for (int level = 0; level < 3; ++level) {
        const auto disc = make_discretization(m);
        const auto sys = assemble_foil_system(m, coarse.spec, coarse.materials, disc, basis);
        const DenseMatrix d = sys.G - sys.G_e;
        CHECK(min_eigenvalue(d) >= -1e-10 * sys.G.norm());
        CHECK(d.norm() <= previous);
        previous = d.norm();
        m = refine_uniform(m);
    }
    Fixture fine(1.6e-3);
    const auto sc = assemble_foil_system(coarse.mesh, coarse.spec, coarse.materials, coarse.disc, basis);
    const auto sf = assemble_foil_system(fine.mesh, fine.spec, fine.materials, fine.disc, basis);
    CHECK((sf.G - sf.G_e).norm() / sf.G.norm() < (sc.G - sc.G_e).norm() / sc.G.norm());
}

TEST_CASE("solid system is linear in sigma") {
    Fixture f(8e-3);
    const auto k = assemble_stiffness(f.mesh, f.materials, f.disc);
    const auto a = build_solid_system(k, assemble_mass(f.mesh, f.materials, f.disc), f.x);
    const auto b = build_solid_system(k, assemble_mass(f.mesh, f.materials.scaled(2.0, 1.0), f.disc), f.x);
    CHECK(b.G_sol == Catch::Approx(2.0 * a.G_sol).epsilon(1e-14));
}

TEST_CASE("basis scaling rescales the blocks consistently") {
    Fixture f(8e-3);
    const VoltageBasis basis(BasisFamily::Legendre, 3);
    const auto s1 = assemble_foil_system(f.mesh, f.spec, f.materials, f.disc, basis);
    const auto s2 = assemble_foil_system(f.mesh, f.spec, f.materials, f.disc, basis.scaled({2.0, 2.0, 2.0}));
    CHECK((s2.X - 2.0 * s1.X).norm() <= 1e-14 * s1.X.norm());
    CHECK((s2.G - 4.0 * s1.G).norm() <= 1e-14 * s1.G.norm());
    CHECK((s2.c - 2.0 * s1.c).norm() == 0.0);
}

TEST_CASE("per-turn voltages") {
    const FoilWindingSpec spec;
    const VoltageBasis basis(BasisFamily::Legendre, 3);
    Vector u(3);
    u << 0.2, 0.1, 0.0;
    const Vector v = per_turn_voltages(spec, basis, u);
    REQUIRE(v.size() == 50);
    // midpoint sum is exact for linear voltage profiles
    CHECK(v.sum() == Catch::Approx(assemble_c(spec, basis).dot(u)));
    CHECK(v(49) > v(0));
}

TEST_CASE("foil system file round trip") {
    Fixture f(8e-3);
    const auto sys = assemble_foil_system(f.mesh, f.spec, f.materials, f.disc, VoltageBasis(BasisFamily::Legendre, 5));
    const std::string path = "winding_roundtrip.foilsys";
    save_foil_system(sys, path);
    CHECK(identical(load_foil_system(path), sys));
    std::FILE* bad = std::fopen(path.c_str(), "wb");
    std::fputs("NOTAFILE", bad);
    std::fclose(bad);
    CHECK_THROWS_AS(load_foil_system(path), ValidationError);
    std::remove(path.c_str());
}
