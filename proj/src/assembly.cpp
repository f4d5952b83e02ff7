#include "foilmqs/assembly.hpp"

#include "foilmqs/errors.hpp"

#include <cmath>
#include <numbers>

namespace foil {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct ElementGeometry {
    std::array<Point, 3> p;
    double area;
    std::array<double, 3> dr;   // dN_a/dr
    std::array<double, 3> dz;   // dN_a/dz
};

ElementGeometry element(const Mesh& mesh, const Triangle& t) {
    ElementGeometry g;
    for (std::size_t a = 0; a < 3; ++a) {
        g.p[a] = mesh.nodes()[static_cast<std::size_t>(t.v[a])];
    }
    const double det = (g.p[1].r - g.p[0].r) * (g.p[2].z - g.p[0].z) - (g.p[2].r - g.p[0].r) * (g.p[1].z - g.p[0].z);
    g.area = 0.5 * det;
    for (std::size_t a = 0; a < 3; ++a) {
        const auto& pb = g.p[(a + 1) % 3];
        const auto& pc = g.p[(a + 2) % 3];
        g.dr[a] = (pb.z - pc.z) / det;
        g.dz[a] = (pc.r - pb.r) / det;
    }
    return g;
}

Point at(const ElementGeometry& g, const std::array<double, 3>& b) {
    return {b[0] * g.p[0].r + b[1] * g.p[1].r + b[2] * g.p[2].r, b[0] * g.p[0].z + b[1] * g.p[1].z + b[2] * g.p[2].z};
}

using Local = std::array<std::array<double, 3>, 3>;

Local weighted_mass(const ElementGeometry& g, double sigma, const ScalarProfile* p, const QuadratureRule& rule) {
    Local m{};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const auto& b = rule.points[q];
        const Point x = at(g, b);
        double w = kTwoPi * sigma * rule.weights[q] * g.area / x.r;
        if (p != nullptr) {
            w *= (*p)(x.r, x.z);
        }
        for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t c = 0; c < 3; ++c) {
                m[a][c] += w * b[a] * b[c];
            }
        }
    }
    return m;
}

void scatter(const FieldDiscretization& disc, const Triangle& t, const Local& m, std::vector<Triplet>& out) {
    for (std::size_t a = 0; a < 3; ++a) {
        const Index i = disc.dof_of_node[static_cast<std::size_t>(t.v[a])];
        if (i < 0) {
            continue;
        }
        for (std::size_t c = 0; c < 3; ++c) {
            const Index j = disc.dof_of_node[static_cast<std::size_t>(t.v[c])];
            if (j >= 0 && m[a][c] != 0.0) {
                out.push_back({i, j, m[a][c]});
            }
        }
    }
}

/// Local matrices are symmetrized before scattering so the global matrix is
/// symmetric bit for bit.
Local symmetric(Local m) {
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t c = a + 1; c < 3; ++c) {
            const double s = 0.5 * (m[a][c] + m[c][a]);
            m[a][c] = s;
            m[c][a] = s;
        }
    }
    return m;
}

template <typename Filter>
SparseMatrix mass_like(const Mesh& mesh, const MaterialSpec& materials, const FieldDiscretization& disc,
                       const ScalarProfile* p, Filter keep) {
    std::vector<Triplet> trip;
    for (const auto& t : mesh.triangles()) {
        if (!keep(t.region)) {
            continue;
        }
        const double sigma = materials.get(t.region).sigma_beta;
        if (sigma == 0.0) {
            continue;
        }
        scatter(disc, t, symmetric(weighted_mass(element(mesh, t), sigma, p, disc.rule)), trip);
    }
    return SparseMatrix::from_triplets(disc.dof_count(), disc.dof_count(), trip);
}

std::vector<double> gauss_legendre_nodes(int n, std::vector<double>& weights) {
    std::vector<double> x(static_cast<std::size_t>(n));
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            if (n == 1) {
                p0 = 1.0;
                p1 = z;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        x[static_cast<std::size_t>(i)] = z;
        weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return x;
}

}  // namespace

MaterialSpec::MaterialSpec() {
    constexpr double nu0 = 1.0 / (4e-7 * std::numbers::pi);
    table_.fill(RegionMaterial::isotropic(0.0, nu0));
}

void MaterialSpec::set(Region region, const RegionMaterial& material) { table_[static_cast<std::size_t>(region)] = material; }

MaterialSpec MaterialSpec::scaled(double sigma_factor, double nu_factor) const {
    MaterialSpec out = *this;
    for (auto& m : out.table_) {
        m.sigma_alpha *= sigma_factor;
        m.sigma_beta *= sigma_factor;
        m.nu_alpha *= nu_factor;
        m.nu_beta *= nu_factor;
    }
    return out;
}

void MaterialSpec::validate() const {
    for (Region r : kAllRegions) {
        const auto& m = get(r);
        if (!(m.sigma_alpha >= 0.0) || !(m.sigma_beta >= 0.0)) {
            throw ValidationError("negative conductivity in region " + std::string(region_name(r)));
        }
        if (!(m.nu_alpha > 0.0) || !(m.nu_beta > 0.0) || !std::isfinite(m.nu_alpha) || !std::isfinite(m.nu_beta)) {
            throw ValidationError("reluctivity must be positive in region " + std::string(region_name(r)));
        }
    }
}

QuadratureRule QuadratureRule::order2() {
    constexpr double a = 2.0 / 3.0, b = 1.0 / 6.0, w = 1.0 / 3.0;
    return {"order2", {{a, b, b}, {b, a, b}, {b, b, a}}, {w, w, w}};
}

QuadratureRule QuadratureRule::collapsed_gauss(int n) {
    if (n < 1) {
        throw ValidationError("quadrature order must be positive");
    }
    std::vector<double> w1;
    const auto x1 = gauss_legendre_nodes(n, w1);
    QuadratureRule rule{"gauss" + std::to_string(n), {}, {}};
    for (int i = 0; i < n; ++i) {
        const double u = 0.5 * (x1[static_cast<std::size_t>(i)] + 1.0);
        for (int j = 0; j < n; ++j) {
            const double v = 0.5 * (x1[static_cast<std::size_t>(j)] + 1.0);
            const double l1 = u;
            const double l2 = v * (1.0 - u);
            rule.points.push_back({1.0 - l1 - l2, l1, l2});
            // reference triangle area 1/2: weight = (1/4) w_i w_j (1-u) / (1/2)
            rule.weights.push_back(0.5 * w1[static_cast<std::size_t>(i)] * w1[static_cast<std::size_t>(j)] * (1.0 - u));
        }
    }
    return rule;
}

QuadratureRule QuadratureRule::by_id(const std::string& id) {
    if (id == "order2") {
        return order2();
    }
    if (id.rfind("gauss", 0) == 0 && id.size() > 5) {
        return collapsed_gauss(std::stoi(id.substr(5)));
    }
    throw ValidationError("unknown quadrature rule '" + id + "'");
}

FieldDiscretization make_discretization(const Mesh& mesh, QuadratureRule rule, DirichletPolicy policy) {
    FieldDiscretization disc;
    disc.rule = std::move(rule);
    disc.dof_of_node.assign(static_cast<std::size_t>(mesh.node_count()), -1);
    for (Index i = 0; i < mesh.node_count(); ++i) {
        const bool fixed = (policy.outer_boundary && mesh.is_boundary(i)) ||
                           (policy.symmetry_axis && mesh.nodes()[static_cast<std::size_t>(i)].r == 0.0);
        if (!fixed) {
            disc.dof_of_node[static_cast<std::size_t>(i)] = disc.dof_count();
            disc.node_of_dof.push_back(i);
        }
    }
    return disc;
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const MaterialSpec& materials, const FieldDiscretization& disc) {
    std::vector<Triplet> trip;
    for (const auto& t : mesh.triangles()) {
        const auto g = element(mesh, t);
        const auto& mat = materials.get(t.region);
        double inv_r = 0.0;
        for (std::size_t q = 0; q < disc.rule.points.size(); ++q) {
            inv_r += disc.rule.weights[q] / at(g, disc.rule.points[q]).r;
        }
        const double scale = kTwoPi * g.area * inv_r;
        Local k{};
        for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t c = a; c < 3; ++c) {
                const double v = scale * (mat.nu_beta * g.dr[a] * g.dr[c] + mat.nu_alpha * g.dz[a] * g.dz[c]);
                k[a][c] = v;
                k[c][a] = v;
            }
        }
        scatter(disc, t, k, trip);
    }
    return SparseMatrix::from_triplets(disc.dof_count(), disc.dof_count(), trip);
}

SparseMatrix assemble_mass(const Mesh& mesh, const MaterialSpec& materials, const FieldDiscretization& disc) {
    return mass_like(mesh, materials, disc, nullptr, [](Region) { return true; });
}

SparseMatrix assemble_region_mass(const Mesh& mesh, const MaterialSpec& materials, const FieldDiscretization& disc,
                                  Region region) {
    return mass_like(mesh, materials, disc, nullptr, [region](Region r) { return r == region; });
}

SparseMatrix assemble_modified_mass(const Mesh& mesh, const MaterialSpec& materials, const FieldDiscretization& disc,
                                    const ScalarProfile& p) {
    return mass_like(mesh, materials, disc, &p, [](Region r) { return r == Region::FoilWinding; });
}

SparseMatrix assemble_double_modified_mass(const Mesh& mesh, const MaterialSpec& materials,
                                           const FieldDiscretization& disc, const ScalarProfile& pk,
                                           const ScalarProfile& pl) {
    const ScalarProfile product = [&](double r, double z) { return pk(r, z) * pl(r, z); };
    return mass_like(mesh, materials, disc, &product, [](Region r) { return r == Region::FoilWinding; });
}

std::array<std::array<double, 3>, 3> local_weighted_mass(const Mesh& mesh, Index triangle, double sigma,
                                                         const ScalarProfile& p, const QuadratureRule& rule) {
    return weighted_mass(element(mesh, mesh.triangles()[static_cast<std::size_t>(triangle)]), sigma, &p, rule);
}

Vector expand_to_nodes(const FieldDiscretization& disc, const Vector& dofs, Index node_count) {
    Vector out = Vector::Zero(node_count);
    for (Index d = 0; d < disc.dof_count(); ++d) {
        out(disc.node_of_dof[static_cast<std::size_t>(d)]) = dofs(d);
    }
    return out;
}

}  // namespace foil
