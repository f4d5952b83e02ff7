#pragma once

// Axisymmetric P1 assembly. The unknown is psi = r * A_phi, so the test
// functions are w_i = (N_i / r) e_phi and
//
//   K_ij = 2 pi  int (1/r) (nu_beta dN_i/dr dN_j/dr + nu_alpha dN_i/dz dN_j/dz) dr dz
//   M_ij = 2 pi  int sigma N_i N_j / r dr dz
//
// with alpha <-> r, beta <-> z, gamma <-> phi.

#include "foilmqs/linalg.hpp"
#include "foilmqs/mesh.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace foil {

struct RegionMaterial {
    double sigma_alpha = 0.0;
    double sigma_beta = 0.0;   // conductivity seen by azimuthal currents
    double nu_alpha = 0.0;
    double nu_beta = 0.0;

    static RegionMaterial isotropic(double sigma, double nu) { return {sigma, sigma, nu, nu}; }
    bool is_isotropic() const { return sigma_alpha == sigma_beta && nu_alpha == nu_beta; }
};

class MaterialSpec {
public:
    MaterialSpec();

    void set(Region region, const RegionMaterial& material);
    const RegionMaterial& get(Region region) const { return table_[static_cast<std::size_t>(region)]; }

    /// Returns a copy with every conductivity/reluctivity multiplied.
    MaterialSpec scaled(double sigma_factor, double nu_factor) const;

    /// Throws ValidationError unless sigma >= 0 and nu > 0 everywhere.
    void validate() const;

private:
    std::array<RegionMaterial, 4> table_;
};

/// Triangle quadrature in barycentric coordinates; weights sum to 1 and are
/// multiplied by the element area.
struct QuadratureRule {
    std::string id;
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;

    /// Three interior points, exact for quadratics.
    static QuadratureRule order2();
    /// Collapsed (Duffy) n x n Gauss-Legendre rule.
    static QuadratureRule collapsed_gauss(int n);
    static QuadratureRule by_id(const std::string& id);
};

struct DirichletPolicy {
    bool outer_boundary = true;
    bool symmetry_axis = true;
};

struct FieldDiscretization {
    std::vector<Index> dof_of_node;   // -1 for Dirichlet nodes
    std::vector<Index> node_of_dof;
    QuadratureRule rule;

    Index dof_count() const { return static_cast<Index>(node_of_dof.size()); }
};

FieldDiscretization make_discretization(const Mesh& mesh, QuadratureRule rule = QuadratureRule::order2(),
                                        DirichletPolicy policy = {});

/// Scalar weight p(r, z) used by the modified mass matrices.
using ScalarProfile = std::function<double(double r, double z)>;

SparseMatrix assemble_stiffness(const Mesh& mesh, const MaterialSpec& materials, const FieldDiscretization& disc);

/// Mass matrix over all regions.
SparseMatrix assemble_mass(const Mesh& mesh, const MaterialSpec& materials, const FieldDiscretization& disc);

/// Mass matrix with the integral restricted to one region.
SparseMatrix assemble_region_mass(const Mesh& mesh, const MaterialSpec& materials, const FieldDiscretization& disc,
                                  Region region);

/// int sigma p w_j . w_i over the foil winding region.
SparseMatrix assemble_modified_mass(const Mesh& mesh, const MaterialSpec& materials, const FieldDiscretization& disc,
                                    const ScalarProfile& p);

/// int sigma p_k p_l w_j . w_i over the foil winding region.
SparseMatrix assemble_double_modified_mass(const Mesh& mesh, const MaterialSpec& materials,
                                           const FieldDiscretization& disc, const ScalarProfile& pk,
                                           const ScalarProfile& pl);

/// Element-level reference used by tests: the 3x3 local matrix
/// 2 pi int_T sigma p N_a N_b / r for triangle t with the given rule.
std::array<std::array<double, 3>, 3> local_weighted_mass(const Mesh& mesh, Index triangle, double sigma,
                                                         const ScalarProfile& p, const QuadratureRule& rule);

/// Embeds a free-DoF vector into a per-node vector (Dirichlet nodes get 0).
Vector expand_to_nodes(const FieldDiscretization& disc, const Vector& dofs, Index node_count);

}  // namespace foil
