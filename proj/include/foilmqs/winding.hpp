#pragma once

#include "foilmqs/assembly.hpp"
#include "foilmqs/linalg.hpp"
#include "foilmqs/mesh.hpp"

#include <string>
#include <vector>

namespace foil {

inline constexpr double kMu0 = 4e-7 * 3.14159265358979323846;

/// Foil winding data. The local frame maps alpha -> r (starting at
/// inner_radius), beta -> z, gamma -> azimuth.
struct FoilWindingSpec {
    int turns = 50;
    double fill_factor = 0.8;
    double pitch = 0.28e-3;          // b
    double height = 50e-3;           // l_beta
    double inner_radius = 12.6e-3;
    double sigma_conductor = 6e7;
    double sigma_insulator = 0.0;
    double nu_conductor = 1.0 / kMu0;
    double nu_insulator = 1.0 / kMu0;

    double conductor_width() const { return fill_factor * pitch; }   // d_c
    double radial_extent() const { return turns * pitch; }           // l_alpha
    double outer_radius() const { return inner_radius + radial_extent(); }

    /// Maps r to the normalized coordinate in [-1, 1].
    double normalized_alpha(double r) const { return 2.0 * (r - inner_radius) / radial_extent() - 1.0; }

    void validate() const;
    /// Throws ValidationError unless the geometry's winding rectangle matches this spec.
    void check_matches(const GeometrySpec& geometry) const;
};

/// Mixing rule for a stack of conductor/insulator layers normal to alpha.
RegionMaterial homogenize_materials(double fill_factor, double sigma_c, double sigma_i, double nu_c, double nu_i);
RegionMaterial homogenize_materials(const FoilWindingSpec& spec);

double skin_depth(double frequency, double mu, double sigma);

struct SkinDepthCheck {
    double skin_depth;
    double conductor_width;
    double threshold_factor;
    bool warning;   // conductor_width > skin_depth / threshold_factor
};

SkinDepthCheck check_skin_depth(const FoilWindingSpec& spec, double frequency, double threshold_factor = 5.0);

/// Default material table: yoke (sigma, mu_r), homogenized winding, air elsewhere.
MaterialSpec default_materials(const FoilWindingSpec& spec, double yoke_sigma = 10.0, double yoke_mu_r = 1000.0);

GeometrySpec geometry_for(const FoilWindingSpec& spec, GeometrySpec base = {});

enum class BasisFamily { Legendre, Hat };

std::string_view basis_family_name(BasisFamily family);
BasisFamily parse_basis_family(std::string_view name);

/// Voltage basis functions on the normalized coordinate alpha in [-1, 1].
class VoltageBasis {
public:
    VoltageBasis(BasisFamily family, int count);

    int size() const { return static_cast<int>(order_.size()); }
    BasisFamily family() const { return family_; }

    double eval(int l, double alpha) const;
    /// Exact integral over [-1, 1] of function l.
    double integral(int l) const;
    Vector integrals() const;

    /// Pulled back to (r, z) via the winding frame; zero outside [-1, 1].
    ScalarProfile profile(int l, const FoilWindingSpec& spec) const;

    /// Same functions, relabeled: new function k is old function order[k].
    VoltageBasis permuted(const std::vector<int>& order) const;
    /// Same functions, new function l is scale[l] times the old one.
    VoltageBasis scaled(const std::vector<double>& scale) const;

private:
    double raw(int family_index, double alpha) const;
    double raw_integral(int family_index) const;

    BasisFamily family_;
    int count_;
    std::vector<int> order_;
    std::vector<double> scale_;
};

/// Coefficients of zeta = e_phi / (2 pi r) on the free DoFs: 1/(2 pi) at
/// every node of a winding triangle, 0 elsewhere. Throws EmptyWinding.
Vector distribution_coefficients(const Mesh& mesh, const FieldDiscretization& disc);

/// Azimuthal line integral of the FE representation of zeta through (r, z).
double zeta_line_integral(const Mesh& mesh, const FieldDiscretization& disc, const Vector& x, double r, double z);

/// Columns M^(l) x.
DenseMatrix assemble_X(const Mesh& mesh, const FoilWindingSpec& spec, const MaterialSpec& materials,
                       const FieldDiscretization& disc, const VoltageBasis& basis, const Vector& x);

/// c_k = (N / 2) int p_k d alpha.
Vector assemble_c(const FoilWindingSpec& spec, const VoltageBasis& basis);

/// G_kl = x^T M^(k,l) x.
DenseMatrix assemble_G_original(const Mesh& mesh, const FoilWindingSpec& spec, const MaterialSpec& materials,
                                const FieldDiscretization& disc, const VoltageBasis& basis, const Vector& x);

struct ConsistentConductance {
    DenseMatrix G_e;   // symmetrized
    DenseMatrix E;     // columns e_l with M e_l = X_l, supported on the conductive DoFs
    double asymmetry;  // relative max |G_e - G_e^T| before symmetrization
};

ConsistentConductance assemble_G_consistent(const SparseMatrix& mass, const DenseMatrix& X);

/// Throws RankDeficientCoupling unless rank(X) equals its column count.
void check_coupling_rank(const DenseMatrix& X, double tol = 1e-10);

struct SolidSystem {
    SparseMatrix K;
    SparseMatrix M;
    Vector x_sol;   // M x
    double G_sol;   // x^T M x
};

SolidSystem build_solid_system(const SparseMatrix& K, const SparseMatrix& M, const Vector& x);

/// The discrete foil conductor model of one winding.
struct AssembledFoilSystem {
    int turns = 1;
    SparseMatrix K;
    SparseMatrix M;
    DenseMatrix X;
    DenseMatrix G;
    DenseMatrix G_e;
    Vector c;
    Vector x;
    DenseMatrix E;

    Index field_dofs() const { return K.rows(); }
    Index voltage_dofs() const { return X.cols(); }
    SolidSystem solid() const { return build_solid_system(K, M, x); }
};

/// Bitwise equality of every member.
bool identical(const AssembledFoilSystem& a, const AssembledFoilSystem& b);

struct FoilAssemblyOptions {
    bool check_rank = true;
    double rank_tolerance = 1e-10;
};

AssembledFoilSystem assemble_foil_system(const Mesh& mesh, const FoilWindingSpec& spec, const MaterialSpec& materials,
                                         const FieldDiscretization& disc, const VoltageBasis& basis,
                                         const FoilAssemblyOptions& options = {});

/// Turn voltages Phi(alpha_k) at the turn centres for coefficients u.
Vector per_turn_voltages(const FoilWindingSpec& spec, const VoltageBasis& basis, const Vector& u);

/// Binary container (little-endian doubles, exact round trip).
void save_foil_system(const AssembledFoilSystem& sys, const std::string& path);
AssembledFoilSystem load_foil_system(const std::string& path);

}  // namespace foil
