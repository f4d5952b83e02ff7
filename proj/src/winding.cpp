#include "foilmqs/winding.hpp"

#include "foilmqs/errors.hpp"

#include <cmath>
#include <numbers>

namespace foil {

void FoilWindingSpec::validate() const {
    if (turns < 1) {
        throw ValidationError("winding needs at least one turn");
    }
    if (!(fill_factor > 0.0 && fill_factor <= 1.0)) {
        throw ValidationError("fill factor must lie in (0, 1]");
    }
    if (!(pitch > 0.0) || !(height > 0.0) || !(inner_radius > 0.0)) {
        throw ValidationError("foil pitch, height and inner radius must be positive");
    }
    if (!(sigma_conductor > 0.0) || !(sigma_insulator >= 0.0)) {
        throw ValidationError("invalid foil conductivities");
    }
    if (!(nu_conductor > 0.0) || !(nu_insulator > 0.0)) {
        throw ValidationError("reluctivities must be positive");
    }
}

void FoilWindingSpec::check_matches(const GeometrySpec& g) const {
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); };
    if (!close(g.winding_thickness, radial_extent())) {
        throw ValidationError("geometry winding thickness differs from N * b");
    }
    if (!close(g.winding_inner_radius, inner_radius) || !close(g.winding_height, height)) {
        throw ValidationError("geometry winding rectangle differs from the winding spec");
    }
}

RegionMaterial homogenize_materials(double lambda, double sigma_c, double sigma_i, double nu_c, double nu_i) {
    RegionMaterial m;
    m.sigma_alpha = 0.0;
    m.sigma_beta = lambda * sigma_c + (1.0 - lambda) * sigma_i;
    m.nu_alpha = lambda * nu_c + (1.0 - lambda) * nu_i;
    m.nu_beta = 1.0 / (lambda / nu_c + (1.0 - lambda) / nu_i);
    return m;
}

RegionMaterial homogenize_materials(const FoilWindingSpec& spec) {
    return homogenize_materials(spec.fill_factor, spec.sigma_conductor, spec.sigma_insulator, spec.nu_conductor,
                                spec.nu_insulator);
}

double skin_depth(double frequency, double mu, double sigma) {
    if (!(frequency > 0.0) || !(mu > 0.0) || !(sigma > 0.0)) {
        throw ValidationError("skin depth needs positive frequency, permeability and conductivity");
    }
    const double omega = 2.0 * std::numbers::pi * frequency;
    return std::sqrt(2.0 / (omega * mu * sigma));
}

SkinDepthCheck check_skin_depth(const FoilWindingSpec& spec, double frequency, double threshold_factor) {
    const double delta = skin_depth(frequency, 1.0 / spec.nu_conductor, spec.sigma_conductor);
    return {delta, spec.conductor_width(), threshold_factor, spec.conductor_width() > delta / threshold_factor};
}

MaterialSpec default_materials(const FoilWindingSpec& spec, double yoke_sigma, double yoke_mu_r) {
    MaterialSpec m;
    m.set(Region::Yoke, RegionMaterial::isotropic(yoke_sigma, 1.0 / (kMu0 * yoke_mu_r)));
    m.set(Region::FoilWinding, homogenize_materials(spec));
    return m;
}

GeometrySpec geometry_for(const FoilWindingSpec& spec, GeometrySpec base) {
    base.winding_inner_radius = spec.inner_radius;
    base.winding_thickness = spec.radial_extent();
    base.winding_height = spec.height;
    return base;
}

std::string_view basis_family_name(BasisFamily family) {
    return family == BasisFamily::Legendre ? "legendre" : "hat";
}

BasisFamily parse_basis_family(std::string_view name) {
    if (name == "legendre") {
        return BasisFamily::Legendre;
    }
    if (name == "hat") {
        return BasisFamily::Hat;
    }
    throw ValidationError("unknown voltage basis family '" + std::string(name) + "'");
}

VoltageBasis::VoltageBasis(BasisFamily family, int count) : family_(family), count_(count) {
    if (count < 1) {
        throw ValidationError("voltage basis needs at least one function");
    }
    for (int l = 0; l < count; ++l) {
        order_.push_back(l);
        scale_.push_back(1.0);
    }
}

double VoltageBasis::raw(int k, double alpha) const {
    if (family_ == BasisFamily::Legendre) {
        double p0 = 1.0, p1 = alpha;
        if (k == 0) {
            return p0;
        }
        for (int n = 2; n <= k; ++n) {
            const double pn = ((2.0 * n - 1.0) * alpha * p1 - (n - 1.0) * p0) / n;
            p0 = p1;
            p1 = pn;
        }
        return p1;
    }
    if (count_ == 1) {
        return 1.0;
    }
    const double h = 2.0 / (count_ - 1);
    const double node = -1.0 + k * h;
    return std::max(0.0, 1.0 - std::abs(alpha - node) / h);
}

double VoltageBasis::raw_integral(int k) const {
    if (family_ == BasisFamily::Legendre) {
        return k == 0 ? 2.0 : 0.0;
    }
    if (count_ == 1) {
        return 2.0;
    }
    const double h = 2.0 / (count_ - 1);
    return (k == 0 || k == count_ - 1) ? 0.5 * h : h;
}

double VoltageBasis::eval(int l, double alpha) const {
    if (l < 0 || l >= size()) {
        throw std::out_of_range("voltage basis index out of range");
    }
    return scale_[static_cast<std::size_t>(l)] * raw(order_[static_cast<std::size_t>(l)], alpha);
}

double VoltageBasis::integral(int l) const {
    if (l < 0 || l >= size()) {
        throw std::out_of_range("voltage basis index out of range");
    }
    return scale_[static_cast<std::size_t>(l)] * raw_integral(order_[static_cast<std::size_t>(l)]);
}

Vector VoltageBasis::integrals() const {
    Vector out(size());
    for (int l = 0; l < size(); ++l) {
        out(l) = integral(l);
    }
    return out;
}

ScalarProfile VoltageBasis::profile(int l, const FoilWindingSpec& spec) const {
    if (l < 0 || l >= size()) {
        throw std::out_of_range("voltage basis index out of range");
    }
    return [basis = *this, l, spec](double r, double) {
        const double a = spec.normalized_alpha(r);
        if (a < -1.0 - 1e-12 || a > 1.0 + 1e-12) {
            return 0.0;
        }
        return basis.eval(l, a);
    };
}

VoltageBasis VoltageBasis::permuted(const std::vector<int>& order) const {
    if (static_cast<int>(order.size()) != size()) {
        throw ValidationError("permutation size mismatch");
    }
    VoltageBasis out = *this;
    for (std::size_t k = 0; k < order.size(); ++k) {
        out.order_[k] = order_[static_cast<std::size_t>(order[k])];
        out.scale_[k] = scale_[static_cast<std::size_t>(order[k])];
    }
    return out;
}

VoltageBasis VoltageBasis::scaled(const std::vector<double>& scale) const {
    if (static_cast<int>(scale.size()) != size()) {
        throw ValidationError("scale vector size mismatch");
    }
    VoltageBasis out = *this;
    for (std::size_t k = 0; k < scale.size(); ++k) {
        out.scale_[k] *= scale[k];
    }
    return out;
}

Vector distribution_coefficients(const Mesh& mesh, const FieldDiscretization& disc) {
    Vector x = Vector::Zero(disc.dof_count());
    bool any = false;
    for (const auto& t : mesh.triangles()) {
        if (t.region != Region::FoilWinding) {
            continue;
        }
        any = true;
        for (Index v : t.v) {
            const Index d = disc.dof_of_node[static_cast<std::size_t>(v)];
            if (d >= 0) {
                x(d) = 1.0 / (2.0 * std::numbers::pi);
            }
        }
    }
    if (!any) {
        throw EmptyWinding("mesh has no foil winding elements");
    }
    return x;
}

double zeta_line_integral(const Mesh& mesh, const FieldDiscretization& disc, const Vector& x, double r, double z) {
    const Vector nodal = expand_to_nodes(disc, x, mesh.node_count());
    for (const auto& t : mesh.triangles()) {
        if (t.region != Region::FoilWinding) {
            continue;
        }
        const auto& a = mesh.nodes()[static_cast<std::size_t>(t.v[0])];
        const auto& b = mesh.nodes()[static_cast<std::size_t>(t.v[1])];
        const auto& c = mesh.nodes()[static_cast<std::size_t>(t.v[2])];
        const double det = (b.r - a.r) * (c.z - a.z) - (c.r - a.r) * (b.z - a.z);
        const double l1 = ((r - a.r) * (c.z - a.z) - (c.r - a.r) * (z - a.z)) / det;
        const double l2 = ((b.r - a.r) * (z - a.z) - (r - a.r) * (b.z - a.z)) / det;
        const double l0 = 1.0 - l1 - l2;
        const double eps = -1e-12;
        if (l0 >= eps && l1 >= eps && l2 >= eps) {
            const double psi = l0 * nodal(t.v[0]) + l1 * nodal(t.v[1]) + l2 * nodal(t.v[2]);
            // A_phi = psi / r integrated over the circle of radius r
            return 2.0 * std::numbers::pi * psi;
        }
    }
    return 0.0;
}

DenseMatrix assemble_X(const Mesh& mesh, const FoilWindingSpec& spec, const MaterialSpec& materials,
                       const FieldDiscretization& disc, const VoltageBasis& basis, const Vector& x) {
    DenseMatrix X(disc.dof_count(), basis.size());
    for (int l = 0; l < basis.size(); ++l) {
        X.col(l) = assemble_modified_mass(mesh, materials, disc, basis.profile(l, spec)) * x;
    }
    return X;
}

Vector assemble_c(const FoilWindingSpec& spec, const VoltageBasis& basis) {
    return 0.5 * spec.turns * basis.integrals();
}

DenseMatrix assemble_G_original(const Mesh& mesh, const FoilWindingSpec& spec, const MaterialSpec& materials,
                                const FieldDiscretization& disc, const VoltageBasis& basis, const Vector& x) {
    const int np = basis.size();
    DenseMatrix G(np, np);
    for (int k = 0; k < np; ++k) {
        for (int l = k; l < np; ++l) {
            const auto mkl =
                assemble_double_modified_mass(mesh, materials, disc, basis.profile(k, spec), basis.profile(l, spec));
            G(k, l) = x.dot(mkl * x);
            G(l, k) = G(k, l);
        }
    }
    return G;
}

ConsistentConductance assemble_G_consistent(const SparseMatrix& mass, const DenseMatrix& X) {
    const RestrictedSpdSolver solver(mass, diagonal_support(mass));
    ConsistentConductance out;
    out.E.resize(X.rows(), X.cols());
    for (Index l = 0; l < X.cols(); ++l) {
        out.E.col(l) = solver.solve(X.col(l));
    }
    const DenseMatrix raw = X.transpose() * out.E;
    const double scale = raw.cwiseAbs().maxCoeff();
    out.asymmetry = scale > 0.0 ? (raw - raw.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
    out.G_e = 0.5 * (raw + raw.transpose());
    return out;
}

void check_coupling_rank(const DenseMatrix& X, double tol) {
    const Index r = rank(X, tol);
    if (r != X.cols()) {
        throw RankDeficientCoupling("coupling matrix X has rank " + std::to_string(r) + " but " +
                                    std::to_string(X.cols()) + " columns; refine the winding mesh or lower N_p");
    }
}

SolidSystem build_solid_system(const SparseMatrix& K, const SparseMatrix& M, const Vector& x) {
    SolidSystem s{K, M, M * x, 0.0};
    s.G_sol = x.dot(s.x_sol);
    return s;
}

AssembledFoilSystem assemble_foil_system(const Mesh& mesh, const FoilWindingSpec& spec, const MaterialSpec& materials,
                                         const FieldDiscretization& disc, const VoltageBasis& basis,
                                         const FoilAssemblyOptions& options) {
    spec.validate();
    materials.validate();
    AssembledFoilSystem sys;
    sys.turns = spec.turns;
    sys.K = assemble_stiffness(mesh, materials, disc);
    sys.M = assemble_mass(mesh, materials, disc);
    sys.x = distribution_coefficients(mesh, disc);
    sys.X = assemble_X(mesh, spec, materials, disc, basis, sys.x);
    if (options.check_rank) {
        check_coupling_rank(sys.X, options.rank_tolerance);
    }
    sys.c = assemble_c(spec, basis);
    sys.G = assemble_G_original(mesh, spec, materials, disc, basis, sys.x);
    auto consistent = assemble_G_consistent(sys.M, sys.X);
    sys.G_e = std::move(consistent.G_e);
    sys.E = std::move(consistent.E);
    return sys;
}

Vector per_turn_voltages(const FoilWindingSpec& spec, const VoltageBasis& basis, const Vector& u) {
    Vector out(spec.turns);
    for (int k = 0; k < spec.turns; ++k) {
        const double alpha = -1.0 + (2.0 * k + 1.0) / spec.turns;
        double v = 0.0;
        for (int l = 0; l < basis.size(); ++l) {
            v += u(l) * basis.eval(l, alpha);
        }
        out(k) = v;
    }
    return out;
}

bool identical(const AssembledFoilSystem& a, const AssembledFoilSystem& b) {
    auto same = [](const DenseMatrix& p, const DenseMatrix& q) {
        return p.rows() == q.rows() && p.cols() == q.cols() && (p.size() == 0 || p == q);
    };
    auto same_v = [](const Vector& p, const Vector& q) { return p.size() == q.size() && (p.size() == 0 || p == q); };
    return a.turns == b.turns && a.K == b.K && a.M == b.M && same(a.X, b.X) && same(a.G, b.G) && same(a.G_e, b.G_e) &&
           same_v(a.c, b.c) && same_v(a.x, b.x) && same(a.E, b.E);
}

}  // namespace foil
