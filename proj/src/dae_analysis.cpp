#include "foilmqs/dae_analysis.hpp"
#include "foilmqs/errors.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace foil {

namespace {

constexpr double kMaxConductanceCondition = 1e12;
constexpr double kIndefiniteTolerance = 1e-8;
constexpr double kKernelTolerance = 1e-12;
constexpr double kKernelWeightTolerance = 1e-8;

DenseMatrix symmetrized(const DenseMatrix& a) { return 0.5 * (a + a.transpose()); }

struct Coupling {
    DenseMatrix X;
    DenseMatrix G;
    DenseMatrix G_e;
    Vector c;
};

Coupling coupling_for(const AssembledFoilSystem& sys, ConductanceMode mode) {
    if (mode == ConductanceMode::Solid) {
        const auto solid = sys.solid();
        const double n = sys.turns;
        Coupling cp;
        cp.X = solid.x_sol / n;
        cp.G = DenseMatrix::Constant(1, 1, solid.G_sol / (n * n));
        cp.G_e = assemble_G_consistent(sys.M, cp.X).G_e;
        cp.c = Vector::Ones(1);
        return cp;
    }
    return {sys.X, sys.G, sys.G_e, sys.c};
}

}  // namespace

StrandedForm schur_stranded_form(const DenseMatrix& M, const DenseMatrix& X, const DenseMatrix& G, const Vector& c) {
    if (G.rows() != G.cols() || G.rows() != X.cols() || c.size() != G.rows() || M.rows() != X.rows()) {
        throw ValidationError("stranded form: inconsistent block sizes");
    }
    Eigen::JacobiSVD<DenseMatrix> svd(G);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s[s.size() - 1] == 0.0 || s[0] / s[s.size() - 1] > kMaxConductanceCondition) {
        throw SingularConductance("conductance matrix is numerically singular");
    }
    const Eigen::FullPivLU<DenseMatrix> lu(G);
    const DenseMatrix GiXt = lu.solve(X.transpose());
    const Vector Gic = lu.solve(c);
    StrandedForm sf;
    sf.M_bar = symmetrized(M - X * GiXt);
    sf.x_bar = X * Gic;
    sf.R = c.dot(Gic);
    return sf;
}

StrandedForm schur_stranded_form(const AssembledFoilSystem& sys, ConductanceMode mode) {
    const Coupling cp = coupling_for(sys, mode);
    return schur_stranded_form(sys.M.to_dense(), cp.X, mode == ConductanceMode::G ? cp.G : cp.G_e, cp.c);
}

ProjectorPair build_projectors(const DenseMatrix& a, double tol, Index size_limit) {
    if (a.rows() > size_limit) {
        throw SizeGuard("dense projectors limited to " + std::to_string(size_limit) + " unknowns, got " +
                        std::to_string(a.rows()));
    }
    const DenseMatrix basis = nullspace_basis(a, tol);
    ProjectorPair pp;
    pp.Q = basis * basis.transpose();
    pp.P = DenseMatrix::Identity(a.rows(), a.cols()) - pp.Q;
    return pp;
}

InductanceResult inductance_value(const StrandedForm& sf, const DenseMatrix& K, double tol) {
    const ProjectorPair pp = build_projectors(sf.M_bar, tol);
    const DenseMatrix& Q = pp.Q;
    const DenseMatrix& P = pp.P;
    const DenseMatrix pencil = Q.transpose() * K * Q + P.transpose() * P;
    const Vector qx = Q.transpose() * sf.x_bar;
    const Eigen::FullPivLU<DenseMatrix> lu(pencil);
    if (!lu.isInvertible()) {
        throw SingularMatrix("projected stiffness pencil is singular");
    }
    InductanceResult out;
    out.L = qx.dot(lu.solve(qx));
    out.kernel_dimension = static_cast<Index>(std::llround(Q.trace()));
    const double xn = sf.x_bar.norm();
    out.rank_Qt_xbar = (xn > 0.0 && qx.norm() > 1e-10 * xn) ? 1 : 0;
    if (!(out.L > 0.0)) {
        std::ostringstream msg;
        msg << "inductance value " << out.L << " is not positive";
        throw NonpositiveInductance(msg.str());
    }
    return out;
}

PerturbationMeasure singular_perturbation_measure(const DenseMatrix& G, const DenseMatrix& G_e, const Vector& c,
                                                  double tol) {
    const DenseMatrix D = symmetrized(G - G_e);
    const double g_norm = G.norm();
    PerturbationMeasure m;
    m.difference_norm = D.norm();
    if (D.rows() == 0) {
        m.degenerate = true;
        return m;
    }
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(D);
    const Vector& lambda = eig.eigenvalues();
    m.min_eigenvalue = lambda[0];
    if (m.min_eigenvalue < -kIndefiniteTolerance * g_norm) {
        std::ostringstream msg;
        msg << "G - G_e has eigenvalue " << m.min_eigenvalue << " (||G|| = " << g_norm << ")";
        throw IndefiniteDifference(msg.str());
    }
    if (m.difference_norm <= tol * g_norm) {
        m.degenerate = true;
        m.kernel_dimension = D.rows();
        m.kernel_weight = 1.0;
        return m;
    }
    double kernel_sq = 0.0;
    double inverse_form = 0.0;
    for (Index k = 0; k < lambda.size(); ++k) {
        const double w = eig.eigenvectors().col(k).dot(c);
        if (lambda[k] <= kKernelTolerance * g_norm) {
            ++m.kernel_dimension;
            kernel_sq += w * w;
        } else {
            inverse_form += w * w / lambda[k];
        }
    }
    const double cn = c.norm();
    m.kernel_weight = cn > 0.0 ? std::sqrt(kernel_sq) / cn : 0.0;
    // c reaching the kernel makes c^T (G - G_e)^-1 c unbounded
    if (m.kernel_weight > kKernelWeightTolerance || inverse_form == 0.0) {
        m.g_R = 0.0;
    } else {
        m.g_R = 1.0 / inverse_form;
    }
    return m;
}

std::string_view element_kind_name(ElementKind kind) {
    switch (kind) {
        case ElementKind::InductanceLike: return "InductanceLike";
        case ElementKind::ResistanceLike: return "ResistanceLike";
        case ElementKind::SolidDegenerate: return "SolidDegenerate";
    }
    return "?";
}

Classification classify_element(const AssembledFoilSystem& sys, ConductanceMode mode, const ClassifyOptions& options) {
    const Coupling cp = coupling_for(sys, mode);
    Classification out;
    out.mode = mode;
    out.rank_X = rank(cp.X, 1e-10);
    out.measure = singular_perturbation_measure(cp.G, cp.G_e, cp.c, options.degenerate_tolerance);
    out.g_R = out.measure.g_R;

    // conductance used for the stranded form when the element is inductance-like
    ConductanceMode form_mode = ConductanceMode::Ge;
    if (mode == ConductanceMode::Solid || out.measure.degenerate) {
        out.kind = ElementKind::SolidDegenerate;
    } else if (mode == ConductanceMode::Ge) {
        out.kind = ElementKind::InductanceLike;
    } else if (out.measure.g_R > 0.0) {
        out.kind = ElementKind::ResistanceLike;
        return out;
    } else {
        out.kind = ElementKind::InductanceLike;
        form_mode = ConductanceMode::G;
        std::ostringstream note;
        note << "c has weight " << out.measure.kernel_weight << " in the " << out.measure.kernel_dimension
             << "-dimensional kernel of G - G_e, so g_R = 0";
        out.note = note.str();
    }

    if (!options.compute_inductance) {
        return out;
    }
    if (sys.field_dofs() > kDenseDiagnosticLimit) {
        if (!out.note.empty()) {
            out.note += "; ";
        }
        out.note += "L not computed: " + std::to_string(sys.field_dofs()) + " field DoFs exceed the dense limit";
        return out;
    }
    const DenseMatrix& Gf = form_mode == ConductanceMode::G ? cp.G : cp.G_e;
    const StrandedForm sf = schur_stranded_form(sys.M.to_dense(), cp.X, Gf, cp.c);
    const InductanceResult ind = inductance_value(sf, sys.K.to_dense(), options.kernel_tolerance);
    out.L = ind.L;
    out.has_L = true;
    out.rank_Qt_xbar = ind.rank_Qt_xbar;
    return out;
}

ElementClass circuit_class(const Classification& c) {
    return c.kind == ElementKind::ResistanceLike ? ElementClass::ResistanceLike : ElementClass::InductanceLike;
}

std::string format_classification(const Classification& c) {
    std::ostringstream out;
    out << std::setprecision(10);
    out << "mode = " << conductance_mode_name(c.mode) << '\n';
    out << "kind = " << element_kind_name(c.kind) << '\n';
    if (c.has_L) {
        out << "L = " << c.L << '\n';
    }
    out << "g_R = " << c.g_R << '\n';
    out << "norm_G_minus_Ge = " << c.measure.difference_norm << '\n';
    out << "min_eig_G_minus_Ge = " << c.measure.min_eigenvalue << '\n';
    out << "kernel_dim_G_minus_Ge = " << c.measure.kernel_dimension << '\n';
    out << "kernel_weight_c = " << c.measure.kernel_weight << '\n';
    out << "rank_X = " << c.rank_X << '\n';
    if (c.has_L) {
        out << "rank_Qt_xbar = " << c.rank_Qt_xbar << '\n';
    }
    if (!c.note.empty()) {
        out << "note = " << c.note << '\n';
    }
    return out.str();
}

}  // namespace foil
