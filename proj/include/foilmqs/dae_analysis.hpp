#pragma once

#include "foilmqs/circuit.hpp"
#include "foilmqs/linalg.hpp"
#include "foilmqs/winding.hpp"

#include <string>

namespace foil {

/// Dense diagnostics refuse matrices larger than this.
inline constexpr Index kDenseDiagnosticLimit = 500;

/// Result of eliminating u: M_bar a' + K a = x_bar i,  v = x_bar^T a' + R i.
struct StrandedForm {
    DenseMatrix M_bar;   // M - X G^-1 X^T
    Vector x_bar;        // X G^-1 c
    double R = 0.0;      // c^T G^-1 c
};

/// Throws SingularConductance when cond(G) > 1e12.
StrandedForm schur_stranded_form(const DenseMatrix& M, const DenseMatrix& X, const DenseMatrix& G, const Vector& c);
/// Uses G_e, or G when mode == ConductanceMode::G. Subject to the dense size limit.
StrandedForm schur_stranded_form(const AssembledFoilSystem& sys, ConductanceMode mode = ConductanceMode::Ge);

struct ProjectorPair {
    DenseMatrix Q;   // orthogonal projector onto the numerical kernel
    DenseMatrix P;   // I - Q
};

ProjectorPair build_projectors(const DenseMatrix& a, double tol = 1e-10, Index size_limit = kDenseDiagnosticLimit);

struct InductanceResult {
    double L = 0.0;
    Index kernel_dimension = 0;
    Index rank_Qt_xbar = 0;
};

/// L = x_bar^T Q (Q^T K Q + P^T P)^-1 Q^T x_bar with Q onto ker(M_bar).
/// Throws NonpositiveInductance when L <= 0.
InductanceResult inductance_value(const StrandedForm& sf, const DenseMatrix& K, double tol = 1e-10);

struct PerturbationMeasure {
    bool degenerate = false;          // ||G - G_e|| <= tol ||G||
    double g_R = 0.0;                 // (c^T (G - G_e)^-1 c)^-1, 0 if c reaches the kernel of G - G_e
    double difference_norm = 0.0;     // ||G - G_e||_F
    double min_eigenvalue = 0.0;      // of G - G_e
    Index kernel_dimension = 0;       // numerical kernel of G - G_e
    double kernel_weight = 0.0;       // ||V_0^T c|| / ||c|| for the kernel basis V_0
};

/// Throws IndefiniteDifference when G - G_e has an eigenvalue below -1e-8 ||G||.
PerturbationMeasure singular_perturbation_measure(const DenseMatrix& G, const DenseMatrix& G_e, const Vector& c,
                                                  double tol = 1e-12);

enum class ElementKind { InductanceLike, ResistanceLike, SolidDegenerate };

std::string_view element_kind_name(ElementKind kind);

struct ClassifyOptions {
    double degenerate_tolerance = 1e-12;   // relative ||G - G_e|| for the solid limit
    double kernel_tolerance = 1e-10;       // projector kernel
    bool compute_inductance = true;        // needs field DoFs <= the dense limit
};

struct Classification {
    ElementKind kind = ElementKind::InductanceLike;
    ConductanceMode mode = ConductanceMode::Ge;
    double L = 0.0;                 // when inductance-like and computed
    bool has_L = false;
    double g_R = 0.0;               // singular-perturbation coefficient (mode G)
    PerturbationMeasure measure;
    Index rank_X = 0;
    Index rank_Qt_xbar = 0;
    std::string note;

    bool inductance_like() const { return kind != ElementKind::ResistanceLike; }
};

Classification classify_element(const AssembledFoilSystem& sys, ConductanceMode mode, const ClassifyOptions& options = {});

/// Circuit-level class for index prediction.
ElementClass circuit_class(const Classification& c);

/// Key-value report used by the classify command.
std::string format_classification(const Classification& c);

}  // namespace foil
