#pragma once

#include "foilmqs/linalg.hpp"
#include "foilmqs/winding.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace foil {

enum class WaveformKind { Sin, PerturbedSin, Dc };

/// amp * (sin(2 pi f t) + eps * sin(2 pi f_eps t)); Sin has eps = 0, Dc is amp.
struct Waveform {
    WaveformKind kind = WaveformKind::Dc;
    double amplitude = 0.0;
    double frequency = 0.0;
    double epsilon = 0.0;
    double perturbation_frequency = 0.0;

    static Waveform dc(double value) { return {WaveformKind::Dc, value, 0.0, 0.0, 0.0}; }
    static Waveform sine(double amp, double f) { return {WaveformKind::Sin, amp, f, 0.0, 0.0}; }
    static Waveform perturbed_sine(double amp, double f, double eps, double f_eps) {
        return {WaveformKind::PerturbedSin, amp, f, eps, f_eps};
    }

    double value(double t) const;
    double derivative(double t) const;
    /// int_{t0}^{t1} value(s) ds in closed form.
    double integral(double t0, double t1) const;
};

enum class BranchKind { Resistor, Inductor, Capacitor, VoltageSource, CurrentSource, FieldElement };
enum class ConductanceMode { G, Ge, Solid };

std::string_view branch_kind_name(BranchKind kind);
std::string_view conductance_mode_name(ConductanceMode mode);
ConductanceMode parse_conductance_mode(std::string_view name);

struct Branch {
    std::string name;
    BranchKind kind = BranchKind::Resistor;
    Index plus = 0;    // node indices, 0 = ground
    Index minus = 0;
    double value = 0.0;          // R, L, C
    Waveform waveform;           // sources
    std::string field_path;      // field elements
    ConductanceMode mode = ConductanceMode::Ge;
    std::size_t line = 0;
};

struct Netlist {
    std::vector<std::string> nodes{"0"};   // first-appearance order, ground first
    std::vector<Branch> branches;

    Index node_count() const { return static_cast<Index>(nodes.size()); }
    Index find_branch(std::string_view name) const;   // -1 if absent
};

/// Grammar, one branch per line (keywords case-insensitive, '*' starts a comment):
///   R<name> n+ n- value | L... | C...
///   V<name> n+ n- SIN amp f | PSIN amp f eps feps | DC v     (I<name> likewise)
///   FW<name> n+ n- FILE path MODE G|Ge|SOLID
Netlist parse_netlist(std::string_view text);

/// Throws ValidationError: missing ground, disconnected graph, nonpositive
/// R/L/C, current-source-only cutsets or voltage-source-only loops.
void validate_netlist(const Netlist& netlist);

enum class ElementClass { InductanceLike, ResistanceLike };

/// Classification of field elements keyed by branch name.
using ElementClasses = std::map<std::string, ElementClass>;

/// True when the branch counts as an inductor for the topological analysis.
bool is_inductive(const Branch& branch, const ElementClasses& classes);

/// Minimal cutsets made only of inductors, current sources and
/// inductance-like field elements (branch index lists, sorted).
std::vector<std::vector<Index>> detect_li_cutsets(const Netlist& netlist, const ElementClasses& classes = {});

/// Spanning-forest criterion: contracting every non-LI branch leaves more than one super-node.
bool has_li_cutset(const Netlist& netlist, const ElementClasses& classes = {});

/// Loops made only of capacitors and voltage sources with at least one source.
std::vector<std::vector<Index>> detect_cv_loops(const Netlist& netlist);

/// 2 iff an LI-cutset or CV-loop exists, else 1. Throws UnclassifiedElement
/// when a field element has no entry in `classes`.
int predict_index(const Netlist& netlist, const ElementClasses& classes);

/// Field elements resolved by FILE path.
using FieldLibrary = std::map<std::string, std::shared_ptr<const AssembledFoilSystem>>;

/// Loads every referenced system; relative paths are resolved against base_dir.
FieldLibrary load_field_library(const Netlist& netlist, const std::string& base_dir);

struct FieldBlock {
    Index branch;
    ConductanceMode mode;
    Index a_offset, a_size;
    Index u_offset, u_size;
    Index i_offset;
};

/// How to recover a branch current from the state.
struct CurrentProbe {
    enum class Kind { Unknown, Conductance, Source, Capacitance } kind;
    Index index = -1;        // Unknown
    double coefficient = 0;  // conductance or capacitance
};

/// Unknown vector y = [node potentials 1..n-1 | branch currents of V and L |
/// per field element: a (N_w), u (N_p or 1), i].
struct DaeLayout {
    Index node_unknowns = 0;
    std::vector<Index> branch_current;   // per branch, -1 if none
    std::vector<FieldBlock> field_blocks;
    Index size = 0;

    /// Unknown index of a node potential, -1 for ground.
    static Index potential(Index node) { return node - 1; }
};

struct SourceTerm {
    Index row;
    double sign;
    Waveform waveform;
};

/// E y' + A y = s(t).
struct DAESystem {
    SparseMatrix E;
    SparseMatrix A;
    std::vector<SourceTerm> sources;
    DaeLayout layout;
    std::vector<std::string> branch_names;
    std::vector<std::pair<Index, Index>> branch_nodes;
    std::vector<CurrentProbe> branch_currents;
    std::vector<Waveform> branch_waveforms;

    Index size() const { return layout.size; }
    Vector source(double t) const;
    /// Rows with no entry in E.
    std::vector<Index> algebraic_rows() const;
    double branch_voltage(Index branch, const Vector& y) const;
};

DAESystem mna_stamp(const Netlist& netlist, const FieldLibrary& library = {});

/// i(t) = (psi0 + int_{t0}^{t} v ds) / L.
double lumped_inductor_voltage_driven(double L, double psi0, const Waveform& v, double t0, double t);
double lumped_inductor_voltage_driven(double L, double psi0, const std::function<double(double, double)>& v_integral,
                                      double t0, double t);

/// v(t) = L di/dt.
double lumped_inductor_current_driven(double L, const Waveform& i, double t);
double lumped_inductor_current_driven(double L, const std::function<double(double)>& di_dt, double t);

/// Only v0 = L di/dt(t0) is a consistent initial voltage.
bool lumped_inductor_consistent_start(double L, const Waveform& i, double t0, double v0, double tol = 1e-12);

}  // namespace foil
