#include "foilmqs/circuit.hpp"
#include "foilmqs/errors.hpp"

#include <algorithm>
#include <filesystem>

namespace foil {

namespace {

class Stamper {
public:
    std::vector<Triplet> e, a;

    void add_a(Index row, Index col, double v) {
        if (row >= 0 && col >= 0 && v != 0.0) {
            a.push_back({row, col, v});
        }
    }
    void add_e(Index row, Index col, double v) {
        if (row >= 0 && col >= 0 && v != 0.0) {
            e.push_back({row, col, v});
        }
    }
    void sparse_block(std::vector<Triplet>& out, const SparseMatrix& m, Index row0, Index col0, double scale) {
        for (const auto& t : m.to_triplets()) {
            out.push_back({row0 + t.row, col0 + t.col, scale * t.value});
        }
    }
};

}  // namespace

FieldLibrary load_field_library(const Netlist& netlist, const std::string& base_dir) {
    FieldLibrary lib;
    for (const auto& b : netlist.branches) {
        if (b.kind != BranchKind::FieldElement || lib.contains(b.field_path)) {
            continue;
        }
        std::filesystem::path p(b.field_path);
        if (p.is_relative() && !base_dir.empty()) {
            p = std::filesystem::path(base_dir) / p;
        }
        lib.emplace(b.field_path, std::make_shared<const AssembledFoilSystem>(load_foil_system(p.string())));
    }
    return lib;
}

Vector DAESystem::source(double t) const {
    Vector s = Vector::Zero(size());
    for (const auto& term : sources) {
        s(term.row) += term.sign * term.waveform.value(t);
    }
    return s;
}

std::vector<Index> DAESystem::algebraic_rows() const {
    std::vector<Index> rows;
    const auto offs = E.row_offsets();
    for (Index r = 0; r < size(); ++r) {
        if (offs[static_cast<std::size_t>(r + 1)] == offs[static_cast<std::size_t>(r)]) {
            rows.push_back(r);
        }
    }
    return rows;
}

double DAESystem::branch_voltage(Index branch, const Vector& y) const {
    const auto [p, m] = branch_nodes[static_cast<std::size_t>(branch)];
    const double vp = p > 0 ? y(DaeLayout::potential(p)) : 0.0;
    const double vm = m > 0 ? y(DaeLayout::potential(m)) : 0.0;
    return vp - vm;
}

DAESystem mna_stamp(const Netlist& netlist, const FieldLibrary& library) {
    DAESystem dae;
    auto& lay = dae.layout;
    lay.node_unknowns = netlist.node_count() - 1;
    Index next = lay.node_unknowns;
    lay.branch_current.assign(netlist.branches.size(), -1);
    std::vector<const AssembledFoilSystem*> systems(netlist.branches.size(), nullptr);
    for (std::size_t b = 0; b < netlist.branches.size(); ++b) {
        const auto& br = netlist.branches[b];
        if (br.kind == BranchKind::VoltageSource || br.kind == BranchKind::Inductor) {
            lay.branch_current[b] = next++;
        } else if (br.kind == BranchKind::FieldElement) {
            const auto it = library.find(br.field_path);
            if (it == library.end() || !it->second) {
                throw ValidationError("field element '" + br.name + "' references unknown system '" + br.field_path + "'");
            }
            systems[b] = it->second.get();
            FieldBlock fb;
            fb.branch = static_cast<Index>(b);
            fb.mode = br.mode;
            fb.a_offset = next;
            fb.a_size = systems[b]->field_dofs();
            fb.u_offset = fb.a_offset + fb.a_size;
            fb.u_size = br.mode == ConductanceMode::Solid ? 1 : systems[b]->voltage_dofs();
            fb.i_offset = fb.u_offset + fb.u_size;
            next = fb.i_offset + 1;
            lay.branch_current[b] = fb.i_offset;
            lay.field_blocks.push_back(fb);
        }
    }
    lay.size = next;

    Stamper st;
    auto pot = [](Index node) { return DaeLayout::potential(node); };
    // KCL rows: sum of currents leaving the node through branches = injections.
    auto kcl_current = [&](const Branch& br, Index col) {
        st.add_a(pot(br.plus), col, 1.0);
        st.add_a(pot(br.minus), col, -1.0);
    };
    for (std::size_t b = 0; b < netlist.branches.size(); ++b) {
        const auto& br = netlist.branches[b];
        const Index p = pot(br.plus), m = pot(br.minus);
        dae.branch_names.push_back(br.name);
        dae.branch_nodes.emplace_back(br.plus, br.minus);
        dae.branch_waveforms.push_back(br.waveform);
        CurrentProbe probe{CurrentProbe::Kind::Unknown, lay.branch_current[b], 0.0};
        switch (br.kind) {
            case BranchKind::Resistor: {
                const double g = 1.0 / br.value;
                st.add_a(p, p, g);
                st.add_a(m, m, g);
                st.add_a(p, m, -g);
                st.add_a(m, p, -g);
                probe = {CurrentProbe::Kind::Conductance, -1, g};
                break;
            }
            case BranchKind::Capacitor: {
                st.add_e(p, p, br.value);
                st.add_e(m, m, br.value);
                st.add_e(p, m, -br.value);
                st.add_e(m, p, -br.value);
                probe = {CurrentProbe::Kind::Capacitance, -1, br.value};
                break;
            }
            case BranchKind::VoltageSource: {
                const Index j = lay.branch_current[b];
                kcl_current(br, j);
                st.add_a(j, p, 1.0);
                st.add_a(j, m, -1.0);
                dae.sources.push_back({j, 1.0, br.waveform});
                break;
            }
            case BranchKind::CurrentSource: {
                // the source drives its value into node+ (and out of node-)
                if (p >= 0) {
                    dae.sources.push_back({p, 1.0, br.waveform});
                }
                if (m >= 0) {
                    dae.sources.push_back({m, -1.0, br.waveform});
                }
                probe = {CurrentProbe::Kind::Source, -1, 0.0};
                break;
            }
            case BranchKind::Inductor: {
                const Index j = lay.branch_current[b];
                kcl_current(br, j);
                st.add_e(j, j, br.value);
                st.add_a(j, p, -1.0);
                st.add_a(j, m, 1.0);
                break;
            }
            case BranchKind::FieldElement: {
                const auto& sys = *systems[b];
                const FieldBlock& fb = *std::find_if(lay.field_blocks.begin(), lay.field_blocks.end(),
                                                     [&](const FieldBlock& f) { return f.branch == static_cast<Index>(b); });
                const Index i = fb.i_offset;
                kcl_current(br, i);
                st.sparse_block(st.e, sys.M, fb.a_offset, fb.a_offset, 1.0);
                st.sparse_block(st.a, sys.K, fb.a_offset, fb.a_offset, 1.0);
                DenseMatrix X;
                DenseMatrix G;
                Vector c;
                if (br.mode == ConductanceMode::Solid) {
                    // u is the terminal voltage; coupling normalized per turn
                    const auto solid = sys.solid();
                    const double n = sys.turns;
                    X = solid.x_sol / n;
                    G = DenseMatrix::Constant(1, 1, solid.G_sol / (n * n));
                    c = Vector::Ones(1);
                } else {
                    X = sys.X;
                    G = br.mode == ConductanceMode::G ? sys.G : sys.G_e;
                    c = sys.c;
                }
                for (Index r = 0; r < X.rows(); ++r) {
                    for (Index l = 0; l < X.cols(); ++l) {
                        st.add_a(fb.a_offset + r, fb.u_offset + l, -X(r, l));
                        st.add_e(fb.u_offset + l, fb.a_offset + r, -X(r, l));
                    }
                }
                for (Index k = 0; k < G.rows(); ++k) {
                    for (Index l = 0; l < G.cols(); ++l) {
                        st.add_a(fb.u_offset + k, fb.u_offset + l, G(k, l));
                    }
                    st.add_a(fb.u_offset + k, i, -c(k));
                    st.add_a(i, fb.u_offset + k, -c(k));
                }
                st.add_a(i, p, 1.0);
                st.add_a(i, m, -1.0);
                break;
            }
        }
        dae.branch_currents.push_back(probe);
    }
    dae.E = SparseMatrix::from_triplets(lay.size, lay.size, st.e);
    dae.A = SparseMatrix::from_triplets(lay.size, lay.size, st.a);
    return dae;
}

}  // namespace foil
