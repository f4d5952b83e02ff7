#include "foilmqs/circuit.hpp"
#include "foilmqs/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

namespace foil {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Token {
    std::string_view text;
    std::size_t column;
};

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        if (i >= line.size() || line[i] == '*') {
            break;
        }
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != '*') {
            ++i;
        }
        out.push_back({line.substr(start, i - start), start + 1});
    }
    return out;
}

double number(const Token& tok, std::size_t line) {
    double v = 0.0;
    const auto* first = tok.text.data();
    const auto* last = first + tok.text.size();
    if (!tok.text.empty() && *first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(v)) {
        throw ParseError(line, tok.column, "malformed number '" + std::string(tok.text) + "'");
    }
    return v;
}

class NodeTable {
public:
    explicit NodeTable(Netlist& n) : netlist_(n) {}
    Index operator()(std::string_view name) {
        for (Index i = 0; i < netlist_.node_count(); ++i) {
            if (netlist_.nodes[static_cast<std::size_t>(i)] == name) {
                return i;
            }
        }
        netlist_.nodes.emplace_back(name);
        return netlist_.node_count() - 1;
    }

private:
    Netlist& netlist_;
};

Waveform parse_waveform(const std::vector<Token>& t, std::size_t line) {
    if (t.size() < 4) {
        throw ParseError(line, t.back().column + t.back().text.size(), "missing source waveform");
    }
    const std::string kind = upper(t[3].text);
    auto expect = [&](std::size_t n) {
        if (t.size() != 4 + n) {
            const auto& last = t.size() > 4 + n ? t[4 + n] : t.back();
            throw ParseError(line, last.column,
                             kind + " expects " + std::to_string(n) + " argument" + (n == 1 ? "" : "s"));
        }
    };
    if (kind == "SIN") {
        expect(2);
        return Waveform::sine(number(t[4], line), number(t[5], line));
    }
    if (kind == "PSIN") {
        expect(4);
        return Waveform::perturbed_sine(number(t[4], line), number(t[5], line), number(t[6], line), number(t[7], line));
    }
    if (kind == "DC") {
        expect(1);
        return Waveform::dc(number(t[4], line));
    }
    throw ParseError(line, t[3].column, "unknown waveform '" + std::string(t[3].text) + "'");
}

}  // namespace

double Waveform::value(double t) const {
    switch (kind) {
        case WaveformKind::Dc: return amplitude;
        case WaveformKind::Sin: return amplitude * std::sin(kTwoPi * frequency * t);
        case WaveformKind::PerturbedSin:
            return amplitude * (std::sin(kTwoPi * frequency * t) + epsilon * std::sin(kTwoPi * perturbation_frequency * t));
    }
    return 0.0;
}

double Waveform::derivative(double t) const {
    switch (kind) {
        case WaveformKind::Dc: return 0.0;
        case WaveformKind::Sin: return amplitude * kTwoPi * frequency * std::cos(kTwoPi * frequency * t);
        case WaveformKind::PerturbedSin:
            return amplitude * kTwoPi *
                   (frequency * std::cos(kTwoPi * frequency * t) +
                    epsilon * perturbation_frequency * std::cos(kTwoPi * perturbation_frequency * t));
    }
    return 0.0;
}

double Waveform::integral(double t0, double t1) const {
    auto sin_integral = [](double f, double a, double b) {
        if (f == 0.0) {
            return 0.0;
        }
        return (std::cos(kTwoPi * f * a) - std::cos(kTwoPi * f * b)) / (kTwoPi * f);
    };
    switch (kind) {
        case WaveformKind::Dc: return amplitude * (t1 - t0);
        case WaveformKind::Sin: return amplitude * sin_integral(frequency, t0, t1);
        case WaveformKind::PerturbedSin:
            return amplitude * (sin_integral(frequency, t0, t1) + epsilon * sin_integral(perturbation_frequency, t0, t1));
    }
    return 0.0;
}

std::string_view branch_kind_name(BranchKind kind) {
    switch (kind) {
        case BranchKind::Resistor: return "R";
        case BranchKind::Inductor: return "L";
        case BranchKind::Capacitor: return "C";
        case BranchKind::VoltageSource: return "V";
        case BranchKind::CurrentSource: return "I";
        case BranchKind::FieldElement: return "FW";
    }
    return "?";
}

std::string_view conductance_mode_name(ConductanceMode mode) {
    switch (mode) {
        case ConductanceMode::G: return "G";
        case ConductanceMode::Ge: return "Ge";
        case ConductanceMode::Solid: return "SOLID";
    }
    return "?";
}

ConductanceMode parse_conductance_mode(std::string_view name) {
    const std::string u = upper(name);
    if (u == "G") {
        return ConductanceMode::G;
    }
    if (u == "GE") {
        return ConductanceMode::Ge;
    }
    if (u == "SOLID") {
        return ConductanceMode::Solid;
    }
    throw ValidationError("unknown conductance mode '" + std::string(name) + "' (expected G, Ge or SOLID)");
}

Index Netlist::find_branch(std::string_view name) const {
    const std::string key = upper(name);
    for (std::size_t b = 0; b < branches.size(); ++b) {
        if (upper(branches[b].name) == key) {
            return static_cast<Index>(b);
        }
    }
    return -1;
}

Netlist parse_netlist(std::string_view text) {
    Netlist netlist;
    NodeTable node(netlist);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        const std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        const auto t = tokenize(line);
        if (t.empty()) {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        const std::string name = upper(t[0].text);
        if (name == ".END") {
            break;
        }
        if (t.size() < 3) {
            throw ParseError(line_no, t.back().column + t.back().text.size(), "expected '<name> <node+> <node->'");
        }
        Branch br;
        br.name = std::string(t[0].text);
        br.line = line_no;
        br.plus = node(t[1].text);
        br.minus = node(t[2].text);
        if (name.rfind("FW", 0) == 0) {
            br.kind = BranchKind::FieldElement;
            if (t.size() != 7 || upper(t[3].text) != "FILE" || upper(t[5].text) != "MODE") {
                const auto& where = t.size() > 3 ? t[3] : t.back();
                throw ParseError(line_no, where.column, "expected 'FILE <path> MODE <G|Ge|SOLID>'");
            }
            br.field_path = std::string(t[4].text);
            try {
                br.mode = parse_conductance_mode(t[6].text);
            } catch (const ValidationError& e) {
                throw ParseError(line_no, t[6].column, e.what());
            }
        } else {
            switch (name[0]) {
                case 'R':
                case 'L':
                case 'C':
                    br.kind = name[0] == 'R' ? BranchKind::Resistor
                                             : (name[0] == 'L' ? BranchKind::Inductor : BranchKind::Capacitor);
                    if (t.size() != 4) {
                        throw ParseError(line_no, t.size() > 4 ? t[4].column : t.back().column + t.back().text.size(),
                                         "expected a single value");
                    }
                    br.value = number(t[3], line_no);
                    break;
                case 'V':
                case 'I':
                    br.kind = name[0] == 'V' ? BranchKind::VoltageSource : BranchKind::CurrentSource;
                    br.waveform = parse_waveform(t, line_no);
                    break;
                default:
                    throw ParseError(line_no, t[0].column, "unknown element type '" + std::string(t[0].text) + "'");
            }
        }
        netlist.branches.push_back(std::move(br));
        if (end == text.size()) {
            break;
        }
    }
    validate_netlist(netlist);
    return netlist;
}

namespace {

struct UnionFind {
    std::vector<Index> parent;
    explicit UnionFind(Index n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
    Index find(Index a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    }
    bool unite(Index a, Index b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
        return true;
    }
};

}  // namespace

void validate_netlist(const Netlist& n) {
    if (n.branches.empty()) {
        throw ValidationError("netlist has no branches");
    }
    std::set<std::string> names;
    for (const auto& b : n.branches) {
        const std::string where = "line " + std::to_string(b.line) + " (" + b.name + "): ";
        if (!names.insert(upper(b.name)).second) {
            throw ValidationError(where + "duplicate branch name");
        }
        if (b.plus == b.minus) {
            throw ValidationError(where + "both terminals on the same node");
        }
        if ((b.kind == BranchKind::Resistor || b.kind == BranchKind::Inductor || b.kind == BranchKind::Capacitor) &&
            !(b.value > 0.0)) {
            throw ValidationError(where + "value must be positive");
        }
        if ((b.kind == BranchKind::VoltageSource || b.kind == BranchKind::CurrentSource) &&
            (b.waveform.frequency < 0.0 || b.waveform.perturbation_frequency < 0.0)) {
            throw ValidationError(where + "negative source frequency");
        }
    }
    bool ground = false;
    for (const auto& b : n.branches) {
        ground = ground || b.plus == 0 || b.minus == 0;
    }
    if (!ground) {
        throw ValidationError("netlist does not reference ground node 0");
    }
    UnionFind all(n.node_count());
    for (const auto& b : n.branches) {
        all.unite(b.plus, b.minus);
    }
    for (Index v = 1; v < n.node_count(); ++v) {
        if (all.find(v) != all.find(0)) {
            throw ValidationError("node '" + n.nodes[static_cast<std::size_t>(v)] + "' is not connected to ground");
        }
    }
    // current sources alone must not separate a node set: contract everything else
    UnionFind not_i(n.node_count());
    for (const auto& b : n.branches) {
        if (b.kind != BranchKind::CurrentSource) {
            not_i.unite(b.plus, b.minus);
        }
    }
    for (Index v = 1; v < n.node_count(); ++v) {
        if (not_i.find(v) != not_i.find(0)) {
            throw ValidationError("cutset made of current sources only at node '" + n.nodes[static_cast<std::size_t>(v)] + "'");
        }
    }
    UnionFind v_only(n.node_count());
    for (const auto& b : n.branches) {
        if (b.kind == BranchKind::VoltageSource && !v_only.unite(b.plus, b.minus)) {
            throw ValidationError("loop made of voltage sources only through '" + b.name + "'");
        }
    }
}

double lumped_inductor_voltage_driven(double L, double psi0, const Waveform& v, double t0, double t) {
    return (psi0 + v.integral(t0, t)) / L;
}

double lumped_inductor_voltage_driven(double L, double psi0, const std::function<double(double, double)>& v_integral,
                                      double t0, double t) {
    return (psi0 + v_integral(t0, t)) / L;
}

double lumped_inductor_current_driven(double L, const Waveform& i, double t) { return L * i.derivative(t); }

double lumped_inductor_current_driven(double L, const std::function<double(double)>& di_dt, double t) {
    return L * di_dt(t);
}

bool lumped_inductor_consistent_start(double L, const Waveform& i, double t0, double v0, double tol) {
    const double expected = lumped_inductor_current_driven(L, i, t0);
    return std::abs(v0 - expected) <= tol * std::max(1.0, std::abs(expected));
}

}  // namespace foil
