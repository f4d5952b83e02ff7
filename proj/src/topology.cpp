#include "foilmqs/circuit.hpp"
#include "foilmqs/errors.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>

namespace foil {

namespace {

class Components {
public:
    explicit Components(Index n) : parent_(static_cast<std::size_t>(n)) { std::iota(parent_.begin(), parent_.end(), 0); }
    Index find(Index a) {
        while (parent_[static_cast<std::size_t>(a)] != a) {
            a = parent_[static_cast<std::size_t>(a)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(a)])];
        }
        return a;
    }
    void unite(Index a, Index b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
        }
    }

private:
    std::vector<Index> parent_;
};

constexpr int kMaxEnumeratedSupernodes = 20;

}  // namespace

bool is_inductive(const Branch& b, const ElementClasses& classes) {
    switch (b.kind) {
        case BranchKind::Inductor:
        case BranchKind::CurrentSource: return true;
        case BranchKind::FieldElement: {
            const auto it = classes.find(b.name);
            if (it == classes.end()) {
                throw UnclassifiedElement("field element '" + b.name + "' has not been classified");
            }
            return it->second == ElementClass::InductanceLike;
        }
        default: return false;
    }
}

bool has_li_cutset(const Netlist& n, const ElementClasses& classes) {
    Components comp(n.node_count());
    for (const auto& b : n.branches) {
        if (!is_inductive(b, classes)) {
            comp.unite(b.plus, b.minus);
        }
    }
    for (Index v = 1; v < n.node_count(); ++v) {
        if (comp.find(v) != comp.find(0)) {
            return true;
        }
    }
    return false;
}

std::vector<std::vector<Index>> detect_li_cutsets(const Netlist& n, const ElementClasses& classes) {
    Components comp(n.node_count());
    std::vector<char> li(n.branches.size());
    for (std::size_t b = 0; b < n.branches.size(); ++b) {
        li[b] = is_inductive(n.branches[b], classes);
        if (!li[b]) {
            comp.unite(n.branches[b].plus, n.branches[b].minus);
        }
    }
    // super-nodes, ground's super-node gets index 0
    std::vector<Index> super(static_cast<std::size_t>(n.node_count()), -1);
    std::vector<Index> root_to_super(static_cast<std::size_t>(n.node_count()), -1);
    Index count = 0;
    for (Index v = 0; v < n.node_count(); ++v) {
        const Index r = comp.find(v);
        if (root_to_super[static_cast<std::size_t>(r)] < 0) {
            root_to_super[static_cast<std::size_t>(r)] = count++;
        }
        super[static_cast<std::size_t>(v)] = root_to_super[static_cast<std::size_t>(r)];
    }
    std::vector<std::vector<Index>> out;
    if (count == 1) {
        return out;
    }
    struct Edge {
        Index a, b, branch;
    };
    std::vector<Edge> edges;
    for (std::size_t b = 0; b < n.branches.size(); ++b) {
        const Index a = super[static_cast<std::size_t>(n.branches[b].plus)];
        const Index c = super[static_cast<std::size_t>(n.branches[b].minus)];
        if (li[b] && a != c) {
            edges.push_back({a, c, static_cast<Index>(b)});
        }
    }
    auto connected = [&](std::uint64_t mask) {
        if (mask == 0) {
            return false;
        }
        Components cc(count);
        for (const auto& e : edges) {
            if ((mask >> e.a & 1u) && (mask >> e.b & 1u)) {
                cc.unite(e.a, e.b);
            }
        }
        Index root = -1;
        for (Index v = 0; v < count; ++v) {
            if (mask >> v & 1u) {
                if (root < 0) {
                    root = cc.find(v);
                } else if (cc.find(v) != root) {
                    return false;
                }
            }
        }
        return true;
    };
    auto crossing = [&](std::uint64_t mask) {
        std::vector<Index> cut;
        for (const auto& e : edges) {
            if ((mask >> e.a & 1u) != (mask >> e.b & 1u)) {
                cut.push_back(e.branch);
            }
        }
        std::sort(cut.begin(), cut.end());
        return cut;
    };
    const std::uint64_t all = (std::uint64_t{1} << count) - 1;
    if (count <= kMaxEnumeratedSupernodes) {
        // every bond separates a connected set S (ground side excluded) from a connected complement
        for (std::uint64_t s = 2; s <= all; s += 2) {
            if (connected(s) && connected(all & ~s)) {
                out.push_back(crossing(s));
            }
        }
    } else {
        // too many super-nodes for exhaustive enumeration: one cut per super-node
        for (Index v = 1; v < count; ++v) {
            out.push_back(crossing(std::uint64_t{1} << v));
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::vector<Index>> detect_cv_loops(const Netlist& n) {
    std::vector<std::vector<std::pair<Index, Index>>> adj(static_cast<std::size_t>(n.node_count()));   // (node, branch)
    for (std::size_t b = 0; b < n.branches.size(); ++b) {
        const auto& br = n.branches[b];
        if (br.kind == BranchKind::Capacitor || br.kind == BranchKind::VoltageSource) {
            adj[static_cast<std::size_t>(br.plus)].push_back({br.minus, static_cast<Index>(b)});
            adj[static_cast<std::size_t>(br.minus)].push_back({br.plus, static_cast<Index>(b)});
        }
    }
    std::set<std::vector<Index>> loops;
    for (std::size_t b = 0; b < n.branches.size(); ++b) {
        const auto& br = n.branches[b];
        if (br.kind != BranchKind::VoltageSource) {
            continue;
        }
        // shortest path between the terminals avoiding this branch
        std::vector<std::pair<Index, Index>> from(static_cast<std::size_t>(n.node_count()), {-1, -1});
        std::vector<char> seen(static_cast<std::size_t>(n.node_count()), 0);
        std::queue<Index> q;
        q.push(br.plus);
        seen[static_cast<std::size_t>(br.plus)] = 1;
        while (!q.empty()) {
            const Index v = q.front();
            q.pop();
            for (const auto& [w, e] : adj[static_cast<std::size_t>(v)]) {
                if (e == static_cast<Index>(b) || seen[static_cast<std::size_t>(w)]) {
                    continue;
                }
                seen[static_cast<std::size_t>(w)] = 1;
                from[static_cast<std::size_t>(w)] = {v, e};
                q.push(w);
            }
        }
        if (!seen[static_cast<std::size_t>(br.minus)]) {
            continue;
        }
        std::vector<Index> loop{static_cast<Index>(b)};
        for (Index v = br.minus; v != br.plus; v = from[static_cast<std::size_t>(v)].first) {
            loop.push_back(from[static_cast<std::size_t>(v)].second);
        }
        std::sort(loop.begin(), loop.end());
        loops.insert(loop);
    }
    return {loops.begin(), loops.end()};
}

int predict_index(const Netlist& n, const ElementClasses& classes) {
    for (const auto& b : n.branches) {
        if (b.kind == BranchKind::FieldElement && !classes.contains(b.name)) {
            throw UnclassifiedElement("field element '" + b.name + "' has not been classified");
        }
    }
    return (has_li_cutset(n, classes) || !detect_cv_loops(n).empty()) ? 2 : 1;
}

}  // namespace foil
