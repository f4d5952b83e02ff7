#include "foilmqs/mesh.hpp"

#include "foilmqs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace foil {

std::string_view region_name(Region region) {
    switch (region) {
        case Region::Air: return "air";
        case Region::Yoke: return "yoke";
        case Region::AirGap: return "airgap";
        case Region::FoilWinding: return "winding";
    }
    return "unknown";
}

std::optional<Region> parse_region(std::string_view name) {
    for (Region r : kAllRegions) {
        if (name == region_name(r)) {
            return r;
        }
    }
    if (name.size() == 1 && name[0] >= '0' && name[0] <= '3') {
        return static_cast<Region>(name[0] - '0');
    }
    return std::nullopt;
}

namespace {

double signed_area_of(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b.r - a.r) * (c.z - a.z) - (c.r - a.r) * (b.z - a.z));
}

std::array<Index, 2> edge_key(Index a, Index b) { return a < b ? std::array<Index, 2>{a, b} : std::array<Index, 2>{b, a}; }

}  // namespace

Mesh::Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles, std::vector<bool> boundary)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), boundary_(std::move(boundary)) {
    if (boundary_.size() != nodes_.size()) {
        throw ValidationError("boundary flag count does not match node count");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& p = nodes_[i];
        if (!std::isfinite(p.r) || !std::isfinite(p.z)) {
            throw ValidationError("node " + std::to_string(i) + " has non-finite coordinates");
        }
        if (p.r < 0.0) {
            throw ValidationError("node " + std::to_string(i) + " has negative radius");
        }
    }
    const auto n = static_cast<Index>(nodes_.size());
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const auto& tri = triangles_[t];
        for (Index v : tri.v) {
            if (v < 0 || v >= n) {
                throw ValidationError("triangle " + std::to_string(t) + " references missing node " + std::to_string(v));
            }
        }
        if (tri.v[0] == tri.v[1] || tri.v[1] == tri.v[2] || tri.v[0] == tri.v[2]) {
            throw ValidationError("triangle " + std::to_string(t) + " repeats a node");
        }
        if (static_cast<unsigned>(tri.region) > 3u) {
            throw ValidationError("triangle " + std::to_string(t) + " has an invalid region tag");
        }
        if (!(signed_area(static_cast<Index>(t)) > 0.0)) {
            throw ValidationError("triangle " + std::to_string(t) + " is not counterclockwise");
        }
    }
    // Conformity: an edge is used at most twice and, if twice, with opposite orientation.
    std::map<std::array<Index, 2>, int> orient;
    for (const auto& tri : triangles_) {
        for (int k = 0; k < 3; ++k) {
            const Index a = tri.v[static_cast<std::size_t>(k)];
            const Index b = tri.v[static_cast<std::size_t>((k + 1) % 3)];
            auto& slot = orient[edge_key(a, b)];
            const int dir = a < b ? 1 : 2;
            if (slot & dir) {
                throw ValidationError("non-conforming mesh: edge " + std::to_string(a) + "-" + std::to_string(b) +
                                      " is used more than once with the same orientation");
            }
            slot |= dir;
        }
    }
    // Hanging nodes: a node lying strictly inside a boundary edge of some triangle.
    std::vector<std::array<Index, 2>> open_edges;
    for (const auto& [key, mask] : orient) {
        if (mask != 3) {
            open_edges.push_back(key);
        }
    }
    std::vector<Index> open_nodes;
    for (const auto& e : open_edges) {
        open_nodes.push_back(e[0]);
        open_nodes.push_back(e[1]);
    }
    std::sort(open_nodes.begin(), open_nodes.end());
    open_nodes.erase(std::unique(open_nodes.begin(), open_nodes.end()), open_nodes.end());
    for (const auto& e : open_edges) {
        const Point& a = nodes_[static_cast<std::size_t>(e[0])];
        const Point& b = nodes_[static_cast<std::size_t>(e[1])];
        const double len2 = (b.r - a.r) * (b.r - a.r) + (b.z - a.z) * (b.z - a.z);
        for (Index i : open_nodes) {
            if (i == e[0] || i == e[1]) {
                continue;
            }
            const Point& p = nodes_[static_cast<std::size_t>(i)];
            const double cross = (b.r - a.r) * (p.z - a.z) - (b.z - a.z) * (p.r - a.r);
            const double dot = (p.r - a.r) * (b.r - a.r) + (p.z - a.z) * (b.z - a.z);
            if (std::abs(cross) <= 1e-12 * len2 && dot > 0.0 && dot < len2) {
                throw ValidationError("non-conforming mesh: hanging node " + std::to_string(i));
            }
        }
    }
}

double Mesh::signed_area(Index triangle) const {
    const auto& t = triangles_[static_cast<std::size_t>(triangle)];
    return signed_area_of(nodes_[static_cast<std::size_t>(t.v[0])], nodes_[static_cast<std::size_t>(t.v[1])],
                          nodes_[static_cast<std::size_t>(t.v[2])]);
}

double Mesh::region_area(Region region) const {
    double sum = 0.0;
    for (Index t = 0; t < triangle_count(); ++t) {
        if (triangles_[static_cast<std::size_t>(t)].region == region) {
            sum += signed_area(t);
        }
    }
    return sum;
}

Index Mesh::region_triangle_count(Region region) const {
    return std::count_if(triangles_.begin(), triangles_.end(), [&](const Triangle& t) { return t.region == region; });
}

Index Mesh::edge_count() const { return static_cast<Index>(edge_multiplicities(*this).size()); }

std::vector<std::pair<std::array<Index, 2>, int>> edge_multiplicities(const Mesh& mesh) {
    std::map<std::array<Index, 2>, int> count;
    for (const auto& tri : mesh.triangles()) {
        for (int k = 0; k < 3; ++k) {
            ++count[edge_key(tri.v[static_cast<std::size_t>(k)], tri.v[static_cast<std::size_t>((k + 1) % 3)])];
        }
    }
    return {count.begin(), count.end()};
}

void GeometrySpec::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw DegenerateGeometry(what);
        }
    };
    require(outer_radius > 0 && height > 0 && air_gap > 0 && limb_radius > 0 && yoke_thickness > 0 &&
                outer_leg_thickness > 0 && winding_inner_radius > 0 && winding_thickness > 0 && winding_height > 0,
            "all geometry dimensions must be strictly positive");
    require(window_outer_radius() > window_inner_radius(), "window has no radial extent");
    require(window_top() > window_bottom(), "window has no axial extent");
    require(winding_inner_radius > window_inner_radius() && winding_outer_radius() < window_outer_radius(),
            "winding must lie strictly inside the window radially");
    require(winding_bottom() > window_bottom() && winding_top() < window_top(),
            "winding must lie strictly inside the window axially");
    require(gap_bottom() > 0.0 && gap_top() < height, "air gap leaves the core");
    require(gap_bottom() > window_bottom() && gap_top() < window_top(), "air gap must lie within the window height");
}

Region GeometrySpec::classify(double r, double z) const {
    if (r > winding_inner_radius && r < winding_outer_radius() && z > winding_bottom() && z < winding_top()) {
        return Region::FoilWinding;
    }
    if (r > window_inner_radius() && r < window_outer_radius() && z > window_bottom() && z < window_top()) {
        return Region::Air;
    }
    if (r < limb_radius && z > gap_bottom() && z < gap_top()) {
        return Region::AirGap;
    }
    return Region::Yoke;
}

double GeometrySpec::region_area(Region region) const {
    const double winding = winding_thickness * winding_height;
    const double window = (window_outer_radius() - window_inner_radius()) * (window_top() - window_bottom());
    const double gap = limb_radius * air_gap;
    switch (region) {
        case Region::FoilWinding: return winding;
        case Region::Air: return window - winding;
        case Region::AirGap: return gap;
        case Region::Yoke: return outer_radius * height - window - gap;
    }
    return 0.0;
}

namespace {

std::vector<double> subdivide(const std::vector<double>& breaks, double h, double lo, double hi, int min_cells) {
    std::vector<double> out{breaks.front()};
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double a = breaks[k];
        const double b = breaks[k + 1];
        const double len = b - a;
        int n = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
        const double mid = 0.5 * (a + b);
        if (mid > lo && mid < hi) {
            n = std::max(n, min_cells);
        }
        for (int i = 1; i < n; ++i) {
            out.push_back(a + len * static_cast<double>(i) / n);
        }
        out.push_back(b);
    }
    return out;
}

std::vector<double> sorted_breaks(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

template <typename Tag>
Mesh grid_mesh(const std::vector<double>& rs, const std::vector<double>& zs, Tag tag) {
    const auto nr = static_cast<Index>(rs.size());
    const auto nz = static_cast<Index>(zs.size());
    std::vector<Point> nodes;
    std::vector<bool> boundary;
    nodes.reserve(static_cast<std::size_t>(nr * nz));
    for (Index j = 0; j < nz; ++j) {
        for (Index i = 0; i < nr; ++i) {
            nodes.push_back({rs[static_cast<std::size_t>(i)], zs[static_cast<std::size_t>(j)]});
            boundary.push_back(i == 0 || i == nr - 1 || j == 0 || j == nz - 1);
        }
    }
    auto id = [nr](Index i, Index j) { return j * nr + i; };
    std::vector<Triangle> tris;
    tris.reserve(static_cast<std::size_t>(2 * (nr - 1) * (nz - 1)));
    for (Index j = 0; j + 1 < nz; ++j) {
        for (Index i = 0; i + 1 < nr; ++i) {
            const double rc = 0.5 * (rs[static_cast<std::size_t>(i)] + rs[static_cast<std::size_t>(i + 1)]);
            const double zc = 0.5 * (zs[static_cast<std::size_t>(j)] + zs[static_cast<std::size_t>(j + 1)]);
            const Region region = tag(rc, zc);
            tris.push_back({{id(i, j), id(i + 1, j), id(i + 1, j + 1)}, region});
            tris.push_back({{id(i, j), id(i + 1, j + 1), id(i, j + 1)}, region});
        }
    }
    return Mesh(std::move(nodes), std::move(tris), std::move(boundary));
}

}  // namespace

Mesh generate_parametric_mesh(const GeometrySpec& g, double h, const MeshOptions& options) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw DegenerateGeometry("target edge length must be positive");
    }
    g.validate();
    const auto rb = sorted_breaks({0.0, g.window_inner_radius(), g.winding_inner_radius, g.winding_outer_radius(),
                                   g.window_outer_radius(), g.outer_radius});
    const auto zb = sorted_breaks({0.0, g.window_bottom(), g.winding_bottom(), g.gap_bottom(), g.gap_top(),
                                   g.winding_top(), g.window_top(), g.height});
    const auto rs = subdivide(rb, h, g.winding_inner_radius, g.winding_outer_radius(), options.min_winding_cells);
    const auto zs = subdivide(zb, h, 0.0, 0.0, 1);
    Mesh mesh = grid_mesh(rs, zs, [&](double r, double z) { return g.classify(r, z); });
    for (Region region : kAllRegions) {
        if (!mesh.has_region(region)) {
            throw DegenerateGeometry("region " + std::string(region_name(region)) + " collapsed");
        }
    }
    return mesh;
}

Mesh generate_rectangle_mesh(double r0, double r1, double z0, double z1, double h, Region region) {
    if (!(r0 >= 0.0) || !(r1 > r0) || !(z1 > z0) || !(h > 0.0)) {
        throw DegenerateGeometry("rectangle must have positive extent, r0 >= 0 and h > 0");
    }
    const auto rs = subdivide({r0, r1}, h, 0.0, 0.0, 1);
    const auto zs = subdivide({z0, z1}, h, 0.0, 0.0, 1);
    return grid_mesh(rs, zs, [region](double, double) { return region; });
}

Mesh refine_uniform(const Mesh& mesh) {
    auto nodes = mesh.nodes();
    auto boundary = mesh.boundary();
    std::map<std::array<Index, 2>, int> multiplicity;
    for (const auto& [key, m] : edge_multiplicities(mesh)) {
        multiplicity[key] = m;
    }
    std::map<std::array<Index, 2>, Index> midpoint;
    auto mid = [&](Index a, Index b) {
        const auto key = edge_key(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) {
            return it->second;
        }
        const Point& pa = nodes[static_cast<std::size_t>(key[0])];
        const Point& pb = nodes[static_cast<std::size_t>(key[1])];
        const auto id = static_cast<Index>(nodes.size());
        nodes.push_back({0.5 * (pa.r + pb.r), 0.5 * (pa.z + pb.z)});
        // Midpoints of boundary edges stay on the Dirichlet boundary; a midpoint
        // of an interior edge joining two boundary nodes does not.
        boundary.push_back(multiplicity[key] == 1 && boundary[static_cast<std::size_t>(a)] &&
                           boundary[static_cast<std::size_t>(b)]);
        midpoint.emplace(key, id);
        return id;
    };
    std::vector<Triangle> tris;
    tris.reserve(mesh.triangles().size() * 4);
    for (const auto& t : mesh.triangles()) {
        const Index a = t.v[0], b = t.v[1], c = t.v[2];
        const Index ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
        tris.push_back({{a, ab, ca}, t.region});
        tris.push_back({{ab, b, bc}, t.region});
        tris.push_back({{ca, bc, c}, t.region});
        tris.push_back({{ab, bc, ca}, t.region});
    }
    return Mesh(std::move(nodes), std::move(tris), std::move(boundary));
}

}  // namespace foil
