#pragma once

#include "foilmqs/linalg.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace foil {

enum class Region : std::uint8_t { Air = 0, Yoke = 1, AirGap = 2, FoilWinding = 3 };

inline constexpr std::array<Region, 4> kAllRegions{Region::Air, Region::Yoke, Region::AirGap, Region::FoilWinding};

std::string_view region_name(Region region);
std::optional<Region> parse_region(std::string_view name);

/// A point of the meridian half-plane, r >= 0 (metres).
struct Point {
    double r = 0.0;
    double z = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

struct Triangle {
    std::array<Index, 3> v{};
    Region region = Region::Air;
    friend bool operator==(const Triangle&, const Triangle&) = default;
};

/// Conforming triangulation of the axisymmetric (r, z) cross-section.
class Mesh {
public:
    Mesh() = default;

    /// Validates all invariants; throws ValidationError otherwise.
    Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles, std::vector<bool> boundary);

    const std::vector<Point>& nodes() const noexcept { return nodes_; }
    const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    const std::vector<bool>& boundary() const noexcept { return boundary_; }

    Index node_count() const noexcept { return static_cast<Index>(nodes_.size()); }
    Index triangle_count() const noexcept { return static_cast<Index>(triangles_.size()); }
    bool is_boundary(Index node) const { return boundary_[static_cast<std::size_t>(node)]; }

    double signed_area(Index triangle) const;
    double region_area(Region region) const;
    Index region_triangle_count(Region region) const;
    bool has_region(Region region) const { return region_triangle_count(region) > 0; }

    /// Number of distinct edges.
    Index edge_count() const;

    friend bool operator==(const Mesh&, const Mesh&) = default;

private:
    std::vector<Point> nodes_;
    std::vector<Triangle> triangles_;
    std::vector<bool> boundary_;
};

/// Edge -> number of adjacent triangles, keyed by the sorted node pair.
std::vector<std::pair<std::array<Index, 2>, int>> edge_multiplicities(const Mesh& mesh);

/// Axisymmetric cross-section of a shell-type core with a central air gap and a
/// foil winding in the window. All lengths in metres.
///
///   z
///   ^  +-----------------------------+ height
///   |  |            yoke             |
///   |  +------+---------------+      |
///   |  | limb |    window     | outer|
///   |  +------+  +-------+    | leg  |
///   |  | gap  |  |winding|    |      |
///   |  +------+  +-------+    |      |
///   |  | limb |               |      |
///   |  +------+---------------+      |
///   |  |            yoke             |
///   +--+-----------------------------+--> r
struct GeometrySpec {
    double outer_radius = 40.0e-3;
    double height = 76.2e-3;
    double air_gap = 4.2e-3;
    double limb_radius = 9.9e-3;
    double yoke_thickness = 9.9e-3;   // top and bottom plates
    double outer_leg_thickness = 10.45e-3;
    double winding_inner_radius = 12.6e-3;
    double winding_thickness = 14.0e-3;   // N * b
    double winding_height = 50.0e-3;
    /// Axial centre of winding and air gap; defaults to height / 2 when unset.
    std::optional<double> center_z;

    double mid_z() const { return center_z.value_or(0.5 * height); }
    double window_inner_radius() const { return limb_radius; }
    double window_outer_radius() const { return outer_radius - outer_leg_thickness; }
    double window_bottom() const { return yoke_thickness; }
    double window_top() const { return height - yoke_thickness; }
    double winding_outer_radius() const { return winding_inner_radius + winding_thickness; }
    double winding_bottom() const { return mid_z() - 0.5 * winding_height; }
    double winding_top() const { return mid_z() + 0.5 * winding_height; }
    double gap_bottom() const { return mid_z() - 0.5 * air_gap; }
    double gap_top() const { return mid_z() + 0.5 * air_gap; }

    /// Throws DegenerateGeometry when a region collapses or the winding leaves the window.
    void validate() const;

    /// Region containing (r, z) (interior points).
    Region classify(double r, double z) const;

    /// Exact cross-sectional area of a region (unions of rectangles).
    double region_area(Region region) const;
};

struct MeshOptions {
    /// Minimum number of element layers across the winding thickness.
    int min_winding_cells = 2;
};

/// Structured rectangle-decomposition mesh of the core cross-section with
/// target edge length h. Outer boundary and symmetry axis are flagged as
/// Dirichlet nodes.
Mesh generate_parametric_mesh(const GeometrySpec& geometry, double h, const MeshOptions& options = {});

/// Rectangle [r0, r1] x [z0, z1] gridded at pitch ~h with a single region tag;
/// all boundary nodes flagged.
Mesh generate_rectangle_mesh(double r0, double r1, double z0, double z1, double h, Region region = Region::Air);

/// Red refinement: each triangle is split into four, tags inherited.
Mesh refine_uniform(const Mesh& mesh);

/// Plain-text "foilmesh v1" format.
std::string write_mesh(const Mesh& mesh);
Mesh read_mesh(std::string_view text);

}  // namespace foil
