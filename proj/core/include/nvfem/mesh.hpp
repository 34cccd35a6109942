#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace nvfem {

using Point = Eigen::Vector2d;
using Cell = std::array<int, 3>;
using Edge = std::array<int, 2>;

/// A boundary edge together with the cell that owns it.
///
/// `local_edge` k joins the owning cell's local vertices k and (k+1) mod 3,
/// which is also the orientation of `vertices`.
struct BoundaryEdge {
  Edge vertices;
  int cell = -1;
  int local_edge = -1;
  Point normal;  // unit, outward
};

/// Conforming triangulation with counterclockwise cells.
///
/// Edges are numbered globally (each stored with ascending vertex indices);
/// `cell_edges(c)[k]` is the edge joining local vertices k and (k+1) mod 3.
/// The mesh is immutable after construction.
class Mesh {
 public:
  /// Builds the edge and boundary topology. Throws std::invalid_argument if
  /// an index is out of range, a cell has non-positive signed area, or an
  /// edge is shared by more than two cells.
  Mesh(std::vector<Point> vertices, std::vector<Cell> cells);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  const std::array<int, 3>& cell_edges(int cell) const { return cell_edges_[cell]; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  bool is_boundary_vertex(int v) const { return boundary_vertex_[v]; }
  bool is_boundary_edge(int e) const { return boundary_edge_flag_[e]; }

  const Point& vertex(int v) const { return vertices_[v]; }
  Point centroid(int cell) const;
  double area(int cell) const;
  double diameter(int cell) const;
  double inradius(int cell) const;

 private:
  std::vector<Point> vertices_;
  std::vector<Cell> cells_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> cell_edges_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<bool> boundary_vertex_;
  std::vector<bool> boundary_edge_flag_;
};

/// Uniform mesh of (-1,1)^2 with n subdivisions per side; each grid square
/// is split along its bottom-left to top-right diagonal.
Mesh uniform_square_mesh(int n);

struct MeshMetrics {
  double h = 0.0;   // max cell diameter
  double mu = 0.0;  // min inradius / diameter
};

MeshMetrics mesh_metrics(const Mesh& mesh);

/// Plain-text mesh format: `nv nc nb`, then nv lines `x y`, nc lines
/// `i j k` and nb lines `i j` (0-based). Normals are recomputed on load and
/// the listed boundary edges must match the cell topology.
Mesh read_mesh(std::istream& in);
Mesh read_mesh(const std::filesystem::path& path);
void write_mesh(std::ostream& out, const Mesh& mesh);
void write_mesh(const std::filesystem::path& path, const Mesh& mesh);

}  // namespace nvfem
