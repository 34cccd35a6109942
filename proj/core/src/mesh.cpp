#include "nvfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

namespace nvfem {

namespace {

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Cell> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells)) {
  const int nv = num_vertices();
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (int v : cells_[c]) {
      if (v < 0 || v >= nv) {
        throw std::invalid_argument("mesh: cell " + std::to_string(c) +
                                    " references vertex out of range");
      }
    }
    const auto& [a, b, d] = cells_[c];
    if (!(signed_area(vertices_[a], vertices_[b], vertices_[d]) > 0.0)) {
      throw std::invalid_argument("mesh: cell " + std::to_string(c) +
                                  " is not counterclockwise with positive area");
    }
  }

  // Edge numbering in order of first appearance while traversing cells.
  std::map<Edge, int> index;
  std::vector<int> edge_cells;
  cell_edges_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (int k = 0; k < 3; ++k) {
      int a = cells_[c][k];
      int b = cells_[c][(k + 1) % 3];
      Edge key{std::min(a, b), std::max(a, b)};
      auto [it, inserted] = index.emplace(key, num_edges());
      if (inserted) {
        edges_.push_back(key);
        edge_cells.push_back(0);
      }
      if (++edge_cells[it->second] > 2) {
        throw std::invalid_argument("mesh: edge shared by more than two cells");
      }
      cell_edges_[c][k] = it->second;
    }
  }

  boundary_vertex_.assign(vertices_.size(), false);
  boundary_edge_flag_.assign(edges_.size(), false);
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (int k = 0; k < 3; ++k) {
      const int e = cell_edges_[c][k];
      if (edge_cells[e] != 1) continue;
      const int a = cells_[c][k];
      const int b = cells_[c][(k + 1) % 3];
      const Point t = vertices_[b] - vertices_[a];
      BoundaryEdge be;
      be.vertices = {a, b};
      be.cell = static_cast<int>(c);
      be.local_edge = k;
      // Counterclockwise cell: the interior lies to the left of a -> b.
      be.normal = Point(t.y(), -t.x()).normalized();
      boundary_edges_.push_back(be);
      boundary_vertex_[a] = boundary_vertex_[b] = true;
      boundary_edge_flag_[e] = true;
    }
  }
}

Point Mesh::centroid(int cell) const {
  const auto& c = cells_[cell];
  return (vertices_[c[0]] + vertices_[c[1]] + vertices_[c[2]]) / 3.0;
}

double Mesh::area(int cell) const {
  const auto& c = cells_[cell];
  return signed_area(vertices_[c[0]], vertices_[c[1]], vertices_[c[2]]);
}

double Mesh::diameter(int cell) const {
  const auto& c = cells_[cell];
  double h = 0.0;
  for (int k = 0; k < 3; ++k) {
    h = std::max(h, (vertices_[c[k]] - vertices_[c[(k + 1) % 3]]).norm());
  }
  return h;
}

double Mesh::inradius(int cell) const {
  const auto& c = cells_[cell];
  double perimeter = 0.0;
  for (int k = 0; k < 3; ++k) {
    perimeter += (vertices_[c[k]] - vertices_[c[(k + 1) % 3]]).norm();
  }
  return 2.0 * area(cell) / perimeter;
}

Mesh uniform_square_mesh(int n) {
  if (n < 1) {
    throw std::invalid_argument("uniform_square_mesh: need at least one subdivision");
  }
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      vertices.emplace_back(-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n);
    }
  }
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };

  std::vector<Cell> cells;
  cells.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      cells.push_back({v00, v10, v11});
      cells.push_back({v00, v11, v01});
    }
  }
  return Mesh(std::move(vertices), std::move(cells));
}

MeshMetrics mesh_metrics(const Mesh& mesh) {
  MeshMetrics m;
  m.mu = mesh.num_cells() > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double hk = mesh.diameter(c);
    m.h = std::max(m.h, hk);
    m.mu = std::min(m.mu, mesh.inradius(c) / hk);
  }
  return m;
}

Mesh read_mesh(std::istream& in) {
  int nv = 0, nc = 0, nb = 0;
  if (!(in >> nv >> nc >> nb) || nv < 0 || nc < 0 || nb < 0) {
    throw std::invalid_argument("read_mesh: malformed header");
  }
  std::vector<Point> vertices(nv);
  for (auto& p : vertices) {
    if (!(in >> p.x() >> p.y())) throw std::invalid_argument("read_mesh: truncated vertex list");
  }
  std::vector<Cell> cells(nc);
  for (auto& c : cells) {
    if (!(in >> c[0] >> c[1] >> c[2])) throw std::invalid_argument("read_mesh: truncated cell list");
  }
  std::vector<Edge> listed(nb);
  for (auto& e : listed) {
    if (!(in >> e[0] >> e[1])) throw std::invalid_argument("read_mesh: truncated boundary list");
    if (e[0] > e[1]) std::swap(e[0], e[1]);
  }

  Mesh mesh(std::move(vertices), std::move(cells));

  std::vector<Edge> found;
  for (const auto& be : mesh.boundary_edges()) {
    found.push_back({std::min(be.vertices[0], be.vertices[1]),
                     std::max(be.vertices[0], be.vertices[1])});
  }
  std::sort(listed.begin(), listed.end());
  std::sort(found.begin(), found.end());
  if (listed != found) {
    throw std::invalid_argument("read_mesh: boundary edges do not match cell topology");
  }
  return mesh;
}

Mesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_mesh: cannot open " + path.string());
  return read_mesh(in);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << mesh.num_vertices() << ' ' << mesh.num_cells() << ' ' << mesh.boundary_edges().size()
      << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& p : mesh.vertices()) out << p.x() << ' ' << p.y() << '\n';
  out.precision(old_precision);
  for (const auto& c : mesh.cells()) out << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  for (const auto& be : mesh.boundary_edges()) {
    out << be.vertices[0] << ' ' << be.vertices[1] << '\n';
  }
}

void write_mesh(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_mesh: cannot open " + path.string());
  write_mesh(out, mesh);
}

}  // namespace nvfem
