#include "nvfem/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nvfem {

namespace {

// Orbit of (a, a, 1 - 2a) under vertex permutations.
void add_orbit3(TriangleQuadrature& q, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  q.points.emplace_back(a, a, b);
  q.points.emplace_back(a, b, a);
  q.points.emplace_back(b, a, a);
  q.weights.insert(q.weights.end(), 3, w);
}

// Orbit of (a, b, 1 - a - b), all six permutations.
void add_orbit6(TriangleQuadrature& q, double a, double b, double w) {
  const double c = 1.0 - a - b;
  q.points.emplace_back(a, b, c);
  q.points.emplace_back(a, c, b);
  q.points.emplace_back(b, a, c);
  q.points.emplace_back(b, c, a);
  q.points.emplace_back(c, a, b);
  q.points.emplace_back(c, b, a);
  q.weights.insert(q.weights.end(), 6, w);
}

// Weights below are for unit reference measure and scaled by 1/2 at the end.
TriangleQuadrature make_degree1() {
  TriangleQuadrature q;
  q.points.emplace_back(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
  q.weights.push_back(1.0);
  q.degree = 1;
  return q;
}

TriangleQuadrature make_degree2() {
  TriangleQuadrature q;
  add_orbit3(q, 1.0 / 6.0, 1.0 / 3.0);
  q.degree = 2;
  return q;
}

// Dunavant 6-point rule.
TriangleQuadrature make_degree4() {
  TriangleQuadrature q;
  add_orbit3(q, 0.44594849091596486825, 0.22338158967801099997);
  add_orbit3(q, 0.091576213509771127269, 0.10995174365532233337);
  q.degree = 4;
  return q;
}

// Dunavant 12-point rule.
TriangleQuadrature make_degree6() {
  TriangleQuadrature q;
  add_orbit3(q, 0.24928674517091080459, 0.11678627572637874319);
  add_orbit3(q, 0.063089014491502087640, 0.050844906370206624903);
  add_orbit6(q, 0.053145049844817206569, 0.31035245103378400477, 0.082851075618373982621);
  q.degree = 6;
  return q;
}

TriangleQuadrature halve(TriangleQuadrature q) {
  for (auto& w : q.weights) w *= 0.5;
  return q;
}

EdgeQuadrature gauss_legendre(int npoints) {
  // Nodes and weights on [-1,1], mapped to [0,1].
  std::vector<double> x, w;
  switch (npoints) {
    case 1:
      x = {0.0};
      w = {2.0};
      break;
    case 2:
      x = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
      w = {1.0, 1.0};
      break;
    case 3:
      x = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    case 4: {
      const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(1.2));
      const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(1.2));
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      x = {-b, -a, a, b};
      w = {wb, wa, wa, wb};
      break;
    }
    default:
      throw std::invalid_argument("edge_quadrature: unsupported point count");
  }
  EdgeQuadrature q;
  for (std::size_t i = 0; i < x.size(); ++i) {
    q.points.push_back(0.5 * (x[i] + 1.0));
    q.weights.push_back(0.5 * w[i]);
  }
  q.degree = 2 * npoints - 1;
  return q;
}

}  // namespace

const TriangleQuadrature& triangle_quadrature(int degree) {
  static const TriangleQuadrature rules[] = {halve(make_degree1()), halve(make_degree2()),
                                             halve(make_degree4()), halve(make_degree6())};
  for (const auto& r : rules) {
    if (r.degree >= degree) return r;
  }
  throw std::invalid_argument("triangle_quadrature: no rule of degree " + std::to_string(degree));
}

const EdgeQuadrature& edge_quadrature(int degree) {
  static const EdgeQuadrature rules[] = {gauss_legendre(1), gauss_legendre(2), gauss_legendre(3),
                                         gauss_legendre(4)};
  for (const auto& r : rules) {
    if (r.degree >= degree) return r;
  }
  throw std::invalid_argument("edge_quadrature: no rule of degree " + std::to_string(degree));
}

}  // namespace nvfem
