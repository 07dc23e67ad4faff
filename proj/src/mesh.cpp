#include "csh/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "csh/error.hpp"

namespace csh {

namespace {

Vec3 sub(const Vec3& x, const Vec3& y) { return {x[0] - y[0], x[1] - y[1], x[2] - y[2]}; }
double dot3(const Vec3& x, const Vec3& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }
Vec3 cross(const Vec3& x, const Vec3& y) {
  return {x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]};
}
double norm3(const Vec3& x) { return std::sqrt(dot3(x, x)); }
Vec3 normalized(const Vec3& x) {
  const double s = norm3(x);
  return {x[0] / s, x[1] / s, x[2] / s};
}

// cot of the angle at `o` in triangle (o, p, q).
double cot_at(const Vec3& o, const Vec3& p, const Vec3& q) {
  const Vec3 u = sub(p, o);
  const Vec3 v = sub(q, o);
  return dot3(u, v) / norm3(cross(u, v));
}

void icosahedron(std::vector<Vec3>& V, std::vector<std::array<int, 3>>& F) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  V = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
       {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : V) v = normalized(v);
  F = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
       {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
       {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
}

void subdivide(std::vector<Vec3>& V, std::vector<std::array<int, 3>>& F) {
  std::map<std::pair<int, int>, int> mid;
  auto midpoint = [&](int i, int j) {
    const auto key = std::minmax(i, j);
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    const Vec3& a = V[i];
    const Vec3& b = V[j];
    V.push_back(normalized({a[0] + b[0], a[1] + b[1], a[2] + b[2]}));
    const int idx = static_cast<int>(V.size()) - 1;
    mid.emplace(key, idx);
    return idx;
  };
  std::vector<std::array<int, 3>> out;
  out.reserve(F.size() * 4);
  for (const auto& f : F) {
    const int a = midpoint(f[0], f[1]);
    const int b = midpoint(f[1], f[2]);
    const int c = midpoint(f[2], f[0]);
    out.push_back({f[0], a, c});
    out.push_back({f[1], b, a});
    out.push_back({f[2], c, b});
    out.push_back({a, b, c});
  }
  F = std::move(out);
}

}  // namespace

double chordal_distance(const Vec3& x, const Vec3& y) { return norm3(sub(x, y)); }

double geodesic_distance(const Vec3& x, const Vec3& y) {
  return std::atan2(norm3(cross(x, y)), dot3(x, y));
}

SphereMesh build_icosphere(int level) {
  if (level < 0 || level > kMaxMeshLevel) {
    std::ostringstream msg;
    msg << "mesh level " << level << " outside [0, " << kMaxMeshLevel << "]";
    throw Error(ErrorKind::ValidationError, msg.str());
  }
  SphereMesh m;
  m.level = level;
  icosahedron(m.vertices, m.faces);
  for (int l = 0; l < level; ++l) subdivide(m.vertices, m.faces);
  const int n = m.vertex_count();

  std::map<std::pair<int, int>, double> weight;
  m.areas.assign(n, 0.0);
  for (const auto& f : m.faces) {
    const Vec3& p0 = m.vertices[f[0]];
    const Vec3& p1 = m.vertices[f[1]];
    const Vec3& p2 = m.vertices[f[2]];
    const double c0 = cot_at(p0, p1, p2);
    const double c1 = cot_at(p1, p2, p0);
    const double c2 = cot_at(p2, p0, p1);
    weight[std::minmax(f[1], f[2])] += 0.5 * c0;
    weight[std::minmax(f[2], f[0])] += 0.5 * c1;
    weight[std::minmax(f[0], f[1])] += 0.5 * c2;
    const double area = 0.5 * norm3(cross(sub(p1, p0), sub(p2, p0)));
    m.total_area += area;
    if (c0 >= 0.0 && c1 >= 0.0 && c2 >= 0.0) {
      const double l01 = dot3(sub(p1, p0), sub(p1, p0));
      const double l12 = dot3(sub(p2, p1), sub(p2, p1));
      const double l20 = dot3(sub(p0, p2), sub(p0, p2));
      m.areas[f[0]] += (l01 * c2 + l20 * c1) / 8.0;
      m.areas[f[1]] += (l01 * c2 + l12 * c0) / 8.0;
      m.areas[f[2]] += (l12 * c0 + l20 * c1) / 8.0;
    } else {
      const double c[3] = {c0, c1, c2};
      for (int k = 0; k < 3; ++k) m.areas[f[k]] += (c[k] < 0.0 ? 0.5 : 0.25) * area;
    }
  }
  m.area_error = std::abs(m.total_area - 4.0 * std::numbers::pi) / (4.0 * std::numbers::pi);

  std::vector<Triplet> trip;
  trip.reserve(4 * weight.size() + n);
  std::vector<double> diag(n, 0.0);
  std::vector<double> spacing(n, 0.0);
  std::vector<int> degree(n, 0);
  m.min_edge_weight = weight.empty() ? 0.0 : weight.begin()->second;
  double edge_sum = 0.0;
  m.edges.reserve(weight.size());
  for (const auto& [e, w] : weight) {
    m.edges.push_back({e.first, e.second});
    m.min_edge_weight = std::min(m.min_edge_weight, w);
    if (w < 0.0) ++m.negative_weights;
    trip.push_back({e.first, e.second, -w});
    trip.push_back({e.second, e.first, -w});
    diag[e.first] += w;
    diag[e.second] += w;
    const double len = chordal_distance(m.vertices[e.first], m.vertices[e.second]);
    edge_sum += len;
    spacing[e.first] += len;
    spacing[e.second] += len;
    ++degree[e.first];
    ++degree[e.second];
  }
  for (int i = 0; i < n; ++i) {
    trip.push_back({i, i, diag[i]});
    spacing[i] /= degree[i];
  }
  m.stiffness = csr_from_triplets(n, std::move(trip));
  m.vertex_spacing = std::move(spacing);
  m.mean_edge = edge_sum / static_cast<double>(m.edges.size());
  return m;
}

void apply_laplacian(const SphereMesh& mesh, std::span<const double> u, std::span<double> out,
                     const VectorOps& ops) {
  ops.spmv(mesh.stiffness, u, out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -out[i] / mesh.areas[i];
}

int nearest_vertex(const SphereMesh& mesh, const Vec3& direction) {
  const Vec3 d = normalized(direction);
  int best = 0;
  double best_dot = -2.0;
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const double c = dot3(mesh.vertices[i], d);
    if (c > best_dot) {
      best_dot = c;
      best = i;
    }
  }
  return best;
}

std::vector<StringPoint> snap_points(const SphereMesh& mesh, std::span<const PointSpec> points) {
  std::vector<StringPoint> out;
  for (const auto& p : points) {
    if (p.multiplicity < 1) throw Error(ErrorKind::ValidationError, "multiplicity must be >= 1");
    if (!(norm3(p.direction) > 0.0)) throw Error(ErrorKind::ValidationError, "zero direction");
    const int v = nearest_vertex(mesh, p.direction);
    for (const auto& q : out) {
      if (q.vertex == v) {
        std::ostringstream msg;
        msg << "two string points snap to vertex " << v << "; declare a multiplicity instead";
        throw Error(ErrorKind::CoincidentPointsUnresolvable, msg.str());
      }
    }
    out.push_back({v, p.multiplicity});
  }
  return out;
}

std::vector<PointSpec> tetrahedral_points() {
  // Best-separated quadruple of level-1 vertices (max of the min pairwise
  // angle); first in index order among ties.
  const SphereMesh coarse = build_icosphere(1);
  const int n = coarse.vertex_count();
  std::array<int, 4> best{0, 1, 2, 3};
  double best_sep = -1.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          const int q[4] = {i, j, k, l};
          double sep = 4.0;
          for (int x = 0; x < 4; ++x)
            for (int y = x + 1; y < 4; ++y)
              sep = std::min(sep, geodesic_distance(coarse.vertices[q[x]], coarse.vertices[q[y]]));
          if (sep > best_sep + 1e-12) {
            best_sep = sep;
            best = {i, j, k, l};
          }
        }
  std::vector<PointSpec> out;
  for (int v : best) out.push_back({coarse.vertices[v], 1});
  return out;
}

std::vector<PointSpec> spread_points(int count) {
  if (count == 4) return tetrahedral_points();
  const SphereMesh coarse = build_icosphere(1);
  const int n = coarse.vertex_count();
  if (count < 1 || count > n) {
    throw Error(ErrorKind::ValidationError, "spread_points: count must be in [1, 42]");
  }
  std::vector<int> chosen{0};
  std::vector<double> dist(n);
  for (int i = 0; i < n; ++i) dist[i] = geodesic_distance(coarse.vertices[i], coarse.vertices[0]);
  while (static_cast<int>(chosen.size()) < count) {
    int far = 0;
    for (int i = 1; i < n; ++i) {
      if (dist[i] > dist[far] + 1e-12) far = i;
    }
    chosen.push_back(far);
    for (int i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], geodesic_distance(coarse.vertices[i], coarse.vertices[far]));
    }
  }
  std::vector<PointSpec> out;
  for (int v : chosen) out.push_back({coarse.vertices[v], 1});
  return out;
}

}  // namespace csh
