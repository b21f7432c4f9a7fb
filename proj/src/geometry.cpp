#include "selfnorm/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>

#include "selfnorm/errors.hpp"
#include "selfnorm/model.hpp"

namespace selfnorm {

void Box2::validate() const {
  if (!(x_min < x_max) || !(y_min < y_max)) throw ArgumentError("box must have positive extent");
}

Eigen::Vector2d GridField::node(int i, int j) const {
  const double sx = (box.x_max - box.x_min) / (resolution - 1);
  const double sy = (box.y_max - box.y_min) / (resolution - 1);
  return {box.x_min + i * sx, box.y_min + j * sy};
}

double GridField::cell_diagonal() const {
  return std::hypot((box.x_max - box.x_min) / (resolution - 1),
                    (box.y_max - box.y_min) / (resolution - 1));
}

GridField sample_field(const ScalarField2& f, const Box2& box, int resolution) {
  box.validate();
  if (resolution < 16) throw ArgumentError("grid resolution must be at least 16");
  GridField grid{box, resolution, Eigen::MatrixXd(resolution, resolution)};
  for (int j = 0; j < resolution; ++j)
    for (int i = 0; i < resolution; ++i) grid.values(i, j) = f(grid.node(i, j));
  return grid;
}

std::size_t ContourSet::num_vertices() const {
  std::size_t total = 0;
  for (const Polyline& p : polylines) total += p.vertices.size();
  return total;
}

namespace {

// Grid edges are keyed by their lower-left node and orientation.
std::int64_t horizontal_key(int i, int j, int res) { return 2 * (std::int64_t{j} * res + i); }
std::int64_t vertical_key(int i, int j, int res) { return 2 * (std::int64_t{j} * res + i) + 1; }

struct Crossing {
  Eigen::Vector2d point;
  GridEdge edge;
};

Crossing locate(const ScalarField2& f, double level, Eigen::Vector2d a, Eigen::Vector2d b, double fa,
                double fb, int refine_iterations) {
  // fa and fb straddle the level; false position keeps the bracket.
  double ga = fa - level;
  double gb = fb - level;
  const GridEdge edge{a, b};
  auto interpolate = [&] { return Eigen::Vector2d(a + (ga / (ga - gb)) * (b - a)); };
  Eigen::Vector2d x = interpolate();
  for (int it = 0; it < refine_iterations; ++it) {
    const double gx = f(x) - level;
    if (gx == 0.0) break;
    if ((gx < 0.0) == (ga < 0.0)) {
      a = x;
      ga = gx;
    } else {
      b = x;
      gb = gx;
    }
    x = interpolate();
  }
  return {x, edge};
}

}  // namespace

ContourSet marching_squares(const ScalarField2& f, const Box2& box, int resolution, double level,
                            int refine_iterations) {
  if (refine_iterations < 0) throw ArgumentError("refine_iterations must be >= 0");
  const GridField grid = sample_field(f, box, resolution);
  ContourSet out;
  out.box = box;
  out.resolution = resolution;
  out.field_min = grid.values.minCoeff();
  out.field_max = grid.values.maxCoeff();
  if (out.field_max - out.field_min < 1e-12) {
    out.degenerate = true;
    out.covers_box = std::abs(out.field_min - level) <= 1e-12;
    return out;
  }

  const int res = resolution;
  const Eigen::MatrixXd& v = grid.values;
  auto above = [&](int i, int j) { return v(i, j) >= level; };

  std::unordered_map<std::int64_t, Crossing> crossings;
  auto crossing = [&](std::int64_t key, int i0, int j0, int i1, int j1) {
    auto it = crossings.find(key);
    if (it == crossings.end())
      it = crossings
               .emplace(key, locate(f, level, grid.node(i0, j0), grid.node(i1, j1), v(i0, j0),
                                    v(i1, j1), refine_iterations))
               .first;
    return key;
  };

  // Segments as pairs of edge keys, in cell-scan order.
  std::vector<std::array<std::int64_t, 2>> segments;
  for (int j = 0; j + 1 < res; ++j) {
    for (int i = 0; i + 1 < res; ++i) {
      const int mask = (above(i, j) ? 1 : 0) | (above(i + 1, j) ? 2 : 0) |
                       (above(i + 1, j + 1) ? 4 : 0) | (above(i, j + 1) ? 8 : 0);
      if (mask == 0 || mask == 15) continue;
      const auto bottom = [&] { return crossing(horizontal_key(i, j, res), i, j, i + 1, j); };
      const auto right = [&] { return crossing(vertical_key(i + 1, j, res), i + 1, j, i + 1, j + 1); };
      const auto top = [&] { return crossing(horizontal_key(i, j + 1, res), i, j + 1, i + 1, j + 1); };
      const auto left = [&] { return crossing(vertical_key(i, j, res), i, j, i, j + 1); };
      switch (mask) {
        case 1: case 14: segments.push_back({left(), bottom()}); break;
        case 2: case 13: segments.push_back({bottom(), right()}); break;
        case 3: case 12: segments.push_back({left(), right()}); break;
        case 4: case 11: segments.push_back({right(), top()}); break;
        case 6: case 9: segments.push_back({bottom(), top()}); break;
        case 7: case 8: segments.push_back({left(), top()}); break;
        case 5: case 10: {
          const double centre = 0.25 * (v(i, j) + v(i + 1, j) + v(i + 1, j + 1) + v(i, j + 1));
          const bool centre_above = centre >= level;
          // Corners 0 and 2 share a state in mask 5; the centre decides
          // whether they connect through the middle of the cell.
          if ((mask == 5) == centre_above) {
            segments.push_back({left(), top()});
            segments.push_back({bottom(), right()});
          } else {
            segments.push_back({left(), bottom()});
            segments.push_back({right(), top()});
          }
          break;
        }
        default: break;
      }
    }
  }

  // Every edge key belongs to at most two segments; chain them into polylines.
  std::unordered_map<std::int64_t, std::array<int, 2>> incident;
  for (int s = 0; s < static_cast<int>(segments.size()); ++s) {
    for (std::int64_t key : segments[static_cast<std::size_t>(s)]) {
      auto [it, fresh] = incident.try_emplace(key, std::array<int, 2>{s, -1});
      if (!fresh) it->second[1] = s;
    }
  }
  std::vector<bool> used(segments.size(), false);
  auto other_segment = [&](std::int64_t key, int s) {
    const auto& pair = incident.at(key);
    return pair[0] == s ? pair[1] : pair[0];
  };
  auto other_key = [&](int s, std::int64_t key) {
    const auto& seg = segments[static_cast<std::size_t>(s)];
    return seg[0] == key ? seg[1] : seg[0];
  };
  auto walk = [&](int start, std::int64_t from_key) {
    std::vector<std::int64_t> keys;
    int s = start;
    std::int64_t key = from_key;
    while (true) {
      used[static_cast<std::size_t>(s)] = true;
      key = other_key(s, key);
      keys.push_back(key);
      const int next = other_segment(key, s);
      if (next < 0 || used[static_cast<std::size_t>(next)]) break;
      s = next;
    }
    return keys;
  };

  for (int s = 0; s < static_cast<int>(segments.size()); ++s) {
    if (used[static_cast<std::size_t>(s)]) continue;
    const auto seg = segments[static_cast<std::size_t>(s)];
    // Extend forwards from seg[0] through seg[1], then backwards from seg[0].
    std::vector<std::int64_t> forward = walk(s, seg[0]);
    std::vector<std::int64_t> keys;
    const int back = other_segment(seg[0], s);
    bool closed = false;
    if (back >= 0 && used[static_cast<std::size_t>(back)]) {
      closed = forward.back() == seg[0];
      if (closed) forward.pop_back();
    }
    if (back >= 0 && !used[static_cast<std::size_t>(back)]) {
      std::vector<std::int64_t> backward = walk(back, seg[0]);
      keys.assign(backward.rbegin(), backward.rend());
    }
    keys.push_back(seg[0]);
    keys.insert(keys.end(), forward.begin(), forward.end());

    Polyline line;
    line.closed = closed;
    for (std::int64_t key : keys) {
      const Crossing& c = crossings.at(key);
      line.vertices.push_back(c.point);
      line.edges.push_back(c.edge);
    }
    out.polylines.push_back(std::move(line));
  }
  return out;
}

ContourSet levelset_input_space(const ParamVector& eta, const FeatureMap& fm, const LabelSpace& ls,
                                const Box2& box, int resolution, double level,
                                int refine_iterations) {
  if (fm.input_dim() != 2) throw ConfigError("input-space level sets need two-dimensional inputs");
  fm.check_params(eta);
  const ScalarField2 f = [&](const Eigen::Vector2d& x) {
    return log_partition(Eigen::VectorXd(x), eta, fm, ls);
  };
  return marching_squares(f, box, resolution, level, refine_iterations);
}

double mean_square_normalizer(const Eigen::Vector2d& eta, const InputDistribution& inputs,
                              const FeatureMap& fm, const LabelSpace& ls) {
  if (fm.param_dim() != 2) throw ConfigError("parameter contours need a two-parameter model");
  ParamVector params(fm.num_blocks(), fm.block_dim());
  params.values() = eta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < inputs.size(); ++i) {
    const double a = log_partition(inputs.points.row(i).transpose(), params, fm, ls);
    total += inputs.weights(i) * a * a;
  }
  return total;
}

ContourSet param_feasibility_contour(const InputDistribution& inputs, const FeatureMap& fm,
                                     const LabelSpace& ls, const Box2& box, int resolution,
                                     double delta, int refine_iterations) {
  inputs.validate();
  if (delta < 0.0) throw ArgumentError("delta must be >= 0");
  const ScalarField2 f = [&](const Eigen::Vector2d& eta) {
    return mean_square_normalizer(eta, inputs, fm, ls);
  };
  return marching_squares(f, box, resolution, delta * delta, refine_iterations);
}

Eigen::Index feasible_node_count(const InputDistribution& inputs, const FeatureMap& fm,
                                 const LabelSpace& ls, const Box2& box, int resolution,
                                 double delta) {
  inputs.validate();
  const GridField grid = sample_field(
      [&](const Eigen::Vector2d& eta) { return mean_square_normalizer(eta, inputs, fm, ls); }, box,
      resolution);
  return (grid.values.array() <= delta * delta).count();
}

double max_abs_normalizer(const Eigen::MatrixXd& points, const ParamVector& eta,
                          const FeatureMap& fm, const LabelSpace& ls) {
  if (points.rows() < 1) throw ArgumentError("point set is empty");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    worst = std::max(worst, std::abs(log_partition(points.row(i).transpose(), eta, fm, ls)));
  return worst;
}

}  // namespace selfnorm
