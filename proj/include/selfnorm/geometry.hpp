#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "selfnorm/feature_map.hpp"
#include "selfnorm/label_space.hpp"
#include "selfnorm/param_vector.hpp"
#include "selfnorm/variance_analysis.hpp"

namespace selfnorm {

struct Box2 {
  double x_min = -4.0;
  double x_max = 4.0;
  double y_min = -4.0;
  double y_max = 4.0;

  void validate() const;
};

using ScalarField2 = std::function<double(const Eigen::Vector2d&)>;

/// Samples of a scalar field on a resolution x resolution lattice of nodes
/// spanning the box; values(i, j) is the node at column i, row j.
struct GridField {
  Box2 box;
  int resolution = 0;
  Eigen::MatrixXd values;

  Eigen::Vector2d node(int i, int j) const;
  double cell_diagonal() const;
};

GridField sample_field(const ScalarField2& f, const Box2& box, int resolution);

/// The grid edge a contour vertex was found on.
struct GridEdge {
  Eigen::Vector2d a;
  Eigen::Vector2d b;
};

struct Polyline {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<GridEdge> edges;  // generating edge of each vertex
  bool closed = false;
};

struct ContourSet {
  std::vector<Polyline> polylines;
  /// Field constant to within 1e-12 over the grid; nothing is contoured.
  bool degenerate = false;
  /// Degenerate and equal to the level: the whole box is on the level set.
  bool covers_box = false;
  double field_min = 0.0;
  double field_max = 0.0;
  Box2 box;
  int resolution = 0;

  std::size_t num_vertices() const;
};

/// Marching squares for {f = level} with linear interpolation on crossing
/// edges, refined by `refine_iterations` bracketed false-position steps along
/// each edge. Saddle cells are split by the value at the cell centre.
ContourSet marching_squares(const ScalarField2& f, const Box2& box, int resolution, double level,
                            int refine_iterations = 3);

/// {x in R^2 : A(x, eta) = level} for a model with two-dimensional inputs.
ContourSet levelset_input_space(const ParamVector& eta, const FeatureMap& fm, const LabelSpace& ls,
                                const Box2& box, int resolution, double level,
                                int refine_iterations = 3);

/// E_p[A(X, eta)^2] over a weighted input set, for a 2-parameter model.
double mean_square_normalizer(const Eigen::Vector2d& eta, const InputDistribution& inputs,
                              const FeatureMap& fm, const LabelSpace& ls);

/// {eta in R^2 : E_p[A(X, eta)^2] = delta^2}.
ContourSet param_feasibility_contour(const InputDistribution& inputs, const FeatureMap& fm,
                                     const LabelSpace& ls, const Box2& box, int resolution,
                                     double delta, int refine_iterations = 3);

/// Number of lattice nodes with E_p[A^2] <= delta^2.
Eigen::Index feasible_node_count(const InputDistribution& inputs, const FeatureMap& fm,
                                 const LabelSpace& ls, const Box2& box, int resolution,
                                 double delta);

/// max over the rows of `points` of |A(x, eta)|.
double max_abs_normalizer(const Eigen::MatrixXd& points, const ParamVector& eta,
                          const FeatureMap& fm, const LabelSpace& ls);

}  // namespace selfnorm
