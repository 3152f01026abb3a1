#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "topent/errors.hpp"

namespace topent {

// Coordinates are unit-normalized reals. Interval axes carry |a-b|, circle
// axes the wraparound distance on [0,1).
enum class AxisKind { Interval, Circle };

inline double axis_distance(AxisKind kind, double a, double b) {
  double d = std::abs(a - b);
  if (kind == AxisKind::Circle) {
    d = std::fmod(d, 1.0);
    d = std::min(d, 1.0 - d);
  }
  return d;
}

// Finite dense sample of a compact metric space: the computational stand-in
// for the phase space. Rows of points() are sample points, one column per
// axis; the metric is the coordinatewise max of the per-axis distances.
// Immutable after construction.
class SpaceSample {
 public:
  SpaceSample(Eigen::MatrixXd points, std::vector<AxisKind> axes, Eigen::VectorXd axis_mesh);

  Eigen::Index count() const { return points_.rows(); }
  Eigen::Index dim() const { return points_.cols(); }
  const Eigen::MatrixXd& points() const { return points_; }
  Eigen::VectorXd point(Eigen::Index i) const { return points_.row(i).transpose(); }
  const std::vector<AxisKind>& axes() const { return axes_; }

  // Supremum over the underlying space of the distance to the nearest sample
  // point; per-axis values kept for resolution guards on product spaces.
  double mesh() const { return mesh_; }
  const Eigen::VectorXd& axis_mesh() const { return axis_mesh_; }

  // "euclidean" for a single interval axis, "circle" for a single circle
  // axis, "max-product" otherwise.
  std::string metric_kind() const;

 private:
  Eigen::MatrixXd points_;
  std::vector<AxisKind> axes_;
  Eigen::VectorXd axis_mesh_;
  double mesh_;
};

double distance(const SpaceSample& space, const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& y);

// Uniform grid {k/(m-1) : 0 <= k <= m-1} on [0,1]; mesh is exactly 1/(2(m-1)).
SpaceSample interval_grid(Eigen::Index m);

// Uniform grid {k/m : 0 <= k <= m-1} on the circle; mesh 1/(2m).
SpaceSample circle_grid(Eigen::Index m);

// Cartesian product with the max metric; mesh is the max of the factor meshes.
SpaceSample product_space(const SpaceSample& a, const SpaceSample& b);

// Arbitrary point set; per-axis meshes are computed as exact covering radii
// of the coordinate projections.
SpaceSample sample_from_points(Eigen::MatrixXd points, std::vector<AxisKind> axes);

// Metric-ball entourage gamma_eps = {(x,y) : d(x,y) < eps}. Symmetric and
// open; gamma_{eps/2} composed with itself lies inside gamma_eps by the
// triangle inequality.
struct Entourage {
  double radius = 0.0;

  bool contains(const SpaceSample& space, const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& y) const {
    return distance(space, x, y) < radius;
  }
  Entourage half() const { return {0.5 * radius}; }
};

}  // namespace topent
