#include "topent/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace topent {

namespace {

double covering_radius(std::vector<double> coords, AxisKind kind) {
  std::sort(coords.begin(), coords.end());
  double r = 0.0;
  if (kind == AxisKind::Interval) {
    r = std::max(coords.front() - 0.0, 1.0 - coords.back());
    for (std::size_t i = 1; i < coords.size(); ++i) {
      r = std::max(r, 0.5 * (coords[i] - coords[i - 1]));
    }
  } else {
    double max_gap = coords.front() + 1.0 - coords.back();  // wraparound gap
    for (std::size_t i = 1; i < coords.size(); ++i) {
      max_gap = std::max(max_gap, coords[i] - coords[i - 1]);
    }
    r = 0.5 * max_gap;
  }
  return r;
}

}  // namespace

SpaceSample::SpaceSample(Eigen::MatrixXd points, std::vector<AxisKind> axes,
                         Eigen::VectorXd axis_mesh)
    : points_(std::move(points)), axes_(std::move(axes)), axis_mesh_(std::move(axis_mesh)) {
  if (points_.rows() == 0) throw InvalidArgument("space sample must be nonempty");
  if (points_.cols() != static_cast<Eigen::Index>(axes_.size()) ||
      points_.cols() != axis_mesh_.size()) {
    throw InvalidArgument("space sample axis metadata does not match point dimension");
  }
  mesh_ = axis_mesh_.maxCoeff();
  if (!(mesh_ > 0.0)) throw InvalidArgument("space sample mesh must be positive");
}

std::string SpaceSample::metric_kind() const {
  if (dim() == 1) return axes_[0] == AxisKind::Interval ? "euclidean" : "circle";
  return "max-product";
}

double distance(const SpaceSample& space, const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != space.dim() || y.size() != space.dim()) {
    throw InvalidArgument("distance: point dimension does not match space");
  }
  double d = 0.0;
  for (Eigen::Index a = 0; a < space.dim(); ++a) {
    d = std::max(d, axis_distance(space.axes()[static_cast<std::size_t>(a)], x[a], y[a]));
  }
  return d;
}

SpaceSample interval_grid(Eigen::Index m) {
  if (m < 2) throw InvalidArgument("interval_grid: need at least 2 points");
  Eigen::MatrixXd pts(m, 1);
  for (Eigen::Index k = 0; k < m; ++k) {
    pts(k, 0) = static_cast<double>(k) / static_cast<double>(m - 1);
  }
  Eigen::VectorXd mesh(1);
  mesh[0] = 1.0 / (2.0 * static_cast<double>(m - 1));
  return SpaceSample(std::move(pts), {AxisKind::Interval}, std::move(mesh));
}

SpaceSample circle_grid(Eigen::Index m) {
  if (m < 2) throw InvalidArgument("circle_grid: need at least 2 points");
  Eigen::MatrixXd pts(m, 1);
  for (Eigen::Index k = 0; k < m; ++k) {
    pts(k, 0) = static_cast<double>(k) / static_cast<double>(m);
  }
  Eigen::VectorXd mesh(1);
  mesh[0] = 1.0 / (2.0 * static_cast<double>(m));
  return SpaceSample(std::move(pts), {AxisKind::Circle}, std::move(mesh));
}

SpaceSample product_space(const SpaceSample& a, const SpaceSample& b) {
  Eigen::Index rows = a.count() * b.count();
  Eigen::Index cols = a.dim() + b.dim();
  Eigen::MatrixXd pts(rows, cols);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < a.count(); ++i) {
    for (Eigen::Index j = 0; j < b.count(); ++j, ++r) {
      pts.block(r, 0, 1, a.dim()) = a.points().row(i);
      pts.block(r, a.dim(), 1, b.dim()) = b.points().row(j);
    }
  }
  std::vector<AxisKind> axes(a.axes());
  axes.insert(axes.end(), b.axes().begin(), b.axes().end());
  Eigen::VectorXd mesh(cols);
  mesh.head(a.dim()) = a.axis_mesh();
  mesh.tail(b.dim()) = b.axis_mesh();
  return SpaceSample(std::move(pts), std::move(axes), std::move(mesh));
}

SpaceSample sample_from_points(Eigen::MatrixXd points, std::vector<AxisKind> axes) {
  if (points.rows() == 0) throw InvalidArgument("sample_from_points: empty point set");
  if (points.cols() != static_cast<Eigen::Index>(axes.size())) {
    throw InvalidArgument("sample_from_points: axis list does not match dimension");
  }
  // points must be pairwise distinct
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
      if ((points.row(i) - points.row(j)).cwiseAbs().maxCoeff() == 0.0) {
        throw InvalidArgument("sample_from_points: duplicate sample point");
      }
    }
  }
  Eigen::VectorXd mesh(points.cols());
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    std::vector<double> col(points.rows());
    for (Eigen::Index r = 0; r < points.rows(); ++r) col[static_cast<std::size_t>(r)] = points(r, c);
    double radius = covering_radius(std::move(col), axes[static_cast<std::size_t>(c)]);
    mesh[c] = std::max(radius, std::numeric_limits<double>::min());
  }
  return SpaceSample(std::move(points), std::move(axes), std::move(mesh));
}

}  // namespace topent
