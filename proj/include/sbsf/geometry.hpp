// Copyright 2026 The sbsf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <type_traits>
#include <stdexcept>
#include <variant>
#include <vector>

namespace sbsf {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

struct Pose2 {
  Point2 position;
  double heading = 0.0;
};

// Oriented rectangle: center, heading of the length axis, full extents.
struct OrientedRect {
  Point2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  [[nodiscard]] std::array<Point2, 4> corners() const {
    const Point2 ax{std::cos(heading), std::sin(heading)};
    const Point2 ay{-ax.y, ax.x};
    const double hl = 0.5 * length;
    const double hw = 0.5 * width;
    return {center + hl * ax + hw * ay, center - hl * ax + hw * ay, center - hl * ax - hw * ay,
            center + hl * ax - hw * ay};
  }
  [[nodiscard]] double circumradius() const { return 0.5 * std::hypot(length, width); }
};

namespace detail {

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

// True when the projections of both polygons onto `axis` overlap (touching counts).
inline bool projections_overlap(const std::array<Point2, 4>& a, const std::array<Point2, 4>& b, Point2 axis) {
  double amin = std::numeric_limits<double>::infinity(), amax = -amin;
  double bmin = amin, bmax = -amin;
  for (const auto& p : a) {
    const double d = dot(p, axis);
    amin = std::min(amin, d);
    amax = std::max(amax, d);
  }
  for (const auto& p : b) {
    const double d = dot(p, axis);
    bmin = std::min(bmin, d);
    bmax = std::max(bmax, d);
  }
  return amax >= bmin && bmax >= amin;
}

}  // namespace detail

// Exact minimum Euclidean distance between two oriented rectangles; 0 when
// they intersect or touch. Separating-axis overlap test, then the minimum of
// all vertex-to-edge distances in both directions.
inline double polygon_distance(const OrientedRect& a, const OrientedRect& b) {
  if (!(a.length > 0.0) || !(a.width > 0.0) || !(b.length > 0.0) || !(b.width > 0.0)) {
    throw std::invalid_argument("polygon_distance: degenerate rectangle");
  }
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::array<Point2, 4> axes{Point2{std::cos(a.heading), std::sin(a.heading)},
                                   Point2{-std::sin(a.heading), std::cos(a.heading)},
                                   Point2{std::cos(b.heading), std::sin(b.heading)},
                                   Point2{-std::sin(b.heading), std::cos(b.heading)}};
  bool separated = false;
  for (const auto& axis : axes) {
    if (!detail::projections_overlap(ca, cb, axis)) {
      separated = true;
      break;
    }
  }
  if (!separated) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) {
    const std::size_t j = (i + 1) % 4;
    for (const auto& p : cb) best = std::min(best, detail::point_segment_distance(p, ca[i], ca[j]));
    for (const auto& p : ca) best = std::min(best, detail::point_segment_distance(p, cb[i], cb[j]));
  }
  return best;
}

// Planar path made of straight and circular-arc pieces, parameterised by
// arc length. Queries past either end extrapolate along the end tangent.
class Path {
 public:
  struct Line {
    Point2 start;
    double heading;
    double length;
  };
  struct Arc {
    Point2 center;
    double radius;
    double start_angle;  // polar angle of the start point around center
    double sweep;        // signed; positive is counter-clockwise
  };
  using Piece = std::variant<Line, Arc>;

  Path() = default;
  explicit Path(Pose2 start) : start_(start), end_(start) {}

  Path& line(double length) {
    if (!(length > 0.0)) throw std::invalid_argument("path line length must be positive");
    pieces_.push_back(Line{end_.position, end_.heading, length});
    offsets_.push_back(total_);
    total_ += length;
    end_ = {end_.position + length * Point2{std::cos(end_.heading), std::sin(end_.heading)}, end_.heading};
    return *this;
  }

  // Turns by `angle` (positive = left) along a circle of `radius`.
  Path& arc(double radius, double angle) {
    if (!(radius > 0.0) || angle == 0.0) throw std::invalid_argument("path arc needs positive radius and nonzero angle");
    const double side = angle > 0.0 ? 1.0 : -1.0;
    const Point2 normal{-std::sin(end_.heading) * side, std::cos(end_.heading) * side};
    const Point2 center = end_.position + radius * normal;
    const Point2 rel = end_.position - center;
    const double start_angle = std::atan2(rel.y, rel.x);
    pieces_.push_back(Arc{center, radius, start_angle, angle});
    offsets_.push_back(total_);
    total_ += radius * std::abs(angle);
    const double end_angle = start_angle + angle;
    end_ = {center + radius * Point2{std::cos(end_angle), std::sin(end_angle)}, end_.heading + angle};
    return *this;
  }

  [[nodiscard]] double length() const noexcept { return total_; }
  [[nodiscard]] Pose2 start() const noexcept { return start_; }
  [[nodiscard]] Pose2 end() const noexcept { return end_; }

  [[nodiscard]] Pose2 pose_at(double s) const {
    if (pieces_.empty() || s <= 0.0) {
      return {start_.position + s * Point2{std::cos(start_.heading), std::sin(start_.heading)}, start_.heading};
    }
    if (s >= total_) {
      const double extra = s - total_;
      return {end_.position + extra * Point2{std::cos(end_.heading), std::sin(end_.heading)}, end_.heading};
    }
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), s);
    const std::size_t idx = static_cast<std::size_t>(std::distance(offsets_.begin(), it)) - 1;
    const double local = s - offsets_[idx];
    return std::visit(
        [local](const auto& piece) -> Pose2 {
          using T = std::decay_t<decltype(piece)>;
          if constexpr (std::is_same_v<T, Line>) {
            return {piece.start + local * Point2{std::cos(piece.heading), std::sin(piece.heading)}, piece.heading};
          } else {
            const double side = piece.sweep > 0.0 ? 1.0 : -1.0;
            const double ang = piece.start_angle + side * local / piece.radius;
            return {piece.center + piece.radius * Point2{std::cos(ang), std::sin(ang)},
                    ang + side * 0.5 * std::numbers::pi};
          }
        },
        pieces_[idx]);
  }

 private:
  Pose2 start_{};
  Pose2 end_{};
  std::vector<Piece> pieces_;
  std::vector<double> offsets_;
  double total_ = 0.0;
};

}  // namespace sbsf
