#pragma once

// Static 2-d tree answering exact nearest-neighbor queries. Among points at
// equal squared distance the one with the smallest index wins, so results
// match a front-to-back linear scan.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace otlpp {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double squared_distance(Point2 a, Point2 b) {
  double dx = a.x - b.x;
  double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

class KdTree2 {
 public:
  KdTree2() = default;

  explicit KdTree2(std::vector<Point2> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    axis_.assign(points_.size(), 0);
    build(0, order_.size());
  }

  std::size_t size() const { return points_.size(); }
  const Point2& point(std::size_t i) const { return points_[i]; }

  // Index of the nearest stored point; size() when empty.
  std::size_t nearest(Point2 q) const {
    Best best;
    if (!order_.empty()) search(0, order_.size(), q, best);
    return best.index;
  }

 private:
  struct Best {
    double d2 = std::numeric_limits<double>::infinity();
    std::size_t index = std::numeric_limits<std::size_t>::max();

    void offer(double d2_new, std::size_t i) {
      if (d2_new < d2 || (d2_new == d2 && i < index)) {
        d2 = d2_new;
        index = i;
      }
    }
  };

  static double coord(Point2 p, int axis) { return axis == 0 ? p.x : p.y; }

  void build(std::size_t lo, std::size_t hi) {
    if (hi - lo <= 1) return;
    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = -min_x;
    for (std::size_t i = lo; i < hi; ++i) {
      const Point2& p = points_[order_[i]];
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    int axis = (max_x - min_x) >= (max_y - min_y) ? 0 : 1;
    std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](std::uint32_t a, std::uint32_t b) {
                       return coord(points_[a], axis) < coord(points_[b], axis);
                     });
    axis_[mid] = static_cast<std::uint8_t>(axis);
    build(lo, mid);
    build(mid + 1, hi);
  }

  void search(std::size_t lo, std::size_t hi, Point2 q, Best& best) const {
    if (lo >= hi) return;
    std::size_t mid = lo + (hi - lo) / 2;
    std::uint32_t idx = order_[mid];
    const Point2& p = points_[idx];
    best.offer(squared_distance(p, q), idx);
    if (hi - lo == 1) return;
    int axis = axis_[mid];
    double diff = coord(q, axis) - coord(p, axis);
    bool left_first = diff < 0.0;
    if (left_first) search(lo, mid, q, best);
    else search(mid + 1, hi, q, best);
    // Equal-distance points on the far side may carry a smaller index, so
    // only strictly farther half-spaces are pruned.
    if (diff * diff <= best.d2) {
      if (left_first) search(mid + 1, hi, q, best);
      else search(lo, mid, q, best);
    }
  }

  std::vector<Point2> points_;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint8_t> axis_;
};

}  // namespace otlpp
