#pragma once

// Independent reference computations used as test oracles. None of these
// call into the code under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

namespace oracle {

struct P {
  double x, y;
};

struct Circle {
  P c;
  double r;
};

// Samples `rays` equally spaced directions across [center - half, center + half]
// and returns the angular length of the longest run of rays that hit no
// circle. A ray hits a circle when the circle's center projects forward onto
// it within the radius, or the eye is inside the circle.
inline double ray_window(P eye, double center, double half, const std::vector<Circle>& circles,
                         int rays = 1000) {
  const double step = 2.0 * half / rays;
  int best = 0, run = 0;
  for (int i = 0; i < rays; ++i) {
    double th = center - half + (i + 0.5) * step;
    double dx = std::cos(th), dy = std::sin(th);
    bool hit = false;
    for (const auto& c : circles) {
      double vx = c.c.x - eye.x, vy = c.c.y - eye.y;
      if (vx * vx + vy * vy <= c.r * c.r) {
        hit = true;
        break;
      }
      double t = vx * dx + vy * dy;
      if (t <= 0.0) continue;
      double px = vx - t * dx, py = vy - t * dy;
      if (px * px + py * py <= c.r * c.r) {
        hit = true;
        break;
      }
    }
    run = hit ? 0 : run + 1;
    best = std::max(best, run);
  }
  return best * step;
}

// 1 - 2|Phi(d / sigma) - 1/2| from Boost's erf.
inline double two_sided_tail(double delta, double sigma) {
  double cdf = 0.5 * (1.0 + boost::math::erf(delta / (sigma * std::sqrt(2.0))));
  return 1.0 - 2.0 * std::abs(cdf - 0.5);
}

// Index of the nearest point; the first one wins ties.
inline std::size_t linear_nearest(const std::vector<P>& pts, P q) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double dx = pts[i].x - q.x, dy = pts[i].y - q.y;
    double d = dx * dx + dy * dy;
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

// Deterministic finite MDP: next[s][a], reward[s][a], terminal_next[s][a].
struct Mdp {
  std::vector<std::vector<std::size_t>> next;
  std::vector<std::vector<double>> reward;
  std::vector<std::vector<bool>> terminal;
};

// Q* by value iteration to a fixed point (sup-norm change below tol).
inline std::vector<std::vector<double>> value_iteration(const Mdp& m, double gamma, double tol = 1e-13) {
  std::size_t ns = m.next.size();
  std::vector<std::vector<double>> q(ns, std::vector<double>(m.next[0].size(), 0.0));
  for (int it = 0; it < 100000; ++it) {
    double change = 0.0;
    auto old = q;
    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t a = 0; a < q[s].size(); ++a) {
        double v = 0.0;
        if (!m.terminal[s][a]) {
          const auto& row = old[m.next[s][a]];
          v = *std::max_element(row.begin(), row.end());
        }
        q[s][a] = m.reward[s][a] + gamma * v;
        change = std::max(change, std::abs(q[s][a] - old[s][a]));
      }
    if (change < tol) break;
  }
  return q;
}

// Central difference of f around x[i].
inline double central_difference(const std::function<double()>& f, double& x, double h) {
  double saved = x;
  x = saved + h;
  double up = f();
  x = saved - h;
  double down = f();
  x = saved;
  return (up - down) / (2.0 * h);
}

}  // namespace oracle
