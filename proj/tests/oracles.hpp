// Independent reference computations shared by the unit and acceptance tests.
// None of these call into the library code they check.
#ifndef SDF_TESTS_ORACLES_HPP
#define SDF_TESTS_ORACLES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "sdf/depth_image.hpp"

namespace sdf::oracle {

/// Two fronto-parallel planes seen by a rectified pair. The near plane covers
/// world x >= edge_x (the right side of the view), the far plane the rest.
/// The left camera is at x = 0, the right one at x = baseline.
struct StepEdgeScene {
  int height = 30;
  int width = 40;
  double fx = 20.0;
  double cx = 19.5;
  double baseline = 0.1;
  double d_near = 0.5;
  double d_far = 1.0;
  double edge_x = 0.0;

  // Depth seen at (continuous) column u by a camera at camera_x.
  double depth_at(double camera_x, double u) const {
    const double x_on_near = camera_x + (u - cx) * d_near / fx;
    return x_on_near >= edge_x ? d_near : d_far;
  }

  DepthImage render(double camera_x) const {
    DepthImage img(height, width);
    for (int v = 0; v < height; ++v) {
      for (int u = 0; u < width; ++u) img.at(v, u) = static_cast<float>(depth_at(camera_x, u));
    }
    return img;
  }
  DepthImage left() const { return render(0.0); }
  DepthImage right() const { return render(baseline); }

  /// Brute-force visibility: back-project left pixel u to its 3-D point,
  /// project that point into the right camera and check whether the right
  /// camera's nearest pixel to that projection sees the same surface. The
  /// point is invalid when it projects outside the right image.
  std::vector<bool> visible_row() const {
    std::vector<bool> vis(static_cast<std::size_t>(width), false);
    for (int u = 0; u < width; ++u) {
      const double d = depth_at(0.0, u);
      const double x = (u - cx) * d / fx;
      const double u_r = cx + fx * (x - baseline) / d;
      if (u_r < 0.0 || u_r > width - 1) continue;
      const double nearest = std::round(u_r);
      vis[static_cast<std::size_t>(u)] = depth_at(baseline, nearest) == d;
    }
    return vis;
  }
};

/// Composite Simpson integration of f over [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// KL(N(mu, var) || N(0, 1)) by numerically integrating p log(p / q).
inline double gaussian_kl_numeric(double mu, double var) {
  const double sd = std::sqrt(var);
  const double inv_norm_p = 1.0 / std::sqrt(2.0 * std::numbers::pi * var);
  auto integrand = [&](double x) {
    const double zp = (x - mu) / sd;
    const double log_p = std::log(inv_norm_p) - 0.5 * zp * zp;
    const double log_q = -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * x * x;
    return std::exp(log_p) * (log_p - log_q);
  };
  const double half = 12.0 * sd;
  return simpson(integrand, mu - half, mu + half, 4000);
}

/// Rotates v by the unit quaternion (w, x, y, z) using the explicit rotation
/// matrix formula.
inline std::array<double, 3> rotate_by_quaternion(double w, double x, double y, double z,
                                                  const std::array<double, 3>& v) {
  const double m[3][3] = {
      {1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
      {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
      {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)},
  };
  std::array<double, 3> out{};
  for (int r = 0; r < 3; ++r) out[r] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2];
  return out;
}

/// Sample standard deviation.
inline double stddev(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

/// Largest |n(u + 1, v) - n(u, v)| and |n(u, v + 1) - n(u, v)| over a grid.
inline double max_adjacent_difference(const std::vector<float>& values, int height, int width) {
  double worst = 0.0;
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const double here = values[static_cast<std::size_t>(v) * width + u];
      if (u + 1 < width) {
        worst = std::max(worst, std::abs(values[static_cast<std::size_t>(v) * width + u + 1] - here));
      }
      if (v + 1 < height) {
        worst = std::max(worst, std::abs(values[static_cast<std::size_t>(v + 1) * width + u] - here));
      }
    }
  }
  return worst;
}

}  // namespace sdf::oracle

#endif  // SDF_TESTS_ORACLES_HPP
