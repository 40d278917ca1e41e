#include "cgwalk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "cgwalk/error.hpp"

namespace cgwalk {

namespace {

// 21 bits per axis, offset to keep coordinates positive.
constexpr std::int64_t kAxisOffset = 1 << 20;
constexpr std::int64_t kAxisBits = 21;
constexpr std::int64_t kAxisMask = (1 << kAxisBits) - 1;

}  // namespace

SpatialGrid::SpatialGrid(std::span<const Vec3> points, double cell_size)
    : points_(points), cell_size_(cell_size) {
  if (cell_size <= 0.0) {
    fail(ErrorCode::kBadArgument, "grid cell size must be positive");
  }
  for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
    int cx, cy, cz;
    cell_coords(points_[i], cx, cy, cz);
    cells_[cell_key(cx, cy, cz)].push_back(i);
  }
}

std::int64_t SpatialGrid::cell_key(int cx, int cy, int cz) const {
  const std::int64_t x = (static_cast<std::int64_t>(cx) + kAxisOffset) & kAxisMask;
  const std::int64_t y = (static_cast<std::int64_t>(cy) + kAxisOffset) & kAxisMask;
  const std::int64_t z = (static_cast<std::int64_t>(cz) + kAxisOffset) & kAxisMask;
  return (x << (2 * kAxisBits)) | (y << kAxisBits) | z;
}

void SpatialGrid::cell_coords(const Vec3& p, int& cx, int& cy, int& cz) const {
  cx = static_cast<int>(std::floor(p.x() / cell_size_));
  cy = static_cast<int>(std::floor(p.y() / cell_size_));
  cz = static_cast<int>(std::floor(p.z() / cell_size_));
}

void SpatialGrid::query_radius(const Vec3& q, double radius, std::vector<int>& out) const {
  out.clear();
  if (radius < 0.0) {
    return;
  }
  const double r2 = radius * radius;
  int cx, cy, cz;
  cell_coords(q, cx, cy, cz);
  const int reach = static_cast<int>(std::ceil(radius / cell_size_));
  for (int dx = -reach; dx <= reach; ++dx) {
    for (int dy = -reach; dy <= reach; ++dy) {
      for (int dz = -reach; dz <= reach; ++dz) {
        auto it = cells_.find(cell_key(cx + dx, cy + dy, cz + dz));
        if (it == cells_.end()) {
          continue;
        }
        for (int idx : it->second) {
          if ((points_[idx] - q).squaredNorm() <= r2) {
            out.push_back(idx);
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
}

int SpatialGrid::nearest(const Vec3& q) const {
  if (points_.empty()) {
    return -1;
  }
  int cx, cy, cz;
  cell_coords(q, cx, cy, cz);
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int shell = 0;; ++shell) {
    // Cells at Chebyshev shell distance s are at least (s-1)*cell away, so
    // once that bound exceeds the best distance the search is complete.
    if (best >= 0) {
      const double bound = (shell - 1) * cell_size_;
      if (bound > 0.0 && bound * bound > best_d2) {
        break;
      }
    }
    bool any_cell = false;
    for (int dx = -shell; dx <= shell; ++dx) {
      for (int dy = -shell; dy <= shell; ++dy) {
        for (int dz = -shell; dz <= shell; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != shell) {
            continue;
          }
          auto it = cells_.find(cell_key(cx + dx, cy + dy, cz + dz));
          if (it == cells_.end()) {
            continue;
          }
          any_cell = true;
          for (int idx : it->second) {
            const double d2 = (points_[idx] - q).squaredNorm();
            if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
              best_d2 = d2;
              best = idx;
            }
          }
        }
      }
    }
    // Guard against walking past the populated region forever.
    if (!any_cell && best >= 0) {
      const double bound = (shell - 1) * cell_size_;
      if (bound * bound > best_d2) {
        break;
      }
    }
    if (shell > (1 << 19)) {
      break;
    }
  }
  return best;
}

}  // namespace cgwalk
