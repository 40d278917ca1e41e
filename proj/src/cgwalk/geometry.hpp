#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace cgwalk {

using Vec3 = Eigen::Vector3d;

// Uniform hash grid over a fixed point set. Supports radius queries and
// nearest-neighbor lookups; all query results are deterministic (indices
// sorted ascending, distance ties broken by lowest index).
class SpatialGrid {
 public:
  SpatialGrid(std::span<const Vec3> points, double cell_size);

  // Indices of all points with ||p - q|| <= radius, ascending.
  void query_radius(const Vec3& q, double radius, std::vector<int>& out) const;

  // Index of the nearest point to q, or -1 on an empty grid.
  int nearest(const Vec3& q) const;

  double cell_size() const { return cell_size_; }

 private:
  std::int64_t cell_key(int cx, int cy, int cz) const;
  void cell_coords(const Vec3& p, int& cx, int& cy, int& cz) const;

  std::span<const Vec3> points_;
  double cell_size_;
  std::unordered_map<std::int64_t, std::vector<int>> cells_;
};

}  // namespace cgwalk
