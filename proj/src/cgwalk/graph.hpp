#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cgwalk/geometry.hpp"
#include "cgwalk/scene.hpp"

namespace cgwalk {

enum class MatrixBackend { kDense, kSparse };

// Compressed sparse rows; pattern is symmetric because both the kernel value
// and the mask condition are symmetric in (i, j).
struct CsrMatrix {
  int n = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<int> cols;
  std::vector<double> vals;

  std::int64_t nonzeros() const { return static_cast<std::int64_t>(cols.size()); }
};

// Symmetric Gaussian affinity over shifted coordinates: entries in [0,1],
// unit diagonal. The sparse backend stores only entries >= kernel_cutoff.
struct AffinityMatrix {
  MatrixBackend backend = MatrixBackend::kDense;
  Eigen::MatrixXd dense;
  CsrMatrix sparse;

  int size() const;
  std::int64_t stored_entries() const;
  double entry(int i, int j) const;  // 0 for unstored sparse entries
};

// Row-stochastic walk matrix; every row sums to 1.
struct TransitionMatrix {
  MatrixBackend backend = MatrixBackend::kDense;
  Eigen::MatrixXd dense;
  CsrMatrix sparse;

  int size() const;
  std::int64_t stored_entries() const;
  double entry(int i, int j) const;

  // y = A * x; identical results for both backends at cutoff 0.
  void matvec(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;

  // Coordinate-list text dump "i j value", one entry per line.
  void dump_coo(std::ostream& out) const;
};

MatrixBackend choose_backend(int n, const CgcrwParams& params);

// W_ij = exp(-||(x_i+d_i) - (x_j+d_j)||^2 / (2 sigma^2)). Pass all-zero
// offsets for the raw-coordinate kernel.
AffinityMatrix build_affinity(std::span<const Vec3> coords, std::span<const Vec3> offsets,
                              double sigma, MatrixBackend backend, double kernel_cutoff,
                              int threads = 1);

// Zeroes edges between nodes carrying different weak instance ids; edges
// touching unlabeled nodes (-1) are preserved.
AffinityMatrix mask_cross_label_edges(AffinityMatrix matrix, std::span<const int> weak_ids);

// Divides every row by its sum; an all-zero row becomes a self-transition.
TransitionMatrix row_normalize(AffinityMatrix matrix);

}  // namespace cgwalk
