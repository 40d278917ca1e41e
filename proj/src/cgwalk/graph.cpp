#include "cgwalk/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "cgwalk/error.hpp"
#include "cgwalk/util.hpp"

namespace cgwalk {

namespace {

std::vector<Vec3> shifted_coords(std::span<const Vec3> coords, std::span<const Vec3> offsets) {
  if (coords.size() != offsets.size()) {
    fail(ErrorCode::kLengthMismatch, "coords and offsets differ in length");
  }
  std::vector<Vec3> shifted(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!coords[i].allFinite() || !offsets[i].allFinite()) {
      fail(ErrorCode::kNonFinite, "non-finite coordinate at index " + std::to_string(i));
    }
    shifted[i] = coords[i] + offsets[i];
  }
  return shifted;
}

double csr_entry(const CsrMatrix& m, int i, int j) {
  for (std::int64_t s = m.row_ptr[i]; s < m.row_ptr[i + 1]; ++s) {
    if (m.cols[s] == j) {
      return m.vals[s];
    }
  }
  return 0.0;
}

}  // namespace

int AffinityMatrix::size() const {
  return backend == MatrixBackend::kDense ? static_cast<int>(dense.rows()) : sparse.n;
}

std::int64_t AffinityMatrix::stored_entries() const {
  if (backend == MatrixBackend::kDense) {
    return static_cast<std::int64_t>(dense.rows()) * dense.cols();
  }
  return sparse.nonzeros();
}

double AffinityMatrix::entry(int i, int j) const {
  return backend == MatrixBackend::kDense ? dense(i, j) : csr_entry(sparse, i, j);
}

int TransitionMatrix::size() const {
  return backend == MatrixBackend::kDense ? static_cast<int>(dense.rows()) : sparse.n;
}

std::int64_t TransitionMatrix::stored_entries() const {
  if (backend == MatrixBackend::kDense) {
    return static_cast<std::int64_t>(dense.rows()) * dense.cols();
  }
  return sparse.nonzeros();
}

double TransitionMatrix::entry(int i, int j) const {
  return backend == MatrixBackend::kDense ? dense(i, j) : csr_entry(sparse, i, j);
}

void TransitionMatrix::matvec(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  if (backend == MatrixBackend::kDense) {
    y.noalias() = dense * x;
    return;
  }
  y.resize(sparse.n);
  for (int i = 0; i < sparse.n; ++i) {
    double sum = 0.0;
    for (std::int64_t s = sparse.row_ptr[i]; s < sparse.row_ptr[i + 1]; ++s) {
      sum += sparse.vals[s] * x[sparse.cols[s]];
    }
    y[i] = sum;
  }
}

void TransitionMatrix::dump_coo(std::ostream& out) const {
  const int n = size();
  if (backend == MatrixBackend::kDense) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (dense(i, j) != 0.0) {
          out << i << ' ' << j << ' ' << format_double(dense(i, j)) << '\n';
        }
      }
    }
    return;
  }
  for (int i = 0; i < n; ++i) {
    for (std::int64_t s = sparse.row_ptr[i]; s < sparse.row_ptr[i + 1]; ++s) {
      out << i << ' ' << sparse.cols[s] << ' ' << format_double(sparse.vals[s]) << '\n';
    }
  }
}

MatrixBackend choose_backend(int n, const CgcrwParams& params) {
  if (n < 1) {
    fail(ErrorCode::kBadArgument, "matrix size must be >= 1");
  }
  return n <= params.dense_limit ? MatrixBackend::kDense : MatrixBackend::kSparse;
}

AffinityMatrix build_affinity(std::span<const Vec3> coords, std::span<const Vec3> offsets,
                              double sigma, MatrixBackend backend, double kernel_cutoff,
                              int threads) {
  if (coords.empty()) {
    fail(ErrorCode::kBadArgument, "cannot build affinity over zero points");
  }
  if (!(sigma > 0.0)) {
    fail(ErrorCode::kBadArgument, "sigma must be positive");
  }
  const int n = static_cast<int>(coords.size());
  const std::vector<Vec3> pos = shifted_coords(coords, offsets);
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);

  AffinityMatrix result;
  result.backend = backend;

  if (backend == MatrixBackend::kDense) {
    result.dense.resize(n, n);
    parallel_for(0, static_cast<std::size_t>(n), threads, [&](std::size_t i) {
      for (int j = 0; j < n; ++j) {
        const double d2 = (pos[i] - pos[j]).squaredNorm();
        result.dense(static_cast<int>(i), j) = std::exp(-d2 * inv_two_sigma2);
      }
    });
    return result;
  }

  // Sparse: entries below kernel_cutoff are dropped before storage. A
  // positive cutoff corresponds to a radius in shifted space, so a hash grid
  // finds each row's support without the n^2 scan; cutoff 0 keeps every pair
  // and is sparse in storage format only.
  if (kernel_cutoff < 0.0 || kernel_cutoff >= 1.0) {
    fail(ErrorCode::kBadArgument, "kernel_cutoff must lie in [0, 1)");
  }
  CsrMatrix& m = result.sparse;
  m.n = n;
  m.row_ptr.assign(n + 1, 0);

  std::vector<std::vector<int>> row_cols(n);
  if (kernel_cutoff > 0.0) {
    const double radius = sigma * std::sqrt(-2.0 * std::log(kernel_cutoff));
    SpatialGrid grid(pos, std::max(radius, 1e-9));
    parallel_for(0, static_cast<std::size_t>(n), threads, [&](std::size_t i) {
      grid.query_radius(pos[i], radius, row_cols[i]);
    });
  } else {
    parallel_for(0, static_cast<std::size_t>(n), threads, [&](std::size_t i) {
      row_cols[i].resize(n);
      std::iota(row_cols[i].begin(), row_cols[i].end(), 0);
    });
  }
  for (int i = 0; i < n; ++i) {
    m.row_ptr[i + 1] = m.row_ptr[i] + static_cast<std::int64_t>(row_cols[i].size());
  }
  m.cols.resize(m.row_ptr[n]);
  m.vals.resize(m.row_ptr[n]);
  parallel_for(0, static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    std::int64_t s = m.row_ptr[i];
    for (int j : row_cols[i]) {
      const double d2 = (pos[i] - pos[j]).squaredNorm();
      m.cols[s] = j;
      m.vals[s] = std::exp(-d2 * inv_two_sigma2);
      ++s;
    }
  });
  return result;
}

AffinityMatrix mask_cross_label_edges(AffinityMatrix matrix, std::span<const int> weak_ids) {
  const int n = matrix.size();
  if (static_cast<int>(weak_ids.size()) != n) {
    fail(ErrorCode::kLengthMismatch, "weak id vector does not match matrix size");
  }
  if (matrix.backend == MatrixBackend::kDense) {
    for (int i = 0; i < n; ++i) {
      if (weak_ids[i] < 0) {
        continue;
      }
      for (int j = 0; j < n; ++j) {
        if (weak_ids[j] >= 0 && weak_ids[j] != weak_ids[i]) {
          matrix.dense(i, j) = 0.0;
        }
      }
    }
    return matrix;
  }
  CsrMatrix& m = matrix.sparse;
  for (int i = 0; i < n; ++i) {
    if (weak_ids[i] < 0) {
      continue;
    }
    for (std::int64_t s = m.row_ptr[i]; s < m.row_ptr[i + 1]; ++s) {
      const int j = m.cols[s];
      if (weak_ids[j] >= 0 && weak_ids[j] != weak_ids[i]) {
        m.vals[s] = 0.0;
      }
    }
  }
  return matrix;
}

TransitionMatrix row_normalize(AffinityMatrix matrix) {
  const int n = matrix.size();
  TransitionMatrix result;
  result.backend = matrix.backend;
  if (matrix.backend == MatrixBackend::kDense) {
    result.dense = std::move(matrix.dense);
    for (int i = 0; i < n; ++i) {
      const double sum = result.dense.row(i).sum();
      if (sum > 0.0) {
        result.dense.row(i) /= sum;
      } else {
        result.dense.row(i).setZero();
        result.dense(i, i) = 1.0;
      }
    }
    return result;
  }
  result.sparse = std::move(matrix.sparse);
  CsrMatrix& m = result.sparse;
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::int64_t s = m.row_ptr[i]; s < m.row_ptr[i + 1]; ++s) {
      sum += m.vals[s];
    }
    if (sum > 0.0) {
      for (std::int64_t s = m.row_ptr[i]; s < m.row_ptr[i + 1]; ++s) {
        m.vals[s] /= sum;
      }
    } else {
      // Isolated node: force a self-loop so the matrix stays stochastic.
      bool has_diag = false;
      for (std::int64_t s = m.row_ptr[i]; s < m.row_ptr[i + 1]; ++s) {
        if (m.cols[s] == i) {
          m.vals[s] = 1.0;
          has_diag = true;
        }
      }
      if (!has_diag) {
        fail(ErrorCode::kInternal, "sparse row without diagonal at " + std::to_string(i));
      }
    }
  }
  return result;
}

}  // namespace cgwalk
