#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "cgwalk/graph.hpp"

using namespace cgwalk;

namespace {

std::vector<Vec3> random_coords(int n, unsigned seed, double extent = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-extent, extent);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = Vec3(uni(rng), uni(rng), uni(rng));
  return pts;
}

std::vector<Vec3> zeros(int n) { return std::vector<Vec3>(n, Vec3::Zero()); }

AffinityMatrix dense_from(const Eigen::MatrixXd& m) {
  AffinityMatrix a;
  a.backend = MatrixBackend::kDense;
  a.dense = m;
  return a;
}

}  // namespace

TEST_CASE("affinity of identical shifted coordinates is 1") {
  std::vector<Vec3> coords = {Vec3(0.3, -0.2, 1.0), Vec3(0.3, -0.2, 1.0)};
  const auto w = build_affinity(coords, zeros(2), 0.5, MatrixBackend::kDense, 0.0);
  CHECK(w.entry(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w.entry(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("affinity at shifted distance sigma*sqrt(2) is exp(-1)") {
  const double sigma = 0.37;
  std::vector<Vec3> coords = {Vec3::Zero(), Vec3(sigma * std::sqrt(2.0), 0, 0)};
  const auto w = build_affinity(coords, zeros(2), sigma, MatrixBackend::kDense, 0.0);
  CHECK(w.entry(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("offsets shift the kernel argument") {
  // Distinct raw coordinates whose shifted positions coincide.
  std::vector<Vec3> coords = {Vec3(1, 0, 0), Vec3(-1, 0, 0)};
  std::vector<Vec3> offsets = {Vec3(-1, 0, 0), Vec3(1, 0, 0)};
  const auto w = build_affinity(coords, offsets, 0.3, MatrixBackend::kDense, 0.0);
  CHECK(w.entry(0, 1) == doctest::Approx(1.0).epsilon(1e-15));

  // Building with offsets equals building the raw kernel of x + d.
  const auto coords2 = random_coords(30, 17);
  const auto offs = random_coords(30, 18, 0.2);
  std::vector<Vec3> moved(30);
  for (int i = 0; i < 30; ++i) moved[i] = coords2[i] + offs[i];
  const auto with_offsets = build_affinity(coords2, offs, 0.3, MatrixBackend::kDense, 0.0);
  const auto of_moved = build_affinity(moved, zeros(30), 0.3, MatrixBackend::kDense, 0.0);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j)
      CHECK(with_offsets.entry(i, j) == doctest::Approx(of_moved.entry(i, j)).epsilon(1e-14));
}

TEST_CASE("affinity invariants: symmetric, unit diagonal, entries in [0,1]") {
  const auto coords = random_coords(60, 5);
  for (auto backend : {MatrixBackend::kDense, MatrixBackend::kSparse}) {
    const auto w = build_affinity(coords, zeros(60), 0.4, backend, 1e-4);
    for (int i = 0; i < 60; ++i) {
      CHECK(w.entry(i, i) == doctest::Approx(1.0).epsilon(1e-15));
      for (int j = 0; j < 60; ++j) {
        CHECK(w.entry(i, j) == w.entry(j, i));
        CHECK(w.entry(i, j) >= 0.0);
        CHECK(w.entry(i, j) <= 1.0);
      }
    }
  }
}

TEST_CASE("masking zeroes only edges between different weak ids") {
  std::vector<Vec3> coords = {Vec3(0, 0, 0), Vec3(0.1, 0, 0), Vec3(0.2, 0, 0),
                              Vec3(0.3, 0, 0)};
  auto w = build_affinity(coords, zeros(4), 0.3, MatrixBackend::kDense, 0.0);
  const auto before = w.dense;
  // Node ids: 1, 2, 1, unlabeled.
  std::vector<int> ids = {1, 2, 1, -1};
  const auto masked = mask_cross_label_edges(std::move(w), ids);

  CHECK(masked.entry(0, 1) == 0.0);  // ids 1 vs 2
  CHECK(masked.entry(1, 0) == 0.0);
  CHECK(masked.entry(0, 2) == before(0, 2));  // same id
  CHECK(masked.entry(0, 3) == before(0, 3));  // labeled vs unlabeled
  CHECK(masked.entry(1, 3) == before(1, 3));
  CHECK(masked.entry(1, 1) == before(1, 1));  // diagonal untouched

  // Symmetry survives masking.
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(masked.entry(i, j) == masked.entry(j, i));
}

TEST_CASE("masking works identically on the sparse backend") {
  const auto coords = random_coords(80, 31, 0.5);
  std::mt19937_64 rng(9);
  std::vector<int> ids(80, -1);
  for (int& id : ids)
    if (rng() % 3 == 0) id = static_cast<int>(rng() % 4);

  auto wd = build_affinity(coords, zeros(80), 0.3, MatrixBackend::kDense, 0.0);
  auto ws = build_affinity(coords, zeros(80), 0.3, MatrixBackend::kSparse, 0.0);
  const auto md = mask_cross_label_edges(std::move(wd), ids);
  const auto ms = mask_cross_label_edges(std::move(ws), ids);
  for (int i = 0; i < 80; ++i)
    for (int j = 0; j < 80; ++j)
      CHECK(md.entry(i, j) == doctest::Approx(ms.entry(i, j)).epsilon(1e-15));
}

TEST_CASE("row_normalize divides by the row sum") {
  Eigen::MatrixXd m(3, 3);
  m << 2, 1, 1,
       0, 0, 0,
       1, 1, 2;
  const auto t = row_normalize(dense_from(m));
  CHECK(t.entry(0, 0) == doctest::Approx(0.5));
  CHECK(t.entry(0, 1) == doctest::Approx(0.25));
  CHECK(t.entry(0, 2) == doctest::Approx(0.25));
  // All-zero row becomes a self-transition.
  CHECK(t.entry(1, 1) == doctest::Approx(1.0));
  CHECK(t.entry(1, 0) == 0.0);
  CHECK(t.entry(1, 2) == 0.0);
}

TEST_CASE("100 random matrices row-normalize to stochastic rows") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 20);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = (rng() % 4 == 0) ? 0.0 : uni(rng);
    const auto t = row_normalize(dense_from(m));
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) {
        sum += t.entry(i, j);
        CHECK(t.entry(i, j) >= 0.0);
        CHECK(t.entry(i, j) <= 1.0);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("backend choice follows dense_limit") {
  CgcrwParams params;  // dense_limit 8192
  CHECK(choose_backend(100, params) == MatrixBackend::kDense);
  CHECK(choose_backend(8192, params) == MatrixBackend::kDense);
  CHECK(choose_backend(8193, params) == MatrixBackend::kSparse);
  CHECK(choose_backend(20000, params) == MatrixBackend::kSparse);
}

TEST_CASE("dense and sparse matvec agree at cutoff zero") {
  const int n = 500;
  const auto coords = random_coords(n, 41);
  auto wd = build_affinity(coords, zeros(n), 0.35, MatrixBackend::kDense, 0.0);
  auto ws = build_affinity(coords, zeros(n), 0.35, MatrixBackend::kSparse, 0.0);
  const auto td = row_normalize(std::move(wd));
  const auto ts = row_normalize(std::move(ws));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Eigen::VectorXd x(n), yd(n), ys(n);
  for (int i = 0; i < n; ++i) x[i] = uni(rng);
  td.matvec(x, yd);
  ts.matvec(x, ys);
  CHECK((yd - ys).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("raising the cutoff never adds stored entries") {
  const auto coords = random_coords(200, 53);
  std::int64_t prev = -1;
  bool first = true;
  for (double cutoff : {0.0, 1e-6, 1e-3, 1e-1, 0.5}) {
    const auto w = build_affinity(coords, zeros(200), 0.3, MatrixBackend::kSparse, cutoff);
    if (!first) CHECK(w.stored_entries() <= prev);
    prev = w.stored_entries();
    first = false;
  }
}

TEST_CASE("sparse transition rows sum to 1 after cutoff and masking") {
  const auto coords = random_coords(150, 67, 0.6);
  std::vector<int> ids(150, -1);
  ids[3] = 0;
  ids[50] = 1;
  ids[111] = 0;
  auto w = build_affinity(coords, zeros(150), 0.25, MatrixBackend::kSparse,
                          std::exp(-4.5));
  const auto t = row_normalize(mask_cross_label_edges(std::move(w), ids));
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(150), sums(150);
  t.matvec(ones, sums);
  for (int i = 0; i < 150; ++i) CHECK(sums[i] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("coordinate dump lists stored entries") {
  std::vector<Vec3> coords = {Vec3(0, 0, 0), Vec3(10, 0, 0)};
  auto w = build_affinity(coords, zeros(2), 0.3, MatrixBackend::kSparse, 1e-8);
  const auto t = row_normalize(std::move(w));
  std::ostringstream ss;
  t.dump_coo(ss);
  CHECK(ss.str().find("0 0 1") != std::string::npos);
}
