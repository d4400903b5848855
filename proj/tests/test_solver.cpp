#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <vector>

#include "json.hpp"

#include "hypercs/errors.hpp"
#include "hypercs/solver.hpp"
#include "hypercs/wavelet.hpp"

using namespace hypercs;
namespace fs = std::filesystem;

namespace {

// dense matrix of a linear operator, one unit vector at a time
template <typename Op>
std::vector<double> dense_op(Op&& op, std::size_t n1, std::size_t n2) {
  const std::size_t n = n1 * n2;
  std::vector<double> M(n * n);
  std::vector<double> e(n), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    op(e.data(), col.data(), n1, n2);
    for (std::size_t i = 0; i < n; ++i) M[i * n + j] = col[i];
  }
  return M;
}

std::size_t matrix_rank(std::vector<double> M, std::size_t n) {
  std::size_t rank = 0;
  for (std::size_t col = 0; col < n && rank < n; ++col) {
    std::size_t piv = rank;
    for (std::size_t r = rank; r < n; ++r)
      if (std::fabs(M[r * n + col]) > std::fabs(M[piv * n + col])) piv = r;
    if (std::fabs(M[piv * n + col]) < 1e-9) continue;
    for (std::size_t j = 0; j < n; ++j) std::swap(M[piv * n + j], M[rank * n + j]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == rank) continue;
      const double f = M[r * n + col] / M[rank * n + col];
      for (std::size_t j = 0; j < n; ++j) M[r * n + j] -= f * M[rank * n + j];
    }
    ++rank;
  }
  return rank;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

// sparse wavelet-domain ground truth restricted to coefficients the
// low-sequency rows can actually see (the coarse half)
cube::HyperCube sparse_truth(std::size_t n1, std::size_t n2, std::size_t sparsity,
                             std::uint64_t seed, std::vector<double>* coeffs_out = nullptr) {
  const std::size_t n = n1 * n2;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n / 2 - 1);
  std::normal_distribution<double> amp(0.0, 1.0);
  std::vector<double> u(n, 0.0);
  std::size_t placed = 0;
  while (placed < sparsity) {
    const std::size_t idx = pick(rng);
    if (u[idx] != 0.0) continue;
    double a = amp(rng);
    if (std::fabs(a) < 0.1) a = std::copysign(0.1, a == 0.0 ? 1.0 : a);
    u[idx] = a;
    ++placed;
  }
  cube::HyperCube c(n1, n2, 1);
  wavelet::inverse(wavelet::make_haar(n), u.data(), c.band_ptr(0));
  if (coeffs_out) *coeffs_out = u;
  return c;
}

// keep the all-ones row, shuffle the rest: piecewise-constant scenes need
// rows that mix scales, which the low-sequency prefix alone does not give
sampling::SamplingPlan shuffled_plan(std::size_t n, double comp, std::uint64_t seed) {
  sampling::SamplingPlan p;
  p.n = n;
  p.k = sampling::rows_for_compression(n, comp);
  p.compression = comp;
  p.shifted = true;
  p.ordering = sampling::RowOrdering::max_variance;
  p.seed = seed;
  std::vector<std::uint32_t> rows(n - 1);
  std::iota(rows.begin(), rows.end(), 1);
  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  p.row_order = {0};
  p.row_order.insert(p.row_order.end(), rows.begin(), rows.begin() + (p.k - 1));
  p.validate();
  return p;
}

}  // namespace

TEST_CASE("periodic gradients match the worked 2x2 example") {
  const double img[4] = {0, 0, 1, 1};  // rows (0,0) and (1,1)
  double gr[4], gc[4];
  solver::grad_rows(img, gr, 2, 2);
  solver::grad_cols(img, gc, 2, 2);
  CHECK(gr[0] == 1.0);
  CHECK(gr[1] == 1.0);
  CHECK(gr[2] == -1.0);
  CHECK(gr[3] == -1.0);
  for (double v : gc) CHECK(v == 0.0);
  CHECK(solver::tv_norm(img, 2, 2) == 4.0);
}

TEST_CASE("gradient adjoints satisfy the inner-product identity") {
  const std::size_t n1 = 5, n2 = 7, n = n1 * n2;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(n), v(n), gx(n), gtv(n);
  for (auto& a : x) a = dist(rng);
  for (auto& a : v) a = dist(rng);

  solver::grad_rows(x.data(), gx.data(), n1, n2);
  solver::grad_rows_adj(v.data(), gtv.data(), n1, n2);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lhs += gx[i] * v[i];
    rhs += x[i] * gtv[i];
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));

  solver::grad_cols(x.data(), gx.data(), n1, n2);
  solver::grad_cols_adj(v.data(), gtv.data(), n1, n2);
  lhs = rhs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lhs += gx[i] * v[i];
    rhs += x[i] * gtv[i];
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}

TEST_CASE("periodic gradients lose exactly one dimension per line") {
  auto Gr = dense_op([](const double* a, double* b, std::size_t r, std::size_t c) {
    solver::grad_rows(a, b, r, c);
  }, 4, 4);
  auto Gc = dense_op([](const double* a, double* b, std::size_t r, std::size_t c) {
    solver::grad_cols(a, b, r, c);
  }, 4, 4);
  // nullspace of the row gradient: fields constant along each column
  CHECK(matrix_rank(Gr, 16) == 12);
  CHECK(matrix_rank(Gc, 16) == 12);
  // every gradient row sums to zero (differences of a constant vanish)
  for (std::size_t i = 0; i < 16; ++i) {
    double sr = 0.0, sc = 0.0;
    for (std::size_t j = 0; j < 16; ++j) {
      sr += Gr[i * 16 + j];
      sc += Gc[i * 16 + j];
    }
    CHECK(sr == 0.0);
    CHECK(sc == 0.0);
  }
}

TEST_CASE("full sampling pins both reconstructions to the original") {
  const std::size_t n1 = 8, n2 = 8;
  auto truth = sparse_truth(n1, n2, 12, 5);
  auto plan = sampling::build_plan_sequency(64, 0.0, true, 0);
  auto y = sampling::sample_cube(plan, truth);

  for (int method = 0; method < 2; ++method) {
    auto r = method == 0 ? solver::reconstruct_l1(plan, y, n1, n2)
                         : solver::reconstruct_tv(plan, y, n1, n2);
    CHECK(r.converged);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < r.recon.data.size(); ++i) {
      num += (r.recon.data[i] - truth.data[i]) * (r.recon.data[i] - truth.data[i]);
      den += truth.data[i] * truth.data[i];
    }
    CHECK(std::sqrt(num / den) < 1e-3);
  }
}

TEST_CASE("l1 solver recovers sparse wavelet scenes from half the rows") {
  const std::size_t n1 = 8, n2 = 8;
  auto plan = sampling::build_plan_sequency(64, 0.5, true, 0);
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    std::vector<double> u_true;
    auto truth = sparse_truth(n1, n2, 5, seed, &u_true);
    auto y = sampling::sample_cube(plan, truth);
    auto r = solver::reconstruct_l1(plan, y, n1, n2);
    CAPTURE(seed);
    CHECK(r.converged);
    CHECK(r.iterations <= 200);
    CHECK(max_abs_diff(r.recon.data, truth.data) < 1e-3);

    // the recovered scene is as sparse as the truth
    std::vector<double> u_rec(64);
    wavelet::forward(wavelet::make_haar(64), r.recon.band_ptr(0), u_rec.data());
    double l1_true = 0.0, l1_rec = 0.0;
    for (std::size_t i = 0; i < 64; ++i) {
      l1_true += std::fabs(u_true[i]);
      l1_rec += std::fabs(u_rec[i]);
    }
    CHECK(l1_rec <= 1.05 * l1_true);
  }
}

TEST_CASE("tv solver recovers a two-region image from half the rows") {
  const std::size_t n1 = 16, n2 = 16;
  cube::HyperCube truth(n1, n2, 1);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      truth.at(i, j, 0) = (i >= 4 && i < 10 && j >= 5 && j < 12) ? 3.0 : 1.0;

  auto plan = shuffled_plan(256, 0.5, 9);
  auto y = sampling::sample_cube(plan, truth);
  auto r = solver::reconstruct_tv(plan, y, n1, n2);
  CHECK(r.converged);
  CHECK(max_abs_diff(r.recon.data, truth.data) < 1e-2);
  CHECK(solver::tv_norm(r.recon.band_ptr(0), n1, n2) <=
        1.05 * solver::tv_norm(truth.band_ptr(0), n1, n2));
}

TEST_CASE("reconstruction scales linearly with the measurements") {
  const std::size_t n1 = 8, n2 = 8;
  auto truth = sparse_truth(n1, n2, 6, 21);
  auto plan = sampling::build_plan_sequency(64, 0.5, true, 0);
  auto y = sampling::sample_cube(plan, truth);

  auto y2 = y;
  for (auto& v : y2.data) v *= 2.0;  // power-of-two scale, exact in binary
  auto y37 = y;
  for (auto& v : y37.data) v *= 3.7;

  auto r = solver::reconstruct_l1(plan, y, n1, n2);
  auto r2 = solver::reconstruct_l1(plan, y2, n1, n2);
  auto r37 = solver::reconstruct_l1(plan, y37, n1, n2);
  for (std::size_t i = 0; i < r.recon.data.size(); ++i) {
    CHECK(r2.recon.data[i] == 2.0 * r.recon.data[i]);
    CHECK(r37.recon.data[i] ==
          doctest::Approx(3.7 * r.recon.data[i]).epsilon(1e-6));
  }

  auto t = solver::reconstruct_tv(plan, y, n1, n2);
  auto t2 = solver::reconstruct_tv(plan, y2, n1, n2);
  for (std::size_t i = 0; i < t.recon.data.size(); ++i)
    CHECK(t2.recon.data[i] == 2.0 * t.recon.data[i]);
}

TEST_CASE("zero measurements give a zero scene without iterating") {
  auto plan = sampling::build_plan_sequency(64, 0.5, true, 0);
  sampling::Measurements y(plan.k, 2);  // all zeros
  auto r = solver::reconstruct_l1(plan, y, 8, 8);
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  for (double v : r.recon.data) CHECK(v == 0.0);
}

TEST_CASE("bands are reconstructed independently") {
  const std::size_t n1 = 8, n2 = 8;
  auto truth = sparse_truth(n1, n2, 6, 31);
  auto plan = sampling::build_plan_sequency(64, 0.5, true, 0);
  auto y1 = sampling::sample_cube(plan, truth);

  sampling::Measurements y(plan.k, 2);
  for (std::size_t i = 0; i < plan.k; ++i) {
    y.at(i, 0) = y1.at(i, 0);
    y.at(i, 1) = 2.0 * y1.at(i, 0);
  }
  auto r = solver::reconstruct_l1(plan, y, n1, n2);
  for (std::size_t p = 0; p < 64; ++p)
    CHECK(r.recon.band_ptr(1)[p] == 2.0 * r.recon.band_ptr(0)[p]);
}

TEST_CASE("residual history is recorded and ends under the tolerance") {
  const std::size_t n1 = 8, n2 = 8;
  auto truth = sparse_truth(n1, n2, 5, 41);
  auto plan = sampling::build_plan_sequency(64, 0.5, true, 0);
  auto y = sampling::sample_cube(plan, truth);
  solver::SolverParams p;
  auto r = solver::reconstruct_l1(plan, y, n1, n2, p);
  REQUIRE(!r.history.empty());
  CHECK(r.history.size() == r.iterations);
  CHECK(r.history.back() <= p.outer_tol);
  CHECK(r.history.back() <= r.history.front());
  REQUIRE(r.bands.size() == 1);
  CHECK(r.bands[0].converged);
  CHECK(r.bands[0].residual == r.history.back());
}

TEST_CASE("solver rejects inconsistent inputs") {
  auto plan = sampling::build_plan_sequency(64, 0.5, true, 0);
  sampling::Measurements y(plan.k, 1);
  CHECK_THROWS_AS(solver::reconstruct_l1(plan, y, 4, 4), InputError);   // n1*n2 != n
  sampling::Measurements bad(plan.k - 1, 1);
  CHECK_THROWS_AS(solver::reconstruct_l1(plan, bad, 8, 8), InputError);
  solver::SolverParams p;
  p.mu = 0.0;
  CHECK_THROWS_AS(solver::reconstruct_tv(plan, y, 8, 8, p), InputError);
  p = {};
  p.max_outer = 0;
  CHECK_THROWS_AS(solver::reconstruct_tv(plan, y, 8, 8, p), InputError);
}

TEST_CASE("reconstruction saves a cube and a sidecar") {
  const auto dir = fs::temp_directory_path() / "hypercs_solver_test";
  fs::create_directories(dir);
  auto truth = sparse_truth(8, 8, 4, 51);
  auto plan = sampling::build_plan_sequency(64, 0.5, true, 0);
  auto y = sampling::sample_cube(plan, truth);
  solver::SolverParams params;
  auto r = solver::reconstruct_l1(plan, y, 8, 8, params);
  const auto p = dir / "recon.hsc";
  solver::save_reconstruction(r, p, "l1", params);

  auto back = cube::load_cube(p);
  CHECK(back.data == r.recon.data);

  std::ifstream side(dir / "recon.hsc.json");
  REQUIRE(side.good());
  nlohmann::json j;
  side >> j;
  CHECK(j.at("method") == "l1");
  CHECK(j.at("converged") == r.converged);
  CHECK(j.at("iterations").get<std::size_t>() == r.iterations);
  CHECK(j.at("params").at("mu") == params.mu);
  CHECK(j.at("residual_history").size() == r.history.size());
}
