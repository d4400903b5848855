#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "hypercs/errors.hpp"
#include "hypercs/sampling.hpp"

using namespace hypercs;
namespace fs = std::filesystem;

namespace {

// dense Sylvester Hadamard matrix built by recursion, independent of the
// in-place transform under test
std::vector<std::vector<double>> dense_hadamard(std::size_t n) {
  std::vector<std::vector<double>> H = {{1.0}};
  for (std::size_t m = 1; m < n; m *= 2) {
    std::vector<std::vector<double>> next(2 * m, std::vector<double>(2 * m));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        next[i][j] = H[i][j];
        next[i][j + m] = H[i][j];
        next[i + m][j] = H[i][j];
        next[i + m][j + m] = -H[i][j];
      }
    H = std::move(next);
  }
  return H;
}

std::size_t sign_changes(const std::vector<double>& row) {
  std::size_t c = 0;
  for (std::size_t i = 1; i < row.size(); ++i)
    if (row[i] * row[i - 1] < 0.0) ++c;
  return c;
}

cube::HyperCube cube_from_band(const std::vector<double>& img, std::size_t n1, std::size_t n2) {
  cube::HyperCube c(n1, n2, 1);
  std::copy(img.begin(), img.end(), c.band_ptr(0));
  return c;
}

fs::path temp_dir() {
  auto p = fs::temp_directory_path() / "hypercs_sampling_test";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("measurement count from compression ratio") {
  CHECK(sampling::rows_for_compression(4096, 0.9) == 410);
  CHECK(sampling::rows_for_compression(4096, 0.0) == 4096);
  CHECK(sampling::rows_for_compression(64, 0.5) == 32);
  CHECK(sampling::rows_for_compression(64, 0.99) == 1);
  CHECK_THROWS_AS(sampling::rows_for_compression(64, 1.0), InputError);
  CHECK_THROWS_AS(sampling::rows_for_compression(64, -0.1), InputError);
}

TEST_CASE("sequency-to-natural mapping") {
  CHECK(sampling::sequency_to_natural(0, 2) == 0);
  CHECK(sampling::sequency_to_natural(1, 2) == 2);
  CHECK(sampling::sequency_to_natural(2, 2) == 3);
  CHECK(sampling::sequency_to_natural(3, 2) == 1);

  const std::uint32_t n8[8] = {0, 4, 6, 2, 3, 7, 5, 1};
  for (std::uint32_t s = 0; s < 8; ++s) CHECK(sampling::sequency_to_natural(s, 3) == n8[s]);

  // definitional check: the mapped row has exactly s sign changes
  const std::size_t n = 16;
  auto H = dense_hadamard(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    auto r = sampling::sequency_to_natural(s, 4);
    CHECK(sign_changes(H[r]) == s);
  }
}

TEST_CASE("sequency plan takes the k lowest sequencies in order") {
  auto plan = sampling::build_plan_sequency(64, 0.5, true, 7);
  CHECK(plan.k == 32);
  CHECK(plan.row_order.size() == 32);
  CHECK(plan.row_order[0] == 0);
  auto H = dense_hadamard(64);
  for (std::size_t i = 0; i < plan.k; ++i) CHECK(sign_changes(H[plan.row_order[i]]) == i);
}

TEST_CASE("plan validation catches inconsistencies") {
  auto plan = sampling::build_plan_sequency(16, 0.5, true, 1);
  CHECK_NOTHROW(plan.validate());

  auto dup = plan;
  dup.row_order[3] = dup.row_order[2];
  CHECK_THROWS_AS(dup.validate(), InputError);

  auto wrong_k = plan;
  wrong_k.k = 7;
  CHECK_THROWS_AS(wrong_k.validate(), InputError);

  auto no_ones = plan;
  std::swap(no_ones.row_order[0], no_ones.row_order[1]);
  CHECK_THROWS_AS(no_ones.validate(), InputError);
  no_ones.shifted = false;  // without the mask trick any order is fine
  CHECK_NOTHROW(no_ones.validate());

  auto oob = plan;
  oob.row_order[5] = 16;
  CHECK_THROWS_AS(oob.validate(), InputError);
}

TEST_CASE("sample_cube matches the dense matrix product") {
  const std::size_t n = 16;
  auto H = dense_hadamard(n);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(0.0, 5.0);
  cube::HyperCube c(4, 4, 3);
  for (auto& x : c.data) x = dist(rng);

  auto plan = sampling::build_plan_sequency(n, 0.5, false, 0);
  auto m = sampling::sample_cube(plan, c);
  REQUIRE(m.k == 8);
  REQUIRE(m.b == 3);
  for (std::size_t band = 0; band < 3; ++band)
    for (std::size_t i = 0; i < plan.k; ++i) {
      double expect = 0.0;
      for (std::size_t p = 0; p < n; ++p) expect += H[plan.row_order[i]][p] * c.band_ptr(band)[p];
      CHECK(m.at(i, band) == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("shifted sampling uses the 0/1 mask and converts back exactly") {
  const std::size_t n = 64;
  auto H = dense_hadamard(n);
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> dist(0.0, 3.0);  // nonneg scene
  cube::HyperCube c(8, 8, 2);
  for (auto& x : c.data) x = dist(rng);

  auto plan = sampling::build_plan_sequency(n, 0.75, true, 0);
  auto y01 = sampling::sample_cube(plan, c);

  for (std::size_t band = 0; band < 2; ++band)
    for (std::size_t i = 0; i < plan.k; ++i) {
      double expect = 0.0;
      for (std::size_t p = 0; p < n; ++p)
        expect += 0.5 * (1.0 + H[plan.row_order[i]][p]) * c.band_ptr(band)[p];
      CHECK(y01.at(i, band) == doctest::Approx(expect).epsilon(1e-13));
      CHECK(y01.at(i, band) >= 0.0);  // {0,1} mask on a nonnegative scene
    }

  auto ypm = sampling::to_pm_domain(plan, y01);
  auto direct = sampling::sample_cube(
      [&] {
        auto p = plan;
        p.shifted = false;
        return p;
      }(),
      c);
  for (std::size_t i = 0; i < ypm.data.size(); ++i)
    CHECK(ypm.data[i] == doctest::Approx(direct.data[i]).epsilon(1e-12));

  auto unshifted_plan = plan;
  unshifted_plan.shifted = false;
  auto same = sampling::to_pm_domain(unshifted_plan, direct);
  CHECK(same.data == direct.data);
}

TEST_CASE("selected rows satisfy S S^T = n I") {
  for (std::size_t n : {std::size_t(64), std::size_t(256)}) {
    auto plan = sampling::build_plan_sequency(n, 0.8, true, 0);
    auto H = dense_hadamard(n);
    for (std::size_t a = 0; a < plan.k; ++a)
      for (std::size_t b = 0; b < plan.k; ++b) {
        double dot = 0.0;
        for (std::size_t p = 0; p < n; ++p)
          dot += H[plan.row_order[a]][p] * H[plan.row_order[b]][p];
        CHECK(dot == (a == b ? double(n) : 0.0));
      }
  }
}

TEST_CASE("WalshOp apply and adjoint match dense products") {
  const std::size_t n = 64;
  auto plan = sampling::build_plan_sequency(n, 0.5, true, 0);
  auto H = dense_hadamard(n);
  sampling::WalshOp op(plan);

  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(n), y(plan.k), yt(plan.k), xt(n);
  for (auto& v : x) v = dist(rng);
  for (auto& v : yt) v = dist(rng);

  op.apply(x.data(), y.data());
  for (std::size_t i = 0; i < plan.k; ++i) {
    double expect = 0.0;
    for (std::size_t p = 0; p < n; ++p) expect += H[plan.row_order[i]][p] * x[p];
    CHECK(y[i] == doctest::Approx(expect).epsilon(1e-13));
  }

  op.apply_adjoint(yt.data(), xt.data());
  for (std::size_t p = 0; p < n; ++p) {
    double expect = 0.0;
    for (std::size_t i = 0; i < plan.k; ++i) expect += H[plan.row_order[i]][p] * yt[i];
    CHECK(xt[p] == doctest::Approx(expect).epsilon(1e-13));
  }

  // adjoint identity <Sx, y> == <x, S^T y>
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < plan.k; ++i) lhs += y[i] * yt[i];
  for (std::size_t p = 0; p < n; ++p) rhs += x[p] * xt[p];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("max-variance ordering ranks rows by measured energy") {
  const std::size_t n = 16;
  auto H = dense_hadamard(n);
  // training frames that are pure Walsh modes with distinct amplitudes:
  // row 9 sees variance 4n^2/6, row 5 sees n^2/6 * 2, row 3 sees n^2/24
  std::vector<cube::HyperCube> training;
  auto add_pair = [&](std::size_t mode, double amp) {
    std::vector<double> img(n);
    for (std::size_t p = 0; p < n; ++p) img[p] = amp * H[mode][p];
    training.push_back(cube_from_band(img, 4, 4));
    for (auto& v : img) v = -v;
    training.push_back(cube_from_band(img, 4, 4));
  };
  add_pair(5, 1.0);
  add_pair(9, 2.0);
  add_pair(3, 0.5);

  auto plan = sampling::build_plan_max_variance(n, 0.75, true, training, 123);
  REQUIRE(plan.k == 4);
  CHECK(plan.row_order[0] == 0);
  CHECK(plan.row_order[1] == 9);
  CHECK(plan.row_order[2] == 5);
  CHECK(plan.row_order[3] == 3);

  auto again = sampling::build_plan_max_variance(n, 0.75, true, training, 123);
  CHECK(again.row_order == plan.row_order);

  // zero-variance ties fall back to ascending natural index
  auto wide = sampling::build_plan_max_variance(n, 0.5, true, training, 123);
  REQUIRE(wide.k == 8);
  std::vector<std::uint32_t> tail(wide.row_order.begin() + 4, wide.row_order.end());
  CHECK(tail == std::vector<std::uint32_t>{1, 2, 4, 6});
}

TEST_CASE("plan json and measurement files round-trip") {
  const auto dir = temp_dir();
  auto plan = sampling::build_plan_sequency(64, 0.75, true, 99);
  const auto pp = dir / "plan.json";
  sampling::save_plan(plan, pp);
  auto back = sampling::load_plan(pp);
  CHECK(back.n == plan.n);
  CHECK(back.k == plan.k);
  CHECK(back.compression == plan.compression);
  CHECK(back.shifted == plan.shifted);
  CHECK(back.ordering == plan.ordering);
  CHECK(back.row_order == plan.row_order);
  CHECK(back.seed == plan.seed);

  sampling::Measurements m(5, 3);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (auto& v : m.data) v = dist(rng);
  const auto mp = dir / "m.hsm";
  sampling::save_measurements(m, mp);
  auto mb = sampling::load_measurements(mp);
  CHECK(mb.k == 5);
  CHECK(mb.b == 3);
  CHECK(mb.data == m.data);

  CHECK_THROWS_AS(sampling::load_measurements(pp), InputError);  // wrong magic
  CHECK_THROWS_AS(sampling::load_plan(dir / "missing.json"), InputError);
}
