#include "hypercs/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "hypercs/errors.hpp"
#include "hypercs/kernels.hpp"
#include "hypercs/wavelet.hpp"

namespace hypercs::solver {

namespace {

void check_inputs(const sampling::SamplingPlan& plan, const sampling::Measurements& y,
                  std::size_t n1, std::size_t n2, const SolverParams& p) {
  plan.validate();
  if (n1 * n2 != plan.n) throw InputError("reconstruct: n1*n2 does not match the plan");
  if (y.k != plan.k) throw InputError("reconstruct: measurement rows != plan k");
  if (y.b == 0) throw InputError("reconstruct: no bands");
  if (!(p.mu > 0.0) || !(p.lambda > 0.0)) throw InputError("reconstruct: mu, lambda must be > 0");
  if (!(p.outer_tol > 0.0) || !(p.inner_cg_tol > 0.0))
    throw InputError("reconstruct: tolerances must be > 0");
  if (p.max_outer == 0 || p.inner_cg_max == 0)
    throw InputError("reconstruct: iteration caps must be >= 1");
}

// Per-band driver shared by both solvers. solve_band writes the
// reconstructed flattened band and appends its residual after every outer
// iteration to its history.
template <typename SolveBand>
ReconstructionResult run_bands(const sampling::SamplingPlan& plan,
                               const sampling::Measurements& y01, std::size_t n1, std::size_t n2,
                               SolveBand&& solve_band) {
  const auto y = sampling::to_pm_domain(plan, y01);
  ReconstructionResult result;
  result.recon = cube::HyperCube(n1, n2, y.b);
  result.bands.resize(y.b);
  std::vector<std::vector<double>> histories(y.b);

  // Bands are solved in units where ||y|| = n, which keeps pixel values near
  // 1 for nonnegative scenes and makes the shrink thresholds scale-free. The
  // rescale is exact for power-of-two changes of the input.
  std::vector<double> yb(plan.k);
  for (std::size_t band = 0; band < y.b; ++band) {
    for (std::size_t i = 0; i < plan.k; ++i) yb[i] = y.at(i, band);
    const double norm = std::sqrt(kernels::norm2sq(yb.data(), plan.k));
    BandResult& br = result.bands[band];
    if (norm == 0.0) {
      br.converged = true;  // only x = 0 is consistent with zero measurements
      continue;
    }
    const double gain = double(plan.n) / norm;
    for (auto& v : yb) v *= gain;
    solve_band(yb, result.recon.band_ptr(band), br, histories[band]);
    double* x = result.recon.band_ptr(band);
    for (std::size_t p = 0; p < plan.n; ++p) x[p] /= gain;
  }

  std::size_t depth = 0;
  for (const auto& h : histories) depth = std::max(depth, h.size());
  result.history.resize(depth, 0.0);
  for (std::size_t band = 0; band < y.b; ++band) {
    const auto& h = histories[band];
    for (std::size_t t = 0; t < depth; ++t) {
      const double r = h.empty() ? 0.0 : (t < h.size() ? h[t] : h.back());
      result.history[t] = std::max(result.history[t], r);
    }
    result.iterations = std::max(result.iterations, result.bands[band].iterations);
  }
  result.converged = std::all_of(result.bands.begin(), result.bands.end(),
                                 [](const BandResult& b) { return b.converged; });
  return result;
}

}  // namespace

void grad_rows(const double* img, double* out, std::size_t n1, std::size_t n2) {
  for (std::size_t i = 0; i < n1; ++i) {
    const std::size_t inext = (i + 1 == n1) ? 0 : i + 1;
    for (std::size_t j = 0; j < n2; ++j) out[i * n2 + j] = img[inext * n2 + j] - img[i * n2 + j];
  }
}

void grad_cols(const double* img, double* out, std::size_t n1, std::size_t n2) {
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) {
      const std::size_t jnext = (j + 1 == n2) ? 0 : j + 1;
      out[i * n2 + j] = img[i * n2 + jnext] - img[i * n2 + j];
    }
}

void grad_rows_adj(const double* v, double* out, std::size_t n1, std::size_t n2) {
  for (std::size_t i = 0; i < n1; ++i) {
    const std::size_t iprev = (i == 0) ? n1 - 1 : i - 1;
    for (std::size_t j = 0; j < n2; ++j) out[i * n2 + j] = v[iprev * n2 + j] - v[i * n2 + j];
  }
}

void grad_cols_adj(const double* v, double* out, std::size_t n1, std::size_t n2) {
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) {
      const std::size_t jprev = (j == 0) ? n2 - 1 : j - 1;
      out[i * n2 + j] = v[i * n2 + jprev] - v[i * n2 + j];
    }
}

double tv_norm(const double* img, std::size_t n1, std::size_t n2) {
  double s = 0.0;
  for (std::size_t i = 0; i < n1; ++i) {
    const std::size_t inext = (i + 1 == n1) ? 0 : i + 1;
    for (std::size_t j = 0; j < n2; ++j) {
      const std::size_t jnext = (j + 1 == n2) ? 0 : j + 1;
      s += std::fabs(img[inext * n2 + j] - img[i * n2 + j]) +
           std::fabs(img[i * n2 + jnext] - img[i * n2 + j]);
    }
  }
  return s;
}

ReconstructionResult reconstruct_l1(const sampling::SamplingPlan& plan,
                                    const sampling::Measurements& y, std::size_t n1,
                                    std::size_t n2, const SolverParams& params) {
  check_inputs(plan, y, n1, n2, params);
  const std::size_t n = plan.n;
  const std::size_t k = plan.k;
  const auto haar = wavelet::make_haar(n);
  sampling::WalshOp op(plan);

  // With W = measurement rows and H the orthonormal wavelet, the forward
  // map A = W H^T satisfies A A^T = n I, so (lambda I + mu A^T A) inverts in
  // closed form through the projection P = A^T A / n.
  std::vector<double> xbuf(n), u(n), uprev(n), d(n), bb(n), rhs(n), proj(n), au(k), yb(k),
      resid(k);

  auto apply_A = [&](const double* uu, double* out_k) {
    wavelet::inverse(haar, uu, xbuf.data());
    op.apply(xbuf.data(), out_k);
  };
  auto apply_At = [&](const double* yy, double* out_n) {
    op.apply_adjoint(yy, xbuf.data());
    wavelet::forward(haar, xbuf.data(), out_n);
  };

  return run_bands(plan, y, n1, n2,
                   [&](const std::vector<double>& yband, double* x_out, BandResult& br,
                       std::vector<double>& history) {
    std::fill(u.begin(), u.end(), 0.0);
    std::fill(uprev.begin(), uprev.end(), 0.0);
    std::fill(d.begin(), d.end(), 0.0);
    std::fill(bb.begin(), bb.end(), 0.0);
    yb = yband;  // Bregman-updated measurement vector

    const double denom_perp = 1.0 / params.lambda;
    const double denom_range = 1.0 / (params.lambda + params.mu * double(n));

    std::size_t stall = 0;
    for (std::size_t outer = 0; outer < params.max_outer; ++outer) {
      uprev = u;
      // u-step: (lambda I + mu A^T A) u = mu A^T yb + lambda (d - b)
      apply_At(yb.data(), rhs.data());
      for (std::size_t i = 0; i < n; ++i)
        rhs[i] = params.mu * rhs[i] + params.lambda * (d[i] - bb[i]);
      apply_A(rhs.data(), au.data());
      apply_At(au.data(), proj.data());
      for (std::size_t i = 0; i < n; ++i) {
        const double p = proj[i] / double(n);
        u[i] = (rhs[i] - p) * denom_perp + p * denom_range;
      }

      for (std::size_t i = 0; i < n; ++i) d[i] = u[i] + bb[i];
      kernels::shrink(d.data(), 1.0 / params.lambda, d.data(), n);
      for (std::size_t i = 0; i < n; ++i) bb[i] += u[i] - d[i];

      apply_A(u.data(), au.data());
      for (std::size_t i = 0; i < k; ++i) resid[i] = yband[i] - au[i];
      const double rel = std::sqrt(kernels::norm2sq(resid.data(), k)) / double(n);
      history.push_back(rel);  // relative residual: ||yband|| == n
      br.iterations = outer + 1;
      br.residual = rel;

      // feasible alone is not enough: the shrink state must also settle,
      // otherwise the objective is still being minimized; two consecutive
      // stalls guard against transient plateaus
      for (std::size_t i = 0; i < n; ++i) uprev[i] = u[i] - uprev[i];
      const double step = std::sqrt(kernels::norm2sq(uprev.data(), n));
      const double unorm = std::sqrt(kernels::norm2sq(u.data(), n));
      stall = (rel <= params.outer_tol && step <= params.outer_tol * std::max(unorm, 1e-30))
                  ? stall + 1
                  : 0;
      if (stall >= 2) {
        br.converged = true;
        break;
      }
      for (std::size_t i = 0; i < k; ++i) yb[i] += resid[i];
    }
    wavelet::inverse(haar, u.data(), x_out);
  });
}

ReconstructionResult reconstruct_tv(const sampling::SamplingPlan& plan,
                                    const sampling::Measurements& y, std::size_t n1,
                                    std::size_t n2, const SolverParams& params) {
  check_inputs(plan, y, n1, n2, params);
  const std::size_t n = plan.n;
  const std::size_t k = plan.k;
  sampling::WalshOp op(plan);

  std::vector<double> x(n), xprev(n), dx(n), dy(n), bx(n), by(n), rhs(n), gx(n), gy(n), tmp(n);
  std::vector<double> cg_r(n), cg_p(n), cg_mp(n);
  std::vector<double> yk(k), yb(k), resid(k);

  // M v = mu S^T S v + lambda (Gr^T Gr + Gc^T Gc) v; positive definite since
  // the all-ones row pins the constant mode the gradients cannot see
  auto apply_M = [&](const double* v, double* out) {
    op.apply(v, yk.data());
    op.apply_adjoint(yk.data(), out);
    for (std::size_t i = 0; i < n; ++i) out[i] *= params.mu;
    grad_rows(v, gx.data(), n1, n2);
    grad_rows_adj(gx.data(), tmp.data(), n1, n2);
    kernels::axpy(params.lambda, tmp.data(), out, n);
    grad_cols(v, gy.data(), n1, n2);
    grad_cols_adj(gy.data(), tmp.data(), n1, n2);
    kernels::axpy(params.lambda, tmp.data(), out, n);
  };

  auto cg_solve = [&](const std::vector<double>& b, std::vector<double>& sol) {
    const double btol = params.inner_cg_tol * std::sqrt(kernels::norm2sq(b.data(), n));
    apply_M(sol.data(), cg_mp.data());
    for (std::size_t i = 0; i < n; ++i) cg_r[i] = b[i] - cg_mp[i];
    double rs = kernels::norm2sq(cg_r.data(), n);
    if (std::sqrt(rs) <= btol) return;
    cg_p = cg_r;
    for (std::size_t it = 0; it < params.inner_cg_max; ++it) {
      apply_M(cg_p.data(), cg_mp.data());
      const double pmp = kernels::dot(cg_p.data(), cg_mp.data(), n);
      if (pmp <= 0.0) break;
      const double alpha = rs / pmp;
      kernels::axpy(alpha, cg_p.data(), sol.data(), n);
      kernels::axpy(-alpha, cg_mp.data(), cg_r.data(), n);
      const double rs_new = kernels::norm2sq(cg_r.data(), n);
      if (std::sqrt(rs_new) <= btol) break;
      const double beta = rs_new / rs;
      for (std::size_t i = 0; i < n; ++i) cg_p[i] = cg_r[i] + beta * cg_p[i];
      rs = rs_new;
    }
  };

  return run_bands(plan, y, n1, n2,
                   [&](const std::vector<double>& yband, double* x_out, BandResult& br,
                       std::vector<double>& history) {
    std::fill(x.begin(), x.end(), 0.0);
    std::fill(xprev.begin(), xprev.end(), 0.0);
    std::fill(dx.begin(), dx.end(), 0.0);
    std::fill(dy.begin(), dy.end(), 0.0);
    std::fill(bx.begin(), bx.end(), 0.0);
    std::fill(by.begin(), by.end(), 0.0);
    yb = yband;

    std::size_t stall = 0;
    for (std::size_t outer = 0; outer < params.max_outer; ++outer) {
      xprev = x;
      // x-step by warm-started CG
      op.apply_adjoint(yb.data(), rhs.data());
      for (std::size_t i = 0; i < n; ++i) rhs[i] *= params.mu;
      for (std::size_t i = 0; i < n; ++i) tmp[i] = dx[i] - bx[i];
      grad_rows_adj(tmp.data(), gx.data(), n1, n2);
      kernels::axpy(params.lambda, gx.data(), rhs.data(), n);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = dy[i] - by[i];
      grad_cols_adj(tmp.data(), gy.data(), n1, n2);
      kernels::axpy(params.lambda, gy.data(), rhs.data(), n);
      cg_solve(rhs, x);

      grad_rows(x.data(), gx.data(), n1, n2);
      grad_cols(x.data(), gy.data(), n1, n2);
      for (std::size_t i = 0; i < n; ++i) dx[i] = gx[i] + bx[i];
      kernels::shrink(dx.data(), 1.0 / params.lambda, dx.data(), n);
      for (std::size_t i = 0; i < n; ++i) dy[i] = gy[i] + by[i];
      kernels::shrink(dy.data(), 1.0 / params.lambda, dy.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        bx[i] += gx[i] - dx[i];
        by[i] += gy[i] - dy[i];
      }

      op.apply(x.data(), yk.data());
      for (std::size_t i = 0; i < k; ++i) resid[i] = yband[i] - yk[i];
      const double rel = std::sqrt(kernels::norm2sq(resid.data(), k)) / double(n);
      history.push_back(rel);  // relative residual: ||yband|| == n
      br.iterations = outer + 1;
      br.residual = rel;

      for (std::size_t i = 0; i < n; ++i) xprev[i] = x[i] - xprev[i];
      const double step = std::sqrt(kernels::norm2sq(xprev.data(), n));
      const double xnorm = std::sqrt(kernels::norm2sq(x.data(), n));
      stall = (rel <= params.outer_tol && step <= params.outer_tol * std::max(xnorm, 1e-30))
                  ? stall + 1
                  : 0;
      if (stall >= 2) {
        br.converged = true;
        break;
      }
      for (std::size_t i = 0; i < k; ++i) yb[i] += resid[i];
    }
    std::copy(x.begin(), x.end(), x_out);
  });
}

void save_reconstruction(const ReconstructionResult& r, const std::filesystem::path& cube_path,
                         const std::string& method, const SolverParams& params) {
  cube::save_cube(r.recon, cube_path);
  nlohmann::json j;
  j["method"] = method;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["residual_history"] = r.history;
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& b : r.bands)
    bands.push_back({{"iterations", b.iterations}, {"residual", b.residual},
                     {"converged", b.converged}});
  j["bands"] = bands;
  j["params"] = {{"mu", params.mu},
                 {"lambda", params.lambda},
                 {"outer_tol", params.outer_tol},
                 {"max_outer", params.max_outer},
                 {"inner_cg_tol", params.inner_cg_tol},
                 {"inner_cg_max", params.inner_cg_max}};
  auto sidecar = cube_path;
  sidecar += ".json";
  std::ofstream os(sidecar);
  if (!os) throw InputError("cannot write sidecar: " + sidecar.string());
  os << j.dump(2) << "\n";
}

}  // namespace hypercs::solver
