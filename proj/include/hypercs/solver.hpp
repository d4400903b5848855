#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "hypercs/cube.hpp"
#include "hypercs/sampling.hpp"

namespace hypercs::solver {

struct SolverParams {
  double mu = 1.0;
  double lambda = 1.0;
  double outer_tol = 1e-4;    // relative constraint residual target
  std::size_t max_outer = 600;
  double inner_cg_tol = 1e-6;
  std::size_t inner_cg_max = 100;
};

struct BandResult {
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct ReconstructionResult {
  cube::HyperCube recon;
  std::vector<BandResult> bands;
  // max relative residual across bands after each outer iteration;
  // bands that stop early keep contributing their final value
  std::vector<double> history;
  std::size_t iterations = 0;  // max over bands
  bool converged = false;      // all bands
};

// Measurements are taken per band; both solvers treat bands independently.
// Shifted measurements are converted to the +/-1 row convention internally.

// basis-pursuit reconstruction: sparsest wavelet representation that
// reproduces the measurements
ReconstructionResult reconstruct_l1(const sampling::SamplingPlan& plan,
                                    const sampling::Measurements& y, std::size_t n1,
                                    std::size_t n2, const SolverParams& params = {});

// total-variation reconstruction: minimal anisotropic TV subject to the
// measurement constraint
ReconstructionResult reconstruct_tv(const sampling::SamplingPlan& plan,
                                    const sampling::Measurements& y, std::size_t n1,
                                    std::size_t n2, const SolverParams& params = {});

// periodic forward differences on an n1 x n2 image and their adjoints
void grad_rows(const double* img, double* out, std::size_t n1, std::size_t n2);
void grad_cols(const double* img, double* out, std::size_t n1, std::size_t n2);
void grad_rows_adj(const double* v, double* out, std::size_t n1, std::size_t n2);
void grad_cols_adj(const double* v, double* out, std::size_t n1, std::size_t n2);
double tv_norm(const double* img, std::size_t n1, std::size_t n2);

// writes the cube and a .json sidecar with convergence details next to it
void save_reconstruction(const ReconstructionResult& r, const std::filesystem::path& cube_path,
                         const std::string& method, const SolverParams& params);

}  // namespace hypercs::solver
