#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hypercs/cube.hpp"
#include "hypercs/detection.hpp"
#include "hypercs/errors.hpp"
#include "hypercs/harness.hpp"
#include "hypercs/sampling.hpp"
#include "hypercs/solver.hpp"
#include "hypercs/synthdata.hpp"
#include "hypercs/threshold.hpp"

namespace fs = std::filesystem;
using namespace hypercs;

namespace {

std::string frame_csv(const std::string& stem, std::size_t t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu.csv", stem.c_str(), t);
  return buf;
}

std::size_t count_map_frames(const fs::path& dir, const std::string& stem) {
  std::size_t t = 0;
  while (fs::exists(dir / frame_csv(stem, t))) ++t;
  if (t == 0) throw InputError("no " + stem + " maps under " + dir.string());
  return t;
}

synthdata::SceneSpec resolve_scene(const std::string& arg) {
  if (fs::exists(arg)) return synthdata::load_scene(arg);
  return synthdata::preset_scenario(arg);
}

void add_solver_opts(CLI::App* cmd, solver::SolverParams& p) {
  cmd->add_option("--mu", p.mu, "constraint weight");
  cmd->add_option("--lambda", p.lambda, "splitting weight");
  cmd->add_option("--outer-tol", p.outer_tol, "relative residual stop");
  cmd->add_option("--max-outer", p.max_outer, "outer iteration cap");
  cmd->add_option("--cg-tol", p.inner_cg_tol, "inner CG tolerance (tv)");
  cmd->add_option("--cg-max", p.inner_cg_max, "inner CG iteration cap (tv)");
}

struct GenArgs {
  std::string scene;
  fs::path out;
};

void do_gen(const GenArgs& a) {
  const auto spec = resolve_scene(a.scene);
  spec.validate();
  std::vector<cube::HyperCube> frames(spec.frames);
  harness::parallel_frames(spec.frames, [&](std::size_t t) {
    frames[t] = synthdata::gen_frame(spec, t);
  });
  cube::save_sequence(frames, a.out);
  synthdata::save_scene(spec, a.out / "scene.json");
  detection::save_signature({"signature", spec.signature}, a.out / "signature.csv");
  std::cout << "wrote " << spec.frames << " frames to " << a.out.string() << "\n";
}

struct SampleArgs {
  fs::path scene_dir;
  double compression = 0.9;
  std::string ordering = "max_variance";
  bool shifted = true;
  std::uint64_t seed = 7;
  std::size_t train = 20;
  fs::path out;
};

void do_sample(const SampleArgs& a) {
  const std::size_t frames = cube::sequence_length(a.scene_dir);
  if (a.train == 0 || a.train > frames)
    throw InputError("--train must lie in [1, frames]");
  std::vector<cube::HyperCube> cubes(frames);
  harness::parallel_frames(frames, [&](std::size_t t) {
    cubes[t] = cube::load_sequence_frame(a.scene_dir, t);
  });
  const std::size_t n = cubes[0].n1 * cubes[0].n2;

  sampling::SamplingPlan plan;
  if (sampling::ordering_from_name(a.ordering) == sampling::RowOrdering::max_variance) {
    std::vector<cube::HyperCube> train(cubes.begin(), cubes.begin() + std::ptrdiff_t(a.train));
    plan = sampling::build_plan_max_variance(n, a.compression, a.shifted, train, a.seed);
  } else {
    plan = sampling::build_plan_sequency(n, a.compression, a.shifted, a.seed);
  }
  fs::create_directories(a.out);
  sampling::save_plan(plan, a.out / "plan.json");
  harness::parallel_frames(frames, [&](std::size_t t) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.hsm", t);
    sampling::save_measurements(sampling::sample_cube(plan, cubes[t]), a.out / name);
  });
  nlohmann::json m;
  m["frames"] = frames;
  m["k"] = plan.k;
  m["b"] = cubes[0].b;
  m["n1"] = cubes[0].n1;
  m["n2"] = cubes[0].n2;
  std::ofstream os(a.out / "manifest.json");
  os << m.dump(2) << "\n";
  std::cout << "sampled " << frames << " frames at k=" << plan.k << "\n";
}

struct ReconstructArgs {
  fs::path plan;
  fs::path measurements;
  std::string method = "l1";
  fs::path out;
  std::size_t n1 = 0, n2 = 0;
  solver::SolverParams params;
};

void do_reconstruct(const ReconstructArgs& a) {
  if (a.method != "l1" && a.method != "tv")
    throw InputError("--method must be l1 or tv");
  const auto plan = sampling::load_plan(a.plan);

  nlohmann::json manifest;
  {
    std::ifstream is(a.measurements / "manifest.json");
    if (!is) throw InputError("missing manifest.json under " + a.measurements.string());
    try {
      is >> manifest;
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("measurements manifest: ") + e.what());
    }
  }
  const std::size_t frames = manifest.at("frames").get<std::size_t>();
  const std::size_t n1 = a.n1 ? a.n1 : manifest.value("n1", std::size_t{0});
  const std::size_t n2 = a.n2 ? a.n2 : manifest.value("n2", std::size_t{0});
  if (n1 == 0 || n2 == 0)
    throw InputError("cube shape unknown; pass --n1 and --n2");

  fs::create_directories(a.out);
  std::vector<std::size_t> iters(frames, 0);
  harness::parallel_frames(frames, [&](std::size_t t) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.hsm", t);
    const auto meas = sampling::load_measurements(a.measurements / name);
    auto res = a.method == "l1" ? solver::reconstruct_l1(plan, meas, n1, n2, a.params)
                                : solver::reconstruct_tv(plan, meas, n1, n2, a.params);
    iters[t] = res.iterations;
    solver::save_reconstruction(res, cube::sequence_frame_path(a.out, t), a.method, a.params);
  });
  nlohmann::json m;
  m["frames"] = frames;
  m["n1"] = n1;
  m["n2"] = n2;
  m["b"] = manifest.at("b").get<std::size_t>();
  std::ofstream os(a.out / "manifest.json");
  os << m.dump(2) << "\n";
  std::size_t worst = 0;
  for (auto it : iters) worst = std::max(worst, it);
  std::cout << "reconstructed " << frames << " frames (" << a.method
            << "), max outer iterations " << worst << "\n";
}

struct DetectArgs {
  fs::path cubes;
  fs::path signature;
  std::size_t train = 20;
  bool center = true;
  fs::path out;
};

void do_detect(const DetectArgs& a) {
  const std::size_t frames = cube::sequence_length(a.cubes);
  if (a.train == 0 || a.train > frames) throw InputError("--train must lie in [1, frames]");
  const auto sig = detection::load_signature(a.signature);
  std::vector<cube::HyperCube> train(a.train);
  for (std::size_t t = 0; t < a.train; ++t) train[t] = cube::load_sequence_frame(a.cubes, t);
  const auto model = detection::BackgroundModel::fit_frames(train);
  fs::create_directories(a.out);
  harness::parallel_frames(frames, [&](std::size_t t) {
    const auto c = cube::load_sequence_frame(a.cubes, t);
    const auto ace = detection::ace_map(model, sig, c, a.center);
    const auto bulk = detection::bulk_coherence(ace);
    detection::save_map(ace, a.out / frame_csv("ace", t), "ace", std::int64_t(t));
    detection::save_map(bulk, a.out / frame_csv("bulk", t), "bulk", std::int64_t(t));
  });
  std::cout << "wrote ace and bulk maps for " << frames << " frames\n";
}

struct ThresholdArgs {
  fs::path maps;
  std::string stat = "bulk";
  double alpha = 99.0;
  double beta = 1.0;
  std::size_t train = 20;
  std::string label = "custom";
  fs::path out;
};

void do_threshold(const ThresholdArgs& a) {
  if (a.stat != "ace" && a.stat != "bulk")
    throw InputError("--stat must be ace or bulk");
  if (a.train == 0) throw InputError("--train must be >= 1");
  std::vector<detection::Map> maps;
  for (std::size_t t = 0; t < a.train; ++t)
    maps.push_back(detection::load_map(a.maps / frame_csv(a.stat, t)));
  const auto result = threshold::compute_threshold(maps, {a.alpha, a.beta});
  threshold::save_threshold(result, a.out, a.label, a.stat);
  std::cout << "threshold " << result.threshold << " from " << a.train << " maps\n";
}

struct SweepArgs {
  fs::path maps;
  std::string stat = "bulk";
  fs::path threshold_file;
  fs::path out;
};

void do_sweep(const SweepArgs& a) {
  if (a.stat != "ace" && a.stat != "bulk" && a.stat != "bulk_persist")
    throw InputError("--stat must be ace, bulk or bulk_persist");
  const auto tr = threshold::load_threshold(a.threshold_file);
  const auto& mult = threshold::sweep_multipliers();
  const std::string stem = a.stat == "bulk_persist" ? "bulk" : a.stat;
  const std::size_t frames = count_map_frames(a.maps, stem);

  std::vector<std::vector<std::size_t>> counts(frames,
                                               std::vector<std::size_t>(mult.size(), 0));
  if (a.stat == "bulk_persist") {
    std::vector<detection::Map> series;
    for (std::size_t t = 0; t < frames; ++t)
      series.push_back(detection::load_map(a.maps / frame_csv(stem, t)));
    for (std::size_t mi = 0; mi < mult.size(); ++mi) {
      const auto persist = detection::persistence_filter(series, mult[mi] * tr.threshold);
      for (std::size_t t = 0; t < frames; ++t)
        counts[t][mi] = threshold::count_over(persist[t], 0.5);
    }
  } else {
    for (std::size_t t = 0; t < frames; ++t) {
      const auto m = detection::load_map(a.maps / frame_csv(stem, t));
      for (std::size_t mi = 0; mi < mult.size(); ++mi)
        counts[t][mi] = threshold::count_over(m, mult[mi] * tr.threshold);
    }
  }

  std::ofstream os(a.out, std::ios::binary);
  if (!os) throw InputError("cannot open for writing: " + a.out.string());
  os << "frame,statistic,multiplier,threshold,count\n";
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t mi = 0; mi < mult.size(); ++mi) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g,%zu\n", t, a.stat.c_str(), mult[mi],
                    mult[mi] * tr.threshold, counts[t][mi]);
      os << buf;
    }
  std::cout << "swept " << frames << " frames over " << mult.size() << " multipliers\n";
}

struct CompareArgs {
  fs::path a, b, out;
};

struct RunArgs {
  fs::path config;
  fs::path out;
  std::int64_t seed = -1;
};

void do_run(const RunArgs& a) {
  auto cfg = a.config.empty() ? harness::default_config() : harness::load_config(a.config);
  if (a.seed >= 0) cfg.seed = std::uint64_t(a.seed);
  const auto summary = harness::run_pipeline(cfg, a.out);
  std::cout << "report: " << (a.out / "report.csv").string() << "\n";
  std::cout << "report hash: " << summary.report_hash << "\n";
  for (const auto& [key, value] : summary.thresholds)
    std::cout << "threshold " << key << ": " << value << "\n";
  for (const auto& [method, ok] : summary.converged)
    std::cout << method << (ok ? " converged" : " hit the iteration cap") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compressive hyperspectral acquisition, recovery and plume detection"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* cmd_gen = app.add_subcommand("gen", "generate a synthetic scene sequence");
  cmd_gen->add_option("--scene", gen.scene, "preset name or scene JSON path")->required();
  cmd_gen->add_option("--out", gen.out, "output sequence directory")->required();

  SampleArgs sample;
  auto* cmd_sample = app.add_subcommand("sample", "measure a sequence with Walsh patterns");
  cmd_sample->add_option("--scene", sample.scene_dir, "input sequence directory")->required();
  cmd_sample->add_option("--compression", sample.compression, "fraction of rows dropped");
  cmd_sample->add_option("--ordering", sample.ordering, "max_variance | sequency");
  cmd_sample->add_flag("--shifted,!--no-shifted", sample.shifted, "use {0,1} illumination");
  cmd_sample->add_option("--seed", sample.seed, "plan seed");
  cmd_sample->add_option("--train", sample.train, "frames used to rank row variance");
  cmd_sample->add_option("--out", sample.out, "output measurement directory")->required();

  ReconstructArgs rec;
  auto* cmd_rec = app.add_subcommand("reconstruct", "solve for cubes from measurements");
  cmd_rec->add_option("--plan", rec.plan, "plan JSON")->required();
  cmd_rec->add_option("--measurements", rec.measurements, "measurement directory")->required();
  cmd_rec->add_option("--method", rec.method, "l1 | tv");
  cmd_rec->add_option("--n1", rec.n1, "cube rows (else from manifest)");
  cmd_rec->add_option("--n2", rec.n2, "cube cols (else from manifest)");
  cmd_rec->add_option("--out", rec.out, "output sequence directory")->required();
  add_solver_opts(cmd_rec, rec.params);

  DetectArgs det;
  auto* cmd_det = app.add_subcommand("detect", "ACE and neighborhood coherence maps");
  cmd_det->add_option("--cubes", det.cubes, "cube sequence directory")->required();
  cmd_det->add_option("--signature", det.signature, "target signature CSV")->required();
  cmd_det->add_option("--train", det.train, "leading frames for the background model");
  cmd_det->add_flag("--center,!--no-center", det.center, "subtract the background mean");
  cmd_det->add_option("--out", det.out, "output map directory")->required();

  ThresholdArgs thr;
  auto* cmd_thr = app.add_subcommand("threshold", "percentile threshold from background maps");
  cmd_thr->add_option("--maps", thr.maps, "map directory")->required();
  cmd_thr->add_option("--stat", thr.stat, "ace | bulk");
  cmd_thr->add_option("--alpha", thr.alpha, "per-map percentile");
  cmd_thr->add_option("--beta", thr.beta, "median scale factor");
  cmd_thr->add_option("--train", thr.train, "background maps to use");
  cmd_thr->add_option("--label", thr.label, "method label stored in the output");
  cmd_thr->add_option("--out", thr.out, "output threshold JSON")->required();

  SweepArgs sweep;
  auto* cmd_sweep = app.add_subcommand("sweep", "exceedance counts across the multiplier grid");
  cmd_sweep->add_option("--maps", sweep.maps, "map directory")->required();
  cmd_sweep->add_option("--stat", sweep.stat, "ace | bulk | bulk_persist");
  cmd_sweep->add_option("--threshold", sweep.threshold_file, "threshold JSON")->required();
  cmd_sweep->add_option("--out", sweep.out, "output CSV")->required();

  CompareArgs cmp;
  auto* cmd_cmp = app.add_subcommand("compare", "per-frame error metrics between sequences");
  cmd_cmp->add_option("--a", cmp.a, "reference sequence")->required();
  cmd_cmp->add_option("--b", cmp.b, "candidate sequence")->required();
  cmd_cmp->add_option("--out", cmp.out, "output CSV")->required();

  RunArgs run;
  auto* cmd_run = app.add_subcommand("run", "full pipeline from a config");
  cmd_run->add_option("--config", run.config, "experiment config JSON (default: release)");
  cmd_run->add_option("--out", run.out, "output directory")->required();
  cmd_run->add_option("--seed", run.seed, "override the sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (cmd_gen->parsed()) do_gen(gen);
    else if (cmd_sample->parsed()) do_sample(sample);
    else if (cmd_rec->parsed()) do_reconstruct(rec);
    else if (cmd_det->parsed()) do_detect(det);
    else if (cmd_thr->parsed()) do_threshold(thr);
    else if (cmd_sweep->parsed()) do_sweep(sweep);
    else if (cmd_cmp->parsed()) harness::compare_sequences(cmp.a, cmp.b, cmp.out);
    else if (cmd_run->parsed()) do_run(run);
    return 0;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
