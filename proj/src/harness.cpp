#include "hypercs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "hypercs/detection.hpp"
#include "hypercs/errors.hpp"
#include "scene_json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hypercs::harness {

// ---------------------------------------------------------------- utilities

std::uint64_t fnv1a(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::string fnv1a_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                (unsigned long long)fnv1a(bytes.data(), bytes.size()));
  return buf;
}

std::string read_file_bytes(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::size_t worker_count() {
  if (const char* env = std::getenv("HYPERCS_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 256)
      throw InputError("HYPERCS_WORKERS must be an integer in [1,256]");
    return std::size_t(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return std::clamp<std::size_t>(hc == 0 ? 1 : hc, 1, 16);
}

void parallel_frames(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

std::string frame_name(const char* stem, std::size_t t, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu.%s", stem, t, ext);
  return buf;
}

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json params_to_json(const solver::SolverParams& p) {
  return {{"mu", p.mu},
          {"lambda", p.lambda},
          {"outer_tol", p.outer_tol},
          {"max_outer", p.max_outer},
          {"inner_cg_tol", p.inner_cg_tol},
          {"inner_cg_max", p.inner_cg_max}};
}

solver::SolverParams params_from_json(const json& j) {
  solver::SolverParams p;
  p.mu = j.value("mu", p.mu);
  p.lambda = j.value("lambda", p.lambda);
  p.outer_tol = j.value("outer_tol", p.outer_tol);
  p.max_outer = j.value("max_outer", p.max_outer);
  p.inner_cg_tol = j.value("inner_cg_tol", p.inner_cg_tol);
  p.inner_cg_max = j.value("inner_cg_max", p.inner_cg_max);
  return p;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["scene"] = synthdata::scene_to_json(cfg.scene);
  j["compression"] = cfg.compression;
  j["ordering"] = sampling::ordering_name(cfg.ordering);
  j["shifted"] = cfg.shifted;
  j["seed"] = cfg.seed;
  j["background_frames"] = cfg.background_frames;
  j["alpha"] = cfg.alpha;
  j["beta_raw"] = cfg.beta_raw;
  j["beta_recon"] = cfg.beta_recon;
  j["center_ace"] = cfg.center_ace;
  j["methods"] = cfg.methods;
  j["l1_params"] = params_to_json(cfg.l1_params);
  j["tv_params"] = params_to_json(cfg.tv_params);
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  static const std::vector<std::string> known = {
      "scene",     "compression",       "ordering", "shifted",  "seed",
      "background_frames", "alpha",     "beta_raw", "beta_recon", "center_ace",
      "methods",   "l1_params",         "tv_params"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw InputError("config: unknown key '" + key + "'");

  ExperimentConfig cfg;
  try {
    if (!j.contains("scene")) throw InputError("config: missing scene");
    if (j.at("scene").is_string())
      cfg.scene = synthdata::preset_scenario(j.at("scene").get<std::string>());
    else
      cfg.scene = synthdata::scene_from_json(j.at("scene"));
    cfg.compression = j.value("compression", cfg.compression);
    if (j.contains("ordering"))
      cfg.ordering = sampling::ordering_from_name(j.at("ordering").get<std::string>());
    cfg.shifted = j.value("shifted", cfg.shifted);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.background_frames = j.value("background_frames", cfg.background_frames);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.beta_raw = j.value("beta_raw", cfg.beta_raw);
    cfg.beta_recon = j.value("beta_recon", cfg.beta_recon);
    cfg.center_ace = j.value("center_ace", cfg.center_ace);
    if (j.contains("methods")) cfg.methods = j.at("methods").get<std::vector<std::string>>();
    if (j.contains("l1_params")) cfg.l1_params = params_from_json(j.at("l1_params"));
    if (j.contains("tv_params")) cfg.tv_params = params_from_json(j.at("tv_params"));
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace

// ------------------------------------------------------------------- config

void ExperimentConfig::validate() const {
  scene.validate();
  if (background_frames < 2 || background_frames > scene.frames)
    throw InputError("config: background_frames must lie in [2, frames]");
  for (std::size_t t = 0; t < background_frames; ++t)
    if (synthdata::plume_strength(scene, t) != 0.0)
      throw InputError("config: background frames must be plume-free");
  if (!(compression >= 0.0) || compression >= 1.0)
    throw InputError("config: compression must lie in [0, 1)");
  if (!(alpha >= 0.0) || alpha > 100.0) throw InputError("config: alpha outside [0,100]");
  if (!(beta_raw > 0.0) || !(beta_recon > 0.0)) throw InputError("config: betas must be > 0");
  if (methods.empty()) throw InputError("config: at least one method");
  for (const auto& m : methods) {
    if (m != "l1" && m != "tv") throw InputError("config: unknown method '" + m + "'");
    if (std::count(methods.begin(), methods.end(), m) != 1)
      throw InputError("config: duplicate method '" + m + "'");
  }
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.scene = synthdata::preset_scenario("release");
  return cfg;
}

void save_config(const ExperimentConfig& cfg, const fs::path& path) {
  cfg.validate();
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path.string());
  os << config_to_json(cfg).dump(2) << "\n";
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open for reading: " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------- svg

namespace {

struct SvgSeries {
  std::string label;
  std::string color;
  bool dashed = false;
  std::vector<double> values;
};

void write_svg(const fs::path& path, const std::string& title,
               const std::vector<SvgSeries>& series) {
  const double width = 860, height = 420;
  const double left = 60, right = 660, top = 46, bottom = 380;
  std::size_t frames = 0;
  double ymax = 1.0;
  for (const auto& s : series) {
    frames = std::max(frames, s.values.size());
    for (double v : s.values) ymax = std::max(ymax, v);
  }
  auto sx = [&](std::size_t t) {
    return frames > 1 ? left + (right - left) * double(t) / double(frames - 1) : left;
  };
  auto sy = [&](double v) { return bottom - (bottom - top) * v / ymax; };

  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path.string());
  char buf[256];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">"
     << title << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
     << bottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
     << "\" stroke=\"black\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\">0</text>\n",
                left - 14.0, bottom + 4.0);
  os << buf;
  std::snprintf(
      buf, sizeof buf,
      "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\">%.0f</text>\n",
      left - 40.0, top + 4.0, ymax);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\">frame"
                "</text>\n",
                (left + right) / 2.0, bottom + 26.0);
  os << buf;

  double ly = top;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\"";
    if (s.dashed) os << " stroke-dasharray=\"5,4\"";
    os << " stroke-width=\"1.5\" points=\"";
    for (std::size_t t = 0; t < s.values.size(); ++t) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(t), sy(s.values[t]));
      os << buf;
    }
    os << "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\"%s "
                  "stroke-width=\"1.5\"/>\n",
                  right + 20.0, ly, right + 44.0, ly, s.color.c_str(),
                  s.dashed ? " stroke-dasharray=\"5,4\"" : "");
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\">%s"
                  "</text>\n",
                  right + 50.0, ly + 4.0, s.label.c_str());
    os << buf;
    ly += 18.0;
  }
  os << "</svg>\n";
}

const char* kSweepColors[7] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                               "#9467bd", "#8c564b", "#e377c2"};

}  // namespace

// ------------------------------------------------------------------ pipeline

namespace {

struct PathData {
  std::vector<detection::Map> ace;
  std::vector<detection::Map> bulk;
  threshold::ThresholdResult t_ace;
  threshold::ThresholdResult t_bulk;
  // persistence counts per sweep multiplier per frame
  std::vector<std::vector<std::size_t>> persist_counts;
};

struct MethodConvergence {
  bool all = true;
  std::size_t max_iterations = 0;
  double mean_iterations = 0.0;
};

PathData detect_path(const ExperimentConfig& cfg, const std::string& name,
                     const std::vector<cube::HyperCube>& cubes, const fs::path& out) {
  const std::size_t frames = cubes.size();
  const fs::path dir = out / "maps" / name;
  fs::create_directories(dir);

  std::vector<cube::HyperCube> train(cubes.begin(),
                                     cubes.begin() + std::ptrdiff_t(cfg.background_frames));
  const auto model = detection::BackgroundModel::fit_frames(train);
  const detection::Signature sig{"signature", cfg.scene.signature};

  PathData pd;
  pd.ace.resize(frames);
  pd.bulk.resize(frames);
  parallel_frames(frames, [&](std::size_t t) {
    pd.ace[t] = detection::ace_map(model, sig, cubes[t], cfg.center_ace);
    pd.bulk[t] = detection::bulk_coherence(pd.ace[t]);
    detection::save_map(pd.ace[t], dir / frame_name("ace", t, "csv"), "ace", std::int64_t(t));
    detection::save_map(pd.bulk[t], dir / frame_name("bulk", t, "csv"), "bulk", std::int64_t(t));
  });

  const double beta = name == "raw" ? cfg.beta_raw : cfg.beta_recon;
  std::vector<detection::Map> bg_ace(pd.ace.begin(),
                                     pd.ace.begin() + std::ptrdiff_t(cfg.background_frames));
  std::vector<detection::Map> bg_bulk(pd.bulk.begin(),
                                      pd.bulk.begin() + std::ptrdiff_t(cfg.background_frames));
  pd.t_ace = threshold::compute_threshold(bg_ace, {cfg.alpha, beta});
  pd.t_bulk = threshold::compute_threshold(bg_bulk, {cfg.alpha, beta});

  const auto& mult = threshold::sweep_multipliers();
  pd.persist_counts.assign(mult.size(), std::vector<std::size_t>(frames, 0));
  for (std::size_t mi = 0; mi < mult.size(); ++mi) {
    const double gate = mult[mi] * pd.t_bulk.threshold;
    const auto persist = detection::persistence_filter(pd.bulk, gate);
    for (std::size_t t = 0; t < frames; ++t)
      pd.persist_counts[mi][t] = threshold::count_over(persist[t], 0.5);
    if (mult[mi] == 1.0)
      for (std::size_t t = 0; t < frames; ++t)
        detection::save_map(persist[t], dir / frame_name("persist", t, "csv"), "bulk_persist",
                            std::int64_t(t));
  }
  return pd;
}

std::size_t stat_count(const PathData& pd, const std::string& stat, std::size_t mi,
                       std::size_t frame, double multiplier) {
  if (stat == "ace") return threshold::count_over(pd.ace[frame], multiplier * pd.t_ace.threshold);
  if (stat == "bulk")
    return threshold::count_over(pd.bulk[frame], multiplier * pd.t_bulk.threshold);
  return pd.persist_counts[mi][frame];
}

}  // namespace

RunSummary run_pipeline(const ExperimentConfig& cfg, const fs::path& out) {
  cfg.validate();
  fs::create_directories(out);
  const auto& scene = cfg.scene;
  const std::size_t frames = scene.frames;
  const std::size_t n = scene.n1 * scene.n2;

  // scene
  std::vector<cube::HyperCube> raw(frames);
  parallel_frames(frames, [&](std::size_t t) { raw[t] = synthdata::gen_frame(scene, t); });
  cube::save_sequence(raw, out / "scene");
  synthdata::save_scene(scene, out / "scene.json");
  detection::save_signature({"signature", scene.signature}, out / "signature.csv");

  // sampling plan, trained on the plume-free leading frames when adaptive
  sampling::SamplingPlan plan;
  if (cfg.ordering == sampling::RowOrdering::max_variance) {
    std::vector<cube::HyperCube> train(raw.begin(),
                                       raw.begin() + std::ptrdiff_t(cfg.background_frames));
    plan = sampling::build_plan_max_variance(n, cfg.compression, cfg.shifted, train, cfg.seed);
  } else {
    plan = sampling::build_plan_sequency(n, cfg.compression, cfg.shifted, cfg.seed);
  }
  sampling::save_plan(plan, out / "plan.json");

  // measurements
  const fs::path mdir = out / "measurements";
  fs::create_directories(mdir);
  std::vector<sampling::Measurements> meas(frames);
  parallel_frames(frames, [&](std::size_t t) {
    meas[t] = sampling::sample_cube(plan, raw[t]);
    sampling::save_measurements(meas[t], mdir / frame_name("frame", t, "hsm"));
  });
  {
    json mm;
    mm["frames"] = frames;
    mm["k"] = plan.k;
    mm["b"] = scene.b;
    mm["n1"] = scene.n1;
    mm["n2"] = scene.n2;
    std::ofstream os(mdir / "manifest.json");
    os << mm.dump(2) << "\n";
  }

  std::map<std::string, PathData> paths;
  paths.emplace("raw", detect_path(cfg, "raw", raw, out));

  std::vector<std::string> methods = cfg.methods;
  std::sort(methods.begin(), methods.end());

  std::map<std::string, MethodConvergence> convergence;
  for (const auto& method : methods) {
    const auto& params = method == "l1" ? cfg.l1_params : cfg.tv_params;
    const fs::path rdir = out / ("recon_" + method);
    fs::create_directories(rdir);
    std::vector<cube::HyperCube> recon(frames);
    std::vector<std::size_t> iters(frames, 0);
    std::atomic<bool> all_conv{true};
    parallel_frames(frames, [&](std::size_t t) {
      auto res = method == "l1"
                     ? solver::reconstruct_l1(plan, meas[t], scene.n1, scene.n2, params)
                     : solver::reconstruct_tv(plan, meas[t], scene.n1, scene.n2, params);
      if (!res.converged) all_conv = false;
      iters[t] = res.iterations;
      solver::save_reconstruction(res, cube::sequence_frame_path(rdir, t), method, params);
      recon[t] = std::move(res.recon);
    });
    {
      json rm;
      rm["frames"] = frames;
      rm["n1"] = scene.n1;
      rm["n2"] = scene.n2;
      rm["b"] = scene.b;
      std::ofstream os(rdir / "manifest.json");
      os << rm.dump(2) << "\n";
    }
    MethodConvergence mc;
    mc.all = all_conv.load();
    for (std::size_t t = 0; t < frames; ++t) {
      mc.max_iterations = std::max(mc.max_iterations, iters[t]);
      mc.mean_iterations += double(iters[t]);
    }
    mc.mean_iterations /= double(frames);
    convergence[method] = mc;
    paths.emplace(method, detect_path(cfg, method, recon, out));
  }

  // report
  RunSummary summary;
  summary.out_dir = out;
  const auto& mult = threshold::sweep_multipliers();
  const std::vector<std::string> stats = {"ace", "bulk", "bulk_persist"};
  const PathData& rawpd = paths.at("raw");
  for (std::size_t t = 0; t < frames; ++t)
    for (const auto& method : methods) {
      const PathData& mp = paths.at(method);
      for (const auto& stat : stats)
        for (std::size_t mi = 0; mi < mult.size(); ++mi) {
          ReportRow row;
          row.frame = t;
          row.method = method;
          row.statistic = stat;
          row.multiplier = mult[mi];
          const double base = stat == "ace" ? mp.t_ace.threshold : mp.t_bulk.threshold;
          row.threshold = mult[mi] * base;
          row.count_raw = stat_count(rawpd, stat, mi, t, mult[mi]);
          row.count_recon = stat_count(mp, stat, mi, t, mult[mi]);
          summary.rows.push_back(std::move(row));
        }
    }

  const fs::path report_path = out / "report.csv";
  {
    std::ofstream os(report_path, std::ios::binary);
    if (!os) throw InputError("cannot open for writing: " + report_path.string());
    os << "frame,method,statistic,multiplier,threshold,count_raw,count_recon\n";
    for (const auto& r : summary.rows) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%zu,%s,%s,%.17g,%.17g,%zu,%zu\n", r.frame,
                    r.method.c_str(), r.statistic.c_str(), r.multiplier, r.threshold, r.count_raw,
                    r.count_recon);
      os << buf;
    }
  }
  summary.report_hash = fnv1a_hex(read_file_bytes(report_path));

  // thresholds with provenance
  {
    json tj;
    tj["alpha"] = cfg.alpha;
    tj["beta_raw"] = cfg.beta_raw;
    tj["beta_recon"] = cfg.beta_recon;
    tj["sweep_multipliers"] = threshold::sweep_multipliers();
    json pj;
    for (const auto& [name, pd] : paths) {
      json stat_json;
      for (const auto* pair : {&pd.t_ace, &pd.t_bulk}) {
        json one;
        one["threshold"] = pair->threshold;
        one["alpha"] = pair->alpha;
        one["beta"] = pair->beta;
        one["per_cube"] = pair->per_cube;
        stat_json[pair == &pd.t_ace ? "ace" : "bulk"] = one;
      }
      pj[name] = stat_json;
      summary.thresholds[name + ".ace"] = pd.t_ace.threshold;
      summary.thresholds[name + ".bulk"] = pd.t_bulk.threshold;
    }
    tj["paths"] = pj;
    std::ofstream os(out / "thresholds.json");
    os << tj.dump(2) << "\n";
  }

  // charts: recon counts per multiplier, raw at the operating point
  for (const auto& method : methods) {
    const PathData& mp = paths.at(method);
    for (const auto& stat : stats) {
      std::vector<SvgSeries> series;
      for (std::size_t mi = 0; mi < mult.size(); ++mi) {
        SvgSeries s;
        char lbl[48];
        std::snprintf(lbl, sizeof lbl, "%s x%.2f", method.c_str(), mult[mi]);
        s.label = lbl;
        s.color = kSweepColors[mi];
        s.values.resize(frames);
        for (std::size_t t = 0; t < frames; ++t)
          s.values[t] = double(stat_count(mp, stat, mi, t, mult[mi]));
        series.push_back(std::move(s));
      }
      SvgSeries rawline;
      rawline.label = "raw x1.00";
      rawline.color = "#555555";
      rawline.dashed = true;
      rawline.values.resize(frames);
      for (std::size_t t = 0; t < frames; ++t)
        rawline.values[t] = double(stat_count(rawpd, stat, 3, t, 1.0));
      series.push_back(std::move(rawline));
      write_svg(out / ("report_" + method + "_" + stat + ".svg"),
                scene.name + ": " + stat + " pixel counts (" + method + ")", series);
    }
  }

  // metadata: everything needed to audit a run, no timestamps
  {
    const std::string config_bytes = config_to_json(cfg).dump(2);
    json meta;
    meta["config"] = config_to_json(cfg);
    meta["config_hash"] = fnv1a_hex(config_bytes);
    meta["plan_hash"] = fnv1a_hex(read_file_bytes(out / "plan.json"));
    meta["report_hash"] = summary.report_hash;
    meta["beta_convention"] = {{"raw", cfg.beta_raw}, {"recon", cfg.beta_recon}};
    json cj;
    for (const auto& [name, mc] : convergence) {
      cj[name] = {{"all_converged", mc.all},
                  {"max_iterations", mc.max_iterations},
                  {"mean_iterations", mc.mean_iterations}};
      summary.converged[name] = mc.all;
    }
    meta["convergence"] = cj;
    json tj;
    for (const auto& [key, value] : summary.thresholds) tj[key] = value;
    meta["thresholds"] = tj;
    std::ofstream os(out / "metadata.json");
    os << meta.dump(2) << "\n";
  }

  return summary;
}

std::vector<ReportRow> load_report(const fs::path& csv_path) {
  std::ifstream is(csv_path);
  if (!is) throw InputError("cannot open for reading: " + csv_path.string());
  std::string line;
  if (!std::getline(is, line) ||
      line != "frame,method,statistic,multiplier,threshold,count_raw,count_recon")
    throw InputError(csv_path.string() + ": unexpected header");
  std::vector<ReportRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw InputError(csv_path.string() + ": malformed row");
    ReportRow r;
    try {
      r.frame = std::stoull(cells[0]);
      r.method = cells[1];
      r.statistic = cells[2];
      r.multiplier = std::stod(cells[3]);
      r.threshold = std::stod(cells[4]);
      r.count_raw = std::stoull(cells[5]);
      r.count_recon = std::stoull(cells[6]);
    } catch (const std::logic_error&) {
      throw InputError(csv_path.string() + ": malformed row");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void compare_sequences(const fs::path& dir_a, const fs::path& dir_b, const fs::path& out_csv) {
  const std::size_t fa = cube::sequence_length(dir_a);
  const std::size_t fb = cube::sequence_length(dir_b);
  if (fa != fb) throw InputError("compare: sequences have different lengths");
  std::ofstream os(out_csv, std::ios::binary);
  if (!os) throw InputError("cannot open for writing: " + out_csv.string());
  os << "frame,rmse,max_abs,rel_fro\n";
  for (std::size_t t = 0; t < fa; ++t) {
    const auto a = cube::load_sequence_frame(dir_a, t);
    const auto b = cube::load_sequence_frame(dir_b, t);
    if (a.data.size() != b.data.size()) throw InputError("compare: frame dimensions differ");
    double sq = 0.0, mx = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
      const double d = a.data[i] - b.data[i];
      sq += d * d;
      mx = std::max(mx, std::fabs(d));
      ref += a.data[i] * a.data[i];
    }
    const double rmse = std::sqrt(sq / double(a.data.size()));
    const double rel = ref > 0.0 ? std::sqrt(sq / ref) : 0.0;
    os << t << "," << fmt_real(rmse) << "," << fmt_real(mx) << "," << fmt_real(rel) << "\n";
  }
}

}  // namespace hypercs::harness
