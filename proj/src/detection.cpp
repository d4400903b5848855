#include "hypercs/detection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "hypercs/errors.hpp"
#include "hypercs/linalg.hpp"

namespace fs = std::filesystem;

namespace hypercs::detection {

void save_signature(const Signature& s, const fs::path& path) {
  if (s.values.empty()) throw InputError("save_signature: empty signature");
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path.string());
  os << "band,value\n";
  char buf[64];
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, s.values[i]);
    os << buf;
  }
}

Signature load_signature(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != "band,value")
    throw InputError(path.string() + ": expected 'band,value' header");
  Signature s;
  s.name = path.stem().string();
  std::size_t expect = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos) throw InputError(path.string() + ": malformed row");
    try {
      if (std::stoull(line.substr(0, comma)) != expect)
        throw InputError(path.string() + ": band indices must run 0..b-1");
      s.values.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw InputError(path.string() + ": malformed row");
    }
    ++expect;
  }
  if (s.values.empty()) throw InputError(path.string() + ": no bands");
  return s;
}

BackgroundModel BackgroundModel::fit(const double* spectra, std::size_t count,
                                     std::size_t bands) {
  if (count == 0 || bands == 0) throw InputError("background fit: no data");
  BackgroundModel m;
  m.b_ = bands;
  m.mean_.assign(bands, 0.0);
  for (std::size_t s = 0; s < count; ++s)
    for (std::size_t j = 0; j < bands; ++j) m.mean_[j] += spectra[s * bands + j];
  for (auto& v : m.mean_) v /= double(count);

  m.cov_.assign(bands * bands, 0.0);
  std::vector<double> centered(bands);
  for (std::size_t s = 0; s < count; ++s) {
    for (std::size_t j = 0; j < bands; ++j) centered[j] = spectra[s * bands + j] - m.mean_[j];
    for (std::size_t i = 0; i < bands; ++i)
      for (std::size_t j = 0; j <= i; ++j) m.cov_[i * bands + j] += centered[i] * centered[j];
  }
  for (std::size_t i = 0; i < bands; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      m.cov_[i * bands + j] /= double(count);
      m.cov_[j * bands + i] = m.cov_[i * bands + j];
    }
  m.factorize();
  return m;
}

BackgroundModel BackgroundModel::fit_frames(const std::vector<cube::HyperCube>& frames) {
  if (frames.empty()) throw InputError("background fit: no frames");
  const std::size_t b = frames[0].b;
  std::size_t count = 0;
  for (const auto& f : frames) {
    if (f.b != b) throw InputError("background fit: band count varies across frames");
    count += f.pixels();
  }
  std::vector<double> spectra(count * b);
  std::size_t s = 0;
  for (const auto& f : frames)
    for (std::size_t i = 0; i < f.n1; ++i)
      for (std::size_t j = 0; j < f.n2; ++j, ++s) f.spectrum(i, j, spectra.data() + s * b);
  return fit(spectra.data(), count, b);
}

BackgroundModel BackgroundModel::from_moments(std::vector<double> mean, std::vector<double> cov) {
  BackgroundModel m;
  m.b_ = mean.size();
  if (m.b_ == 0 || cov.size() != m.b_ * m.b_)
    throw InputError("from_moments: dimension mismatch");
  m.mean_ = std::move(mean);
  m.cov_ = std::move(cov);
  m.factorize();
  return m;
}

void BackgroundModel::factorize() {
  double trace = 0.0;
  for (std::size_t i = 0; i < b_; ++i) trace += cov_[i * b_ + i];
  const double avg = trace / double(b_);
  double ridge = avg > 0.0 ? 1e-8 * avg : 1e-12;
  const double cap = avg > 0.0 ? 1e-2 * avg : 1.0;
  while (true) {
    chol_ = cov_;
    for (std::size_t i = 0; i < b_; ++i) chol_[i * b_ + i] += ridge;
    if (linalg::cholesky_lower(chol_.data(), b_)) {
      ridge_ = ridge;
      return;
    }
    if (ridge > cap) throw InputError("background covariance is not positive definite");
    ridge *= 10.0;
  }
}

void BackgroundModel::whiten(const double* v, double* out) const {
  linalg::solve_lower(chol_.data(), b_, v, out);
}

double ace(const BackgroundModel& m, const double* signature, const double* pixel, bool center) {
  const std::size_t b = m.bands();
  std::vector<double> t(b), w(b), tw(b), ww(b);
  for (std::size_t j = 0; j < b; ++j) {
    t[j] = signature[j];  // the signature is a direction, never demeaned
    w[j] = center ? pixel[j] - m.mean()[j] : pixel[j];
  }
  m.whiten(t.data(), tw.data());
  m.whiten(w.data(), ww.data());
  double tt = 0.0, wwn = 0.0, tdotw = 0.0;
  for (std::size_t j = 0; j < b; ++j) {
    tt += tw[j] * tw[j];
    wwn += ww[j] * ww[j];
    tdotw += tw[j] * ww[j];
  }
  if (tt == 0.0 || wwn == 0.0) return 0.0;
  return std::clamp(tdotw * tdotw / (tt * wwn), 0.0, 1.0);
}

Map ace_map(const BackgroundModel& m, const Signature& sig, const cube::HyperCube& c,
            bool center) {
  const std::size_t b = m.bands();
  if (sig.values.size() != b) throw InputError("ace_map: signature band count != model");
  if (c.b != b) throw InputError("ace_map: cube band count != model");
  Map out(c.n1, c.n2);

  std::vector<double> tw(b), px(b), w(b), ww(b);
  m.whiten(sig.values.data(), tw.data());
  double tt = 0.0;
  for (std::size_t j = 0; j < b; ++j) tt += tw[j] * tw[j];
  if (tt == 0.0) return out;  // degenerate signature matches nothing

  for (std::size_t i = 0; i < c.n1; ++i)
    for (std::size_t j = 0; j < c.n2; ++j) {
      c.spectrum(i, j, px.data());
      for (std::size_t k = 0; k < b; ++k) w[k] = center ? px[k] - m.mean()[k] : px[k];
      m.whiten(w.data(), ww.data());
      double wwn = 0.0, tdotw = 0.0;
      for (std::size_t k = 0; k < b; ++k) {
        wwn += ww[k] * ww[k];
        tdotw += tw[k] * ww[k];
      }
      out.at(i, j) = (wwn == 0.0) ? 0.0 : std::clamp(tdotw * tdotw / (tt * wwn), 0.0, 1.0);
    }
  return out;
}

Map bulk_coherence(const Map& scores) {
  Map out(scores.n1, scores.n2);
  for (std::size_t i = 0; i < scores.n1; ++i)
    for (std::size_t j = 0; j < scores.n2; ++j) {
      double miss = 1.0;
      const std::size_t i0 = (i == 0) ? 0 : i - 1;
      const std::size_t i1 = std::min(i + 1, scores.n1 - 1);
      const std::size_t j0 = (j == 0) ? 0 : j - 1;
      const std::size_t j1 = std::min(j + 1, scores.n2 - 1);
      for (std::size_t a = i0; a <= i1; ++a)
        for (std::size_t c = j0; c <= j1; ++c) miss *= 1.0 - scores.at(a, c);
      out.at(i, j) = 1.0 - miss;
    }
  return out;
}

std::vector<Map> persistence_filter(const std::vector<Map>& series, double threshold,
                                    std::size_t window) {
  if (window == 0) throw InputError("persistence_filter: window must be >= 1");
  std::vector<Map> out;
  out.reserve(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    const Map& cur = series[t];
    if (cur.n1 != series[0].n1 || cur.n2 != series[0].n2)
      throw InputError("persistence_filter: maps disagree on dimensions");
    Map flag(cur.n1, cur.n2);
    if (t + 1 >= window) {
      for (std::size_t p = 0; p < cur.data.size(); ++p) {
        bool all = true;
        for (std::size_t d = 0; d < window && all; ++d) all = series[t - d].data[p] > threshold;
        flag.data[p] = all ? 1.0 : 0.0;
      }
    }
    out.push_back(std::move(flag));
  }
  return out;
}

void save_map(const Map& m, const fs::path& path, const std::string& kind, std::int64_t frame) {
  if (m.n1 == 0 || m.n2 == 0) throw InputError("save_map: empty map");
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path.string());
  char buf[64];
  for (std::size_t i = 0; i < m.n1; ++i) {
    for (std::size_t j = 0; j < m.n2; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m.at(i, j));
      os << buf << (j + 1 == m.n2 ? "\n" : ",");
    }
  }
  nlohmann::json meta;
  meta["n1"] = m.n1;
  meta["n2"] = m.n2;
  meta["kind"] = kind;
  meta["frame"] = frame;
  auto sidecar = path;
  sidecar += ".json";
  std::ofstream ms(sidecar);
  if (!ms) throw InputError("cannot write sidecar: " + sidecar.string());
  ms << meta.dump(2) << "\n";
}

Map load_map(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open for reading: " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::logic_error&) {
        throw InputError(path.string() + ": malformed cell");
      }
    }
    if (!rows.empty() && row.size() != rows[0].size())
      throw InputError(path.string() + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path.string() + ": empty map");
  Map m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < m.n1; ++i)
    for (std::size_t j = 0; j < m.n2; ++j) m.at(i, j) = rows[i][j];
  return m;
}

}  // namespace hypercs::detection
