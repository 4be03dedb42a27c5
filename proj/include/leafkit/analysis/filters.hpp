// Copyright 2026 The leafkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Center-frequency analysis of a trained Gabor filterbank against its
// initialization.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "leafkit/core/error.hpp"
#include "leafkit/core/io.hpp"
#include "leafkit/dsp/mel.hpp"
#include "leafkit/frontend/leaf_params.hpp"
#include "leafkit/training/checkpoint.hpp"

namespace leafkit::analysis {

inline constexpr std::size_t kDensityBins = 32;
inline constexpr double kKdeBandwidthMel = 100.0;

struct FilterRow {
  std::size_t index = 0;
  double init_hz = 0;
  double trained_hz = 0;
  double init_mel = 0;
  double trained_mel = 0;
  double deviation_hz = 0;  // trained - init
};

struct FilterReport {
  std::vector<FilterRow> rows;
  std::vector<std::size_t> sorted;  // filter indices by ascending trained center, stable
  double f_max = 22050.0;
  std::vector<double> bin_edges_mel;        // kDensityBins + 1 edges over [0, mel(f_max)]
  std::vector<std::size_t> init_density;     // filters per mel bin at init
  std::vector<std::size_t> trained_density;  // filters per mel bin after training

  std::size_t size() const { return rows.size(); }
};

namespace detail {

inline std::vector<std::size_t> histogram(const std::vector<double>& mel, const std::vector<double>& edges) {
  std::vector<std::size_t> h(edges.size() - 1, 0);
  const double top = edges.back();
  for (double m : mel) {
    auto b = static_cast<std::size_t>(std::floor(m / top * static_cast<double>(h.size())));
    ++h[std::min(b, h.size() - 1)];
  }
  return h;
}

}  // namespace detail

/// Tabulates both center sets. Sizes must match.
inline FilterReport extract_filter_report(const std::vector<double>& init_hz, const std::vector<double>& trained_hz,
                                          double f_max = 22050.0) {
  if (init_hz.size() != trained_hz.size()) {
    throw ShapeError("filter report: " + std::to_string(init_hz.size()) + " initial vs " +
                     std::to_string(trained_hz.size()) + " trained filters");
  }
  if (init_hz.empty()) throw ShapeError("filter report: no filters");
  FilterReport r;
  r.f_max = f_max;
  std::vector<double> im, tm;
  for (std::size_t i = 0; i < init_hz.size(); ++i) {
    FilterRow row;
    row.index = i;
    row.init_hz = init_hz[i];
    row.trained_hz = trained_hz[i];
    row.init_mel = dsp::hz_to_mel(std::max(0.0, init_hz[i]));
    row.trained_mel = dsp::hz_to_mel(std::max(0.0, trained_hz[i]));
    row.deviation_hz = trained_hz[i] - init_hz[i];
    im.push_back(row.init_mel);
    tm.push_back(row.trained_mel);
    r.rows.push_back(row);
  }
  r.sorted.resize(r.rows.size());
  std::iota(r.sorted.begin(), r.sorted.end(), std::size_t{0});
  std::stable_sort(r.sorted.begin(), r.sorted.end(),
                   [&](std::size_t a, std::size_t b) { return trained_hz[a] < trained_hz[b]; });
  const double top = dsp::hz_to_mel(f_max);
  for (std::size_t b = 0; b <= kDensityBins; ++b) {
    r.bin_edges_mel.push_back(top * static_cast<double>(b) / static_cast<double>(kDensityBins));
  }
  r.init_density = detail::histogram(im, r.bin_edges_mel);
  r.trained_density = detail::histogram(tm, r.bin_edges_mel);
  return r;
}

template <typename T>
FilterReport extract_filter_report(const frontend::LeafParams<T>& init, const frontend::LeafParams<T>& trained) {
  auto hz = [](const frontend::LeafParams<T>& p) {
    return std::vector<double>(p.center_hz.values().begin(), p.center_hz.values().end());
  };
  return extract_filter_report(hz(init), hz(trained), init.config.f_max);
}

/// Filter centers stored in a checkpoint. Mel checkpoints throw ModeError.
inline std::vector<double> checkpoint_centers(const training::Checkpoint& c) {
  const Tensor<float>* t = c.find("leaf.center_hz");
  if (!frontend::is_leaf(c.config.frontend) || !t) {
    throw ModeError("checkpoint uses the " + frontend::frontend_kind_name(c.config.frontend) +
                    " frontend: no learnable filters");
  }
  return {t->values().begin(), t->values().end()};
}

/// Fraction of adjacent filter pairs whose trained centers descend.
inline double order_disturbance_metric(const FilterReport& r) {
  if (r.rows.size() < 2) return 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < r.rows.size(); ++i) n += r.rows[i + 1].trained_hz < r.rows[i].trained_hz;
  return static_cast<double>(n) / static_cast<double>(r.rows.size() - 1);
}

inline std::string filter_report_csv(const FilterReport& r) {
  std::ostringstream o;
  o.precision(10);
  o << "index,init_hz,trained_hz,init_mel,trained_mel,deviation_hz\n";
  for (const auto& x : r.rows) {
    o << x.index << ',' << x.init_hz << ',' << x.trained_hz << ',' << x.init_mel << ',' << x.trained_mel << ','
      << x.deviation_hz << '\n';
  }
  return o.str();
}

/// Gaussian kernel density of `values` evaluated on `grid`.
inline std::vector<double> kde(const std::vector<double>& values, const std::vector<double>& grid, double bandwidth) {
  std::vector<double> d(grid.size(), 0.0);
  const double norm = 1.0 / (static_cast<double>(values.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (double v : values) {
      const double z = (grid[g] - v) / bandwidth;
      d[g] += std::exp(-0.5 * z * z);
    }
    d[g] *= norm;
  }
  return d;
}

namespace detail {

struct Panel {
  std::string title;
  std::vector<double> points;  // y per x index
  bool overlay_init = false;
  bool density = false;
  bool mel_axis = false;
  std::vector<double> centers_mel;  // density input
};

inline void draw_panel(std::ostringstream& o, double x0, double y0, double w, double h, double ymax,
                       const std::string& unit, double tick_step, double tick_scale, const Panel& p,
                       const std::vector<double>& init_curve) {
  const std::size_t n = p.points.size();
  const double strip = p.density ? 40.0 : 0.0;
  const double pw = w - strip;
  auto X = [&](double i) { return x0 + pw * i / static_cast<double>(std::max<std::size_t>(1, n - 1)); };
  auto Y = [&](double v) { return y0 + h - h * std::clamp(v / ymax, 0.0, 1.0); };
  o << "<g data-title=\"" << xml_escape(p.title) << "\" data-ymax=\"" << ymax << "\">\n";
  o << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << pw << "\" height=\"" << h
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  o << "<text x=\"" << x0 << "\" y=\"" << y0 - 8 << "\" font-weight=\"bold\">" << xml_escape(p.title) << "</text>\n";
  for (double t = 0; t <= ymax + 1e-9; t += tick_step) {
    o << "<line x1=\"" << x0 - 4 << "\" y1=\"" << Y(t) << "\" x2=\"" << x0 << "\" y2=\"" << Y(t)
      << "\" stroke=\"#444\"/><text x=\"" << x0 - 6 << "\" y=\"" << Y(t) + 4 << "\" text-anchor=\"end\">"
      << t / tick_scale << "</text>\n";
  }
  o << "<text transform=\"translate(" << x0 - 42 << ',' << y0 + h / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << xml_escape(unit) << "</text>\n";
  o << "<text x=\"" << x0 + pw / 2 << "\" y=\"" << y0 + h + 28 << "\" text-anchor=\"middle\">filter</text>\n";
  if (p.overlay_init) {
    o << "<polyline fill=\"none\" stroke=\"#f28e2b\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < init_curve.size(); ++i) o << X(static_cast<double>(i)) << ',' << Y(init_curve[i]) << ' ';
    o << "\"/>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    o << "<circle cx=\"" << X(static_cast<double>(i)) << "\" cy=\"" << Y(p.points[i])
      << "\" r=\"2.2\" fill=\"#1f77b4\"/>\n";
  }
  if (p.density) {
    // Mirrored kernel-density strip along the frequency axis.
    // The kernel lives on the mel axis; Hz panels map their grid to mel.
    std::vector<double> grid, grid_mel;
    for (int g = 0; g <= 100; ++g) {
      grid.push_back(ymax * g / 100.0);
      grid_mel.push_back(p.mel_axis ? grid.back() : dsp::hz_to_mel(grid.back()));
    }
    const auto d = kde(p.centers_mel, grid_mel, kKdeBandwidthMel);
    const double dmax = std::max(1e-300, *std::max_element(d.begin(), d.end()));
    const double cx = x0 + pw + strip / 2, half = strip / 2 - 4;
    o << "<polygon fill=\"#9ecae1\" stroke=\"#3182bd\" stroke-width=\"0.8\" points=\"";
    for (std::size_t g = 0; g < grid.size(); ++g) o << cx + half * d[g] / dmax << ',' << Y(grid[g]) << ' ';
    for (std::size_t g = grid.size(); g-- > 0;) o << cx - half * d[g] / dmax << ',' << Y(grid[g]) << ' ';
    o << "\"/>\n";
  }
  o << "</g>\n";
}

}  // namespace detail

/// Six panels: A/B/C in Hz and D/E/F in mel, for the initialization, the
/// trained filters by index and the trained filters sorted by center. The
/// initialization curve is overlaid on B to F, with a density strip beside
/// each trained panel.
inline std::string filter_plots_svg(const FilterReport& r) {
  std::vector<double> ih, th, im, tm, sh, sm;
  for (const auto& x : r.rows) {
    ih.push_back(x.init_hz);
    th.push_back(x.trained_hz);
    im.push_back(x.init_mel);
    tm.push_back(x.trained_mel);
  }
  for (std::size_t k : r.sorted) {
    sh.push_back(r.rows[k].trained_hz);
    sm.push_back(r.rows[k].trained_mel);
  }
  const double hz_max = r.f_max, mel_max = dsp::hz_to_mel(r.f_max);
  const double W = 1260, H = 680, pw = 340, ph = 220;
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(2);
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const detail::Panel panels[6] = {{"A: initialization", ih, false, false, false, {}},
                                    {"B: trained", th, true, true, false, tm},
                                    {"C: trained, sorted", sh, true, true, false, tm},
                                    {"D: initialization", im, false, false, true, {}},
                                    {"E: trained", tm, true, true, true, tm},
                                    {"F: trained, sorted", sm, true, true, true, tm}};
  for (int k = 0; k < 6; ++k) {
    const bool mel = k >= 3;
    const double x0 = 70 + (k % 3) * (pw + 70), y0 = 40 + (k / 3) * (ph + 90);
    detail::draw_panel(o, x0, y0, pw, ph, mel ? mel_max : hz_max, mel ? "center (mel)" : "center (kHz)",
                       mel ? 1000.0 : 5000.0, mel ? 1.0 : 1000.0, panels[k], mel ? im : ih);
  }
  o << "</svg>\n";
  return o.str();
}

/// Writes `<dir>/filters.csv` and `<dir>/filters.svg`.
inline std::vector<std::filesystem::path> render_filter_plots(const FilterReport& r, const std::filesystem::path& dir) {
  const auto csv = dir / "filters.csv", svg = dir / "filters.svg";
  write_text_file(csv, filter_report_csv(r));
  write_text_file(svg, filter_plots_svg(r));
  return {csv, svg};
}

}  // namespace leafkit::analysis
