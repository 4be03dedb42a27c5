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


// Classification metrics, multi-run summaries and confusion-matrix export.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "leafkit/core/error.hpp"
#include "leafkit/core/io.hpp"
#include "leafkit/core/log.hpp"

namespace leafkit::metrics {

using Json = nlohmann::ordered_json;

struct ClassMetrics {
  std::string label;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;    // true items
  std::size_t predicted = 0;  // items predicted as this class
};

/// Scores for one set of predictions. Labels are alphabetical; confusion
/// rows are true labels, columns predicted labels.
struct EvalReport {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> confusion;
  double accuracy = 0;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
  std::vector<ClassMetrics> per_class;
  std::size_t n_items = 0;
  std::optional<double> loss;  // mean cross-entropy when logits were available
  /// Free-form provenance: model, split, mode, checkpoint, validation.
  Json context = Json::object();
};

/// Builds the report from label-index predictions. `labels` may be in any
/// order; the report reorders them alphabetically.
inline EvalReport evaluate_indices(const std::vector<std::string>& labels, const std::vector<int>& y_true,
                                   const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw DataError("evaluate: " + std::to_string(y_true.size()) + " labels vs " + std::to_string(y_pred.size()) +
                    " predictions");
  }
  if (y_true.empty()) throw DataError("evaluate: no items");
  const std::size_t K = labels.size();
  std::vector<std::size_t> order(K);
  for (std::size_t i = 0; i < K; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  std::vector<std::size_t> rank(K);
  for (std::size_t r = 0; r < K; ++r) rank[order[r]] = r;

  EvalReport rep;
  for (std::size_t r = 0; r < K; ++r) rep.labels.push_back(labels[order[r]]);
  if (std::adjacent_find(rep.labels.begin(), rep.labels.end()) != rep.labels.end()) {
    throw LabelError("evaluate: duplicate label names");
  }
  rep.confusion.assign(K, std::vector<std::size_t>(K, 0));
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= K || static_cast<std::size_t>(p) >= K) {
      throw LabelError("evaluate: label index out of range at item " + std::to_string(i));
    }
    ++rep.confusion[rank[static_cast<std::size_t>(t)]][rank[static_cast<std::size_t>(p)]];
  }
  rep.n_items = y_true.size();

  std::size_t diag = 0;
  for (std::size_t k = 0; k < K; ++k) {
    ClassMetrics c;
    c.label = rep.labels[k];
    for (std::size_t j = 0; j < K; ++j) {
      c.support += rep.confusion[k][j];
      c.predicted += rep.confusion[j][k];
    }
    const double tp = static_cast<double>(rep.confusion[k][k]);
    diag += rep.confusion[k][k];
    if (c.predicted == 0) {
      log_warning("class '" + c.label + "' is never predicted; precision set to 0");
    } else {
      c.precision = tp / static_cast<double>(c.predicted);
    }
    if (c.support == 0) {
      log_warning("class '" + c.label + "' has no items; recall set to 0");
    } else {
      c.recall = tp / static_cast<double>(c.support);
    }
    c.f1 = c.precision + c.recall > 0 ? 2 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
    rep.macro_precision += c.precision;
    rep.macro_recall += c.recall;
    rep.macro_f1 += c.f1;
    rep.per_class.push_back(c);
  }
  rep.macro_precision /= static_cast<double>(K);
  rep.macro_recall /= static_cast<double>(K);
  rep.macro_f1 /= static_cast<double>(K);
  rep.accuracy = static_cast<double>(diag) / static_cast<double>(rep.n_items);
  return rep;
}

/// Same as evaluate_indices for string labels; the label set is the union
/// of both lists plus `extra_labels`.
inline EvalReport evaluate_labels(const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred,
                                  std::vector<std::string> extra_labels = {}) {
  std::vector<std::string> all = std::move(extra_labels);
  all.insert(all.end(), y_true.begin(), y_true.end());
  all.insert(all.end(), y_pred.begin(), y_pred.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  auto idx = [&](const std::string& s) {
    return static_cast<int>(std::lower_bound(all.begin(), all.end(), s) - all.begin());
  };
  std::vector<int> t, p;
  for (const auto& s : y_true) t.push_back(idx(s));
  for (const auto& s : y_pred) p.push_back(idx(s));
  return evaluate_indices(all, t, p);
}

/// File-level majority vote. Items sharing a group id vote with their
/// predicted class; ties go to the larger summed probability, then to the
/// lower class index. Returns one (true, predicted) pair per group in order
/// of first appearance. Mixed true labels within a group throw LabelError.
inline std::pair<std::vector<int>, std::vector<int>> majority_vote(const std::vector<std::string>& groups,
                                                                   const std::vector<int>& y_true,
                                                                   const std::vector<int>& y_pred,
                                                                   const std::vector<std::vector<double>>& probs = {}) {
  if (groups.size() != y_true.size() || y_pred.size() != y_true.size() ||
      (!probs.empty() && probs.size() != y_true.size())) {
    throw DataError("majority_vote: input lengths differ");
  }
  std::vector<std::string> order;
  std::map<std::string, std::pair<int, std::map<int, std::pair<std::size_t, double>>>> tally;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    auto [it, fresh] = tally.try_emplace(groups[i]);
    if (fresh) {
      order.push_back(groups[i]);
      it->second.first = y_true[i];
    } else if (it->second.first != y_true[i]) {
      throw LabelError("majority_vote: file '" + groups[i] + "' has chunks with different labels");
    }
    auto& v = it->second.second[y_pred[i]];
    ++v.first;
    if (!probs.empty()) v.second += probs[i][static_cast<std::size_t>(y_pred[i])];
  }
  std::vector<int> t, p;
  for (const auto& g : order) {
    const auto& [truth, votes] = tally.at(g);
    int best = -1;
    std::pair<std::size_t, double> bv{0, 0.0};
    for (const auto& [cls, v] : votes) {  // ascending class index
      if (best < 0 || v.first > bv.first || (v.first == bv.first && v.second > bv.second)) {
        best = cls;
        bv = v;
      }
    }
    t.push_back(truth);
    p.push_back(best);
  }
  return {t, p};
}

// ---------------------------------------------------------------------------
// JSON

inline Json to_json(const EvalReport& r) {
  Json per = Json::array();
  for (const auto& c : r.per_class) {
    per.push_back({{"label", c.label},
                   {"precision", c.precision},
                   {"recall", c.recall},
                   {"f1", c.f1},
                   {"support", c.support},
                   {"predicted", c.predicted}});
  }
  Json j{{"format", "leafkit-eval"},
         {"version", 1},
         {"context", r.context},
         {"n_items", r.n_items},
         {"accuracy", r.accuracy},
         {"macro_f1", r.macro_f1},
         {"macro_recall", r.macro_recall},
         {"macro_precision", r.macro_precision}};
  j["loss"] = r.loss ? Json(*r.loss) : Json(nullptr);
  j["labels"] = r.labels;
  j["confusion"] = r.confusion;
  j["per_class"] = per;
  return j;
}

inline EvalReport report_from_json(const Json& j) {
  if (j.value("format", "") != "leafkit-eval") throw InputError("not a leafkit evaluation report");
  EvalReport r;
  r.context = j.value("context", Json::object());
  r.n_items = j.at("n_items").get<std::size_t>();
  r.accuracy = j.at("accuracy").get<double>();
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.macro_recall = j.at("macro_recall").get<double>();
  r.macro_precision = j.at("macro_precision").get<double>();
  if (j.contains("loss") && !j.at("loss").is_null()) r.loss = j.at("loss").get<double>();
  r.labels = j.at("labels").get<std::vector<std::string>>();
  r.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
  for (const auto& c : j.at("per_class")) {
    r.per_class.push_back({c.at("label").get<std::string>(), c.at("precision").get<double>(),
                           c.at("recall").get<double>(), c.at("f1").get<double>(), c.at("support").get<std::size_t>(),
                           c.at("predicted").get<std::size_t>()});
  }
  if (r.confusion.size() != r.labels.size()) throw InputError("confusion matrix does not match the label list");
  return r;
}

inline void write_report(const EvalReport& r, const std::filesystem::path& path) {
  write_text_file(path, to_json(r).dump(2) + "\n");
}

/// Reads a report written by write_report. Any failure is an InputError
/// naming the file.
inline EvalReport read_report(const std::filesystem::path& path) {
  try {
    return report_from_json(Json::parse(read_text_file(path)));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const Json::exception& e) {
    throw InputError(path.string() + ": malformed report (" + e.what() + ")");
  }
}

// ---------------------------------------------------------------------------
// Multi-run summaries

struct MetricSummary {
  std::vector<double> values;
  double median = 0;
  double min = 0;
  double max = 0;
};

/// Median with the lower-middle value for even counts, plus the range.
inline MetricSummary summarize_values(std::vector<double> v) {
  if (v.empty()) throw DataError("summarize: no runs");
  MetricSummary s;
  s.values = v;
  std::sort(v.begin(), v.end());
  s.median = v[(v.size() - 1) / 2];
  s.min = v.front();
  s.max = v.back();
  return s;
}

/// "median min - max" to two decimals; a single run prints only its value.
inline std::string format_cell(const MetricSummary& s, int decimals = 2) {
  char buf[96];
  if (s.values.size() == 1) {
    std::snprintf(buf, sizeof buf, "%.*f", decimals, s.median);
  } else {
    std::snprintf(buf, sizeof buf, "%.*f %.*f - %.*f", decimals, s.median, decimals, s.min, decimals, s.max);
  }
  return buf;
}

struct RunSummary {
  std::string model;
  std::size_t runs = 0;
  MetricSummary accuracy, macro_f1, macro_recall, macro_precision;
  std::optional<MetricSummary> val_accuracy, val_loss;
};

inline std::vector<std::string> table_columns() {
  return {"model", "runs", "accuracy", "f1", "recall", "precision", "val_accuracy", "val_loss"};
}

/// Summary of runs of one model. Validation columns are filled when every
/// report carries context.validation.{accuracy,loss}.
inline RunSummary summarize_runs(const std::vector<EvalReport>& runs, const std::string& model = "") {
  if (runs.empty()) throw DataError("summarize_runs: empty run list");
  RunSummary s;
  s.model = model.empty() ? runs.front().context.value("model", std::string("model")) : model;
  s.runs = runs.size();
  std::vector<double> acc, f1, rec, prec, va, vl;
  bool have_val = true;
  for (const auto& r : runs) {
    if (r.labels != runs.front().labels) throw LabelError("summarize_runs: reports have different label sets");
    acc.push_back(r.accuracy);
    f1.push_back(r.macro_f1);
    rec.push_back(r.macro_recall);
    prec.push_back(r.macro_precision);
    const Json v = r.context.value("validation", Json::object());
    if (v.contains("accuracy") && v.contains("loss") && v["loss"].is_number()) {
      va.push_back(v["accuracy"].get<double>());
      vl.push_back(v["loss"].get<double>());
    } else {
      have_val = false;
    }
  }
  s.accuracy = summarize_values(acc);
  s.macro_f1 = summarize_values(f1);
  s.macro_recall = summarize_values(rec);
  s.macro_precision = summarize_values(prec);
  if (have_val) {
    s.val_accuracy = summarize_values(va);
    s.val_loss = summarize_values(vl);
  }
  return s;
}

/// Groups reports by context.model (first-appearance order) and summarizes
/// each group. All reports must share one label set.
inline std::vector<RunSummary> summarize_by_model(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw DataError("summarize: no reports");
  std::vector<std::string> order;
  std::map<std::string, std::vector<EvalReport>> groups;
  for (const auto& r : reports) {
    if (r.labels != reports.front().labels) throw LabelError("summarize: reports have different label sets");
    const std::string m = r.context.value("model", std::string("model"));
    if (!groups.count(m)) order.push_back(m);
    groups[m].push_back(r);
  }
  std::vector<RunSummary> out;
  for (const auto& m : order) out.push_back(summarize_runs(groups[m], m));
  return out;
}

inline std::string summary_csv(const std::vector<RunSummary>& rows) {
  std::ostringstream o;
  const auto cols = table_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) o << (i ? "," : "") << cols[i];
  o << '\n';
  for (const auto& s : rows) {
    o << s.model << ',' << s.runs << ',' << format_cell(s.accuracy) << ',' << format_cell(s.macro_f1) << ','
      << format_cell(s.macro_recall) << ',' << format_cell(s.macro_precision) << ','
      << (s.val_accuracy ? format_cell(*s.val_accuracy) : "") << ',' << (s.val_loss ? format_cell(*s.val_loss) : "")
      << '\n';
  }
  return o.str();
}

// ---------------------------------------------------------------------------
// Confusion export

inline std::string confusion_csv(const EvalReport& r) {
  std::ostringstream o;
  for (const auto& l : r.labels) o << ',' << l;
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    o << '\n' << r.labels[i];
    for (std::size_t c : r.confusion[i]) o << ',' << c;
  }
  return o.str();
}

/// Genus of a species label: text before the first space or underscore.
inline std::string genus_of(const std::string& label) {
  const auto p = label.find_first_of(" _");
  return p == std::string::npos ? label : label.substr(0, p);
}

/// Row-normalized heatmap. With `genus_separators`, lines are drawn between
/// runs of labels that share a genus.
inline std::string confusion_svg(const EvalReport& r, bool genus_separators = true) {
  const std::size_t K = r.labels.size();
  std::size_t longest = 1;
  for (const auto& l : r.labels) longest = std::max(longest, l.size());
  const double cell = K > 40 ? 12.0 : 18.0;
  const double margin = 20.0 + 6.5 * static_cast<double>(longest);
  const double side = cell * static_cast<double>(K);
  const double W = margin + side + 20, H = margin + side + 40;
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(2);
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"" << cell * 0.6 << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < K; ++i) {
    const double row = std::max<double>(1.0, static_cast<double>(r.per_class[i].support));
    for (std::size_t j = 0; j < K; ++j) {
      const double v = static_cast<double>(r.confusion[i][j]) / row;
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      o << "<rect x=\"" << margin + cell * static_cast<double>(j) << "\" y=\"" << margin + cell * static_cast<double>(i)
        << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << shade << ',' << shade
        << ",255)\" stroke=\"#ddd\" stroke-width=\"0.5\"><title>" << xml_escape(r.labels[i]) << " as "
        << xml_escape(r.labels[j]) << ": " << r.confusion[i][j] << "</title></rect>\n";
    }
  }
  for (std::size_t i = 0; i < K; ++i) {
    const double c = margin + cell * (static_cast<double>(i) + 0.5);
    o << "<text x=\"" << margin - 4 << "\" y=\"" << c + cell * 0.2 << "\" text-anchor=\"end\">" << xml_escape(r.labels[i])
      << "</text>\n";
    o << "<text transform=\"translate(" << c + cell * 0.2 << ',' << margin - 4
      << ") rotate(-90)\" text-anchor=\"start\">" << xml_escape(r.labels[i]) << "</text>\n";
  }
  if (genus_separators) {
    for (std::size_t i = 1; i < K; ++i) {
      if (genus_of(r.labels[i]) == genus_of(r.labels[i - 1])) continue;
      const double p = margin + cell * static_cast<double>(i);
      o << "<line x1=\"" << margin << "\" y1=\"" << p << "\" x2=\"" << margin + side << "\" y2=\"" << p
        << "\" stroke=\"#c33\" stroke-width=\"0.8\"/>\n";
      o << "<line x1=\"" << p << "\" y1=\"" << margin << "\" x2=\"" << p << "\" y2=\"" << margin + side
        << "\" stroke=\"#c33\" stroke-width=\"0.8\"/>\n";
    }
  }
  o << "<text x=\"" << margin + side / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">predicted label</text>\n";
  o << "<text transform=\"translate(12," << margin + side / 2
    << ") rotate(-90)\" text-anchor=\"middle\">true label</text>\n";
  o << "</svg>\n";
  return o.str();
}

/// Writes `<stem>.csv` and `<stem>.svg` next to `path` (its extension, if
/// any, is replaced). Returns both paths.
inline std::vector<std::filesystem::path> export_confusion(const EvalReport& r, const std::filesystem::path& path,
                                                           bool genus_separators = true) {
  std::filesystem::path csv = path, svg = path;
  csv.replace_extension(".csv");
  svg.replace_extension(".svg");
  write_text_file(csv, confusion_csv(r) + "\n");
  write_text_file(svg, confusion_svg(r, genus_separators));
  return {csv, svg};
}

}  // namespace leafkit::metrics
