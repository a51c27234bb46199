// Copyright 2026 The vispk Authors.
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

// Probing datasets: samples, seeded splits, prompt templates and scoring.
//
// Scores are reported as percentages:
//   R-Acc  share of samples whose most probable label is a gold label
//          (any label tied for the maximum counts),
//   Conf   mean probability mass on the gold labels,
//   F1     unweighted mean over classes of binary F1, where a class is
//          predicted when its probability reaches the decision threshold
//          (1 / |label space| unless overridden).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "vispk/color.hpp"
#include "vispk/distribution.hpp"
#include "vispk/error.hpp"
#include "vispk/labels.hpp"
#include "vispk/size.hpp"
#include "vispk/spatial.hpp"
#include "vispk/text.hpp"

namespace vispk {

inline std::vector<std::string> label_space(Task t) {
  switch (t) {
    case Task::kColor: return {kBasicColors.begin(), kBasicColors.end()};
    case Task::kSize: return {kSmaller, kLarger};
    case Task::kSpatial: return {kBelow, kAbove, kSimilar};
  }
  return {};
}

enum class Split { kUnassigned, kTrain, kDev, kTest };

inline std::string to_string(Split s) {
  switch (s) {
    case Split::kUnassigned: return "-";
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "";
}

inline Split parse_split(std::string_view s) {
  if (s == "-") return Split::kUnassigned;
  if (s == "train") return Split::kTrain;
  if (s == "dev") return Split::kDev;
  if (s == "test") return Split::kTest;
  fail("unknown split '" + std::string(s) + "'");
}

struct EvalSample {
  std::string sample_id;
  Task task = Task::kColor;
  std::string scene;  // spatial only
  std::string o1;
  std::string o2;  // size and spatial
  std::set<std::string> gold;
  Split split = Split::kUnassigned;

  friend bool operator==(const EvalSample&, const EvalSample&) = default;
};

inline void validate_sample(const EvalSample& s) {
  check(!s.gold.empty(), "sample '" + s.sample_id + "' has an empty gold set");
  const auto space = label_space(s.task);
  for (const auto& g : s.gold)
    check(std::find(space.begin(), space.end(), g) != space.end(),
          "sample '" + s.sample_id + "': gold label '" + g + "' outside the " + to_string(s.task) + " label space");
  if (s.task == Task::kSize) check(s.gold.size() == 1, "size sample '" + s.sample_id + "' needs a single gold label");
}

// ---------------------------------------------------------------------------
// Sample construction

inline std::string spatial_key_string(const SpatialKey& k) {
  return std::get<0>(k) + "|" + std::get<1>(k) + "|" + std::get<2>(k);
}

inline std::vector<EvalSample> make_color_samples(const std::map<std::string, TypicalLabelSet>& typical) {
  std::vector<EvalSample> out;
  for (const auto& [obj, t] : typical) out.push_back({"color/" + obj, Task::kColor, "", obj, "", t.labels, {}});
  return out;
}

inline std::vector<EvalSample> make_size_samples(const std::vector<RelationRecord>& records) {
  std::vector<EvalSample> out;
  for (const auto& r : records)
    out.push_back({"size/" + r.subject + "/" + r.object, Task::kSize, "", r.subject, r.object, {r.relation}, {}});
  return out;
}

inline std::vector<EvalSample> make_spatial_samples(const std::map<SpatialKey, TypicalLabelSet>& typical) {
  std::vector<EvalSample> out;
  for (const auto& [key, t] : typical) {
    const auto& [scene, a, b] = key;
    out.push_back({"spatial/" + scene + "/" + a + "/" + b, Task::kSpatial, scene, a, b, t.labels, {}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splits

// Grouping key: the object for color, the unordered pair for size and
// spatial (plus the scene type), so a relation and its complement always
// land together.
inline std::string split_key(const EvalSample& s) {
  if (s.task == Task::kColor) return s.o1;
  const auto [lo, hi] = std::minmax(s.o1, s.o2);
  return s.scene + "\x1f" + lo + "\x1f" + hi;
}

namespace detail {

// Unbiased draw in [0, bound) from mt19937_64; std distributions are not
// specified bit-exactly across standard libraries.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % bound;
}

}  // namespace detail

struct SplitRatios {
  double train = 0.2;
  double dev = 0.1;
  double test = 0.7;
};

inline SplitRatios parse_ratios(std::string_view s) {
  const auto parts = text::split(s, ',');
  check(parts.size() == 3, "ratios must be three comma-separated numbers");
  SplitRatios r{text::parse_double(parts[0], "train ratio"), text::parse_double(parts[1], "dev ratio"),
                text::parse_double(parts[2], "test ratio")};
  return r;
}

inline std::vector<EvalSample> split_dataset(std::vector<EvalSample> samples, SplitRatios ratios = {},
                                             std::uint64_t seed = 0) {
  check(ratios.train >= 0 && ratios.dev >= 0 && ratios.test >= 0, "split ratios must be non-negative");
  check(std::abs(ratios.train + ratios.dev + ratios.test - 1.0) < 1e-9, "split ratios must sum to 1");

  std::set<std::string> unique;
  for (const auto& s : samples) unique.insert(split_key(s));
  std::vector<std::string> keys(unique.begin(), unique.end());

  std::mt19937_64 rng(seed);
  for (std::size_t i = keys.size(); i > 1; --i) std::swap(keys[i - 1], keys[detail::bounded(rng, i)]);

  const std::size_t n = keys.size();
  const std::size_t n_train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(ratios.train * n)));
  const std::size_t n_dev =
      std::min<std::size_t>(n - n_train, static_cast<std::size_t>(std::llround(ratios.dev * n)));
  std::map<std::string, Split> assign;
  for (std::size_t i = 0; i < n; ++i)
    assign[keys[i]] = i < n_train ? Split::kTrain : i < n_train + n_dev ? Split::kDev : Split::kTest;

  for (auto& s : samples) s.split = assign.at(split_key(s));
  return samples;
}

// ---------------------------------------------------------------------------
// Prompts

enum class Setting { kZeroShot, kFinetune, kQa };

inline Setting parse_setting(std::string_view s) {
  if (s == "ZS" || s == "zs") return Setting::kZeroShot;
  if (s == "FT" || s == "ft") return Setting::kFinetune;
  if (s == "QA" || s == "qa") return Setting::kQa;
  fail("unknown setting '" + std::string(s) + "'");
}

inline std::string to_string(Setting s) {
  switch (s) {
    case Setting::kZeroShot: return "ZS";
    case Setting::kFinetune: return "FT";
    case Setting::kQa: return "QA";
  }
  return "";
}

struct PromptRecord {
  std::string sample_id;
  std::string text;
  std::set<std::string> gold;
};

inline std::string display_label(const std::string& label) {
  return label == kSimilar ? "similar level" : label;
}

// "(a) red (b) orange ..." over the whole label space.
inline std::string qa_choices(Task t) {
  std::string out;
  char letter = 'a';
  for (const auto& l : label_space(t)) {
    if (!out.empty()) out += ' ';
    out += std::string("(") + letter++ + ") " + display_label(l);
  }
  return out;
}

inline std::string render_prompt(const EvalSample& s, Setting setting) {
  switch (s.task) {
    case Task::kColor:
      switch (setting) {
        case Setting::kZeroShot: return s.o1 + " is of [MASK] color";
        case Setting::kFinetune: return "[CLS] color of " + s.o1;
        case Setting::kQa: return "What is the color of " + s.o1 + "? " + qa_choices(s.task);
      }
      break;
    case Task::kSize:
      switch (setting) {
        case Setting::kZeroShot: return s.o1 + " is [MASK] than " + s.o2 + " in size";
        case Setting::kFinetune: return "[CLS] size of " + s.o1 + " in comparison to " + s.o2;
        case Setting::kQa:
          return "what is the size of " + s.o1 + " in comparison to " + s.o2 + "? " + qa_choices(s.task);
      }
      break;
    case Task::kSpatial:
      switch (setting) {
        case Setting::kZeroShot: return "in a " + s.scene + ", the " + s.o1 + " is located [MASK] the " + s.o2;
        case Setting::kFinetune:
          return "[CLS] in a " + s.scene + ", the " + s.o1 + " is located in comparison to " + s.o2;
        case Setting::kQa:
          return "in a " + s.scene + ", where is " + s.o1 + " is located in comparison to " + s.o2 + "? " +
                 qa_choices(s.task);
      }
      break;
  }
  fail("unreachable prompt combination");
}

// Zero-shot spatial probing only uses samples whose gold labels are drawn
// from {above, below}.
inline std::vector<PromptRecord> emit_prompts(Task task, Setting setting, const std::vector<EvalSample>& samples) {
  std::vector<PromptRecord> out;
  for (const auto& s : samples) {
    check(s.task == task, "sample '" + s.sample_id + "' is not a " + to_string(task) + " sample");
    if (task == Task::kSpatial && setting == Setting::kZeroShot && s.gold.count(kSimilar)) continue;
    out.push_back({s.sample_id, render_prompt(s, setting), s.gold});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scoring

using Prediction = std::map<std::string, double>;

struct BucketMetrics {
  double r_acc = 0.0;
  double conf = 0.0;
  std::size_t n = 0;
};

struct MetricsReport {
  double r_acc = 0.0;
  double conf = 0.0;
  double macro_f1 = 0.0;
  std::map<std::size_t, BucketMetrics> per_cardinality;
  std::size_t n_samples = 0;
};

inline void validate_prediction(const std::string& id, const Prediction& p, const std::vector<std::string>& space) {
  double sum = 0.0;
  for (const auto& [label, prob] : p) {
    check(std::find(space.begin(), space.end(), label) != space.end(),
          "prediction '" + id + "': label '" + label + "' outside the label space");
    check(std::isfinite(prob) && prob >= 0.0, "prediction '" + id + "': invalid probability for '" + label + "'");
    sum += prob;
  }
  check(std::abs(sum - 1.0) <= 1e-6, "prediction '" + id + "': probabilities sum to " + text::format_double(sum));
}

namespace detail {

inline double prob_of(const Prediction& p, const std::string& l) {
  auto it = p.find(l);
  return it == p.end() ? 0.0 : it->second;
}

inline bool relaxed_hit(const Prediction& p, const std::set<std::string>& gold, const std::vector<std::string>& space) {
  double top = 0.0;
  for (const auto& l : space) top = std::max(top, prob_of(p, l));
  for (const auto& l : space)
    if (prob_of(p, l) == top && gold.count(l)) return true;
  return false;
}

inline double gold_mass(const Prediction& p, const std::set<std::string>& gold) {
  double m = 0.0;
  for (const auto& l : gold) m += prob_of(p, l);
  return m;
}

}  // namespace detail

inline MetricsReport score(const std::map<std::string, Prediction>& preds, const std::vector<EvalSample>& golds,
                           std::optional<double> f1_threshold = std::nullopt) {
  check(!golds.empty(), "nothing to score");
  const Task task = golds.front().task;
  const auto space = label_space(task);
  const double threshold = f1_threshold.value_or(1.0 / static_cast<double>(space.size()));

  std::set<std::string> ids;
  for (const auto& g : golds) {
    check(g.task == task, "mixed tasks in one scoring run");
    validate_sample(g);
    check(ids.insert(g.sample_id).second, "duplicate gold sample_id '" + g.sample_id + "'");
    check(preds.count(g.sample_id), "missing prediction for sample '" + g.sample_id + "'");
  }
  for (const auto& [id, p] : preds) {
    check(ids.count(id), "prediction for unknown sample '" + id + "'");
    validate_prediction(id, p, space);
  }

  MetricsReport r;
  r.n_samples = golds.size();
  std::map<std::string, std::array<std::size_t, 3>> confusion;  // tp, fp, fn
  double hits = 0.0, mass = 0.0;
  for (const auto& g : golds) {
    const Prediction& p = preds.at(g.sample_id);
    const bool hit = detail::relaxed_hit(p, g.gold, space);
    const double m = detail::gold_mass(p, g.gold);
    hits += hit;
    mass += m;
    auto& b = r.per_cardinality[g.gold.size()];
    b.r_acc += hit;
    b.conf += m;
    ++b.n;
    for (const auto& l : space) {
      const bool predicted = detail::prob_of(p, l) >= threshold;
      const bool actual = g.gold.count(l) > 0;
      auto& c = confusion[l];
      if (predicted && actual) ++c[0];
      else if (predicted) ++c[1];
      else if (actual) ++c[2];
    }
  }
  const double n = static_cast<double>(golds.size());
  r.r_acc = 100.0 * hits / n;
  r.conf = 100.0 * mass / n;
  for (auto& [card, b] : r.per_cardinality) {
    b.r_acc = 100.0 * b.r_acc / static_cast<double>(b.n);
    b.conf = 100.0 * b.conf / static_cast<double>(b.n);
  }
  // Classes never predicted nor gold have undefined F1 and are left out.
  double f1_sum = 0.0;
  std::size_t f1_classes = 0;
  for (const auto& [l, c] : confusion) {
    const std::size_t denom = 2 * c[0] + c[1] + c[2];
    if (denom == 0) continue;
    f1_sum += 2.0 * static_cast<double>(c[0]) / static_cast<double>(denom);
    ++f1_classes;
  }
  r.macro_f1 = f1_classes ? 100.0 * f1_sum / static_cast<double>(f1_classes) : 0.0;
  return r;
}

inline std::map<std::size_t, BucketMetrics> cardinality_breakdown(const std::map<std::string, Prediction>& preds,
                                                                  const std::vector<EvalSample>& golds) {
  return score(preds, golds).per_cardinality;
}

// ---------------------------------------------------------------------------
// File formats
//
// Dataset:    sample_id, task, split, scene, o1, o2, gold (comma-separated);
//             empty slots are written as "-".
// Prompts:    sample_id, prompt, gold.
// Prediction: sample_id, "label:prob label:prob ...".

inline std::string dataset_to_text(const std::vector<EvalSample>& samples) {
  auto slot = [](const std::string& s) { return s.empty() ? std::string("-") : s; };
  std::string out;
  for (const auto& s : samples) {
    out += s.sample_id + "\t" + to_string(s.task) + "\t" + to_string(s.split) + "\t" + slot(s.scene) + "\t" +
           slot(s.o1) + "\t" + slot(s.o2) + "\t" +
           text::join(std::vector<std::string>(s.gold.begin(), s.gold.end()), ",") + "\n";
  }
  return out;
}

inline std::vector<EvalSample> parse_dataset(const std::vector<std::string>& lines) {
  auto slot = [](const std::string& s) { return s == "-" ? std::string() : s; };
  std::vector<EvalSample> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto f = text::split(lines[i], '\t');
    check(f.size() == 7, "dataset line " + std::to_string(i + 1) + ": expected 7 tab-separated fields");
    EvalSample s{f[0], parse_task(f[1]), slot(f[3]), slot(f[4]), slot(f[5]), {}, parse_split(f[2])};
    for (const auto& g : text::split(f[6], ','))
      if (!g.empty()) s.gold.insert(g);
    validate_sample(s);
    out.push_back(std::move(s));
  }
  return out;
}

inline std::string prompts_to_text(const std::vector<PromptRecord>& prompts) {
  std::string out;
  for (const auto& p : prompts)
    out += p.sample_id + "\t" + p.text + "\t" + text::join(std::vector<std::string>(p.gold.begin(), p.gold.end()), ",") + "\n";
  return out;
}

inline std::map<std::string, Prediction> parse_predictions(const std::vector<std::string>& lines) {
  std::map<std::string, Prediction> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto f = text::split(lines[i], '\t');
    check(f.size() == 2, "prediction line " + std::to_string(i + 1) + ": expected sample_id<TAB>label:prob ...");
    check(!out.count(f[0]), "duplicate prediction for '" + f[0] + "'");
    out[f[0]] = parse_probs(f[1]);
  }
  return out;
}

inline std::string report_to_text(const MetricsReport& r) {
  std::string out;
  out += "metric      value\n";
  out += "R-Acc       " + text::format_fixed(r.r_acc, 2) + "\n";
  out += "Conf        " + text::format_fixed(r.conf, 2) + "\n";
  out += "F1          " + text::format_fixed(r.macro_f1, 2) + "\n";
  out += "samples     " + std::to_string(r.n_samples) + "\n";
  if (!r.per_cardinality.empty()) {
    out += "\n|T|  n      R-Acc   Conf\n";
    for (const auto& [card, b] : r.per_cardinality) {
      std::string row = std::to_string(card);
      row.resize(5, ' ');
      std::string nn = std::to_string(b.n);
      nn.resize(7, ' ');
      out += row + nn + text::format_fixed(b.r_acc, 2) + "   " + text::format_fixed(b.conf, 2) + "\n";
    }
  }
  out += "\n";
  out += "#metric\tr_acc\t" + text::format_double(r.r_acc) + "\n";
  out += "#metric\tconf\t" + text::format_double(r.conf) + "\n";
  out += "#metric\tmacro_f1\t" + text::format_double(r.macro_f1) + "\n";
  out += "#metric\tn_samples\t" + std::to_string(r.n_samples) + "\n";
  for (const auto& [card, b] : r.per_cardinality) {
    out += "#bucket\t" + std::to_string(card) + "\t" + std::to_string(b.n) + "\t" + text::format_double(b.r_acc) +
           "\t" + text::format_double(b.conf) + "\n";
  }
  return out;
}

}  // namespace vispk
