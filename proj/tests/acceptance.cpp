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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"
#include "vispk/color.hpp"
#include "vispk/evalkit.hpp"
#include "vispk/jenks.hpp"
#include "vispk/labels.hpp"
#include "vispk/pipeline.hpp"
#include "vispk/size.hpp"
#include "vispk/spatial.hpp"
#include "vispk/subtype.hpp"
#include "vispk/synth.hpp"

namespace {

using namespace vispk;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// ---------------------------------------------------------------------------

Outcome jenks_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int cases = 0, mismatches = 0;
  for (int n = 1; n <= 12; ++n) {
    for (int k = 1; k <= std::min(4, n); ++k) {
      for (int rep = 0; rep < 30; ++rep) {
        std::vector<std::int64_t> xs(static_cast<std::size_t>(n));
        // Narrow ranges force ties; wide ranges spread values out.
        const std::uint64_t span = rep % 3 == 0 ? 5 : rep % 3 == 1 ? 40 : 1000;
        for (auto& x : xs) x = static_cast<std::int64_t>(rng() % span) - static_cast<std::int64_t>(span / 2);
        const std::vector<double> vals(xs.begin(), xs.end());
        const auto r = jenks_breaks(vals, k);
        ++cases;
        if (oracle::scaled_cost(xs, r.assignment, k) != oracle::brute_force_min_cost(xs, k)) ++mismatches;
      }
    }
  }
  const double secs = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d cases, %d mismatches, %.2f s", cases, mismatches, secs);
  return {cases >= 1000 && mismatches == 0 && secs < 5.0, buf};
}

// ---------------------------------------------------------------------------

Outcome typicalize_fixture() {
  LabelDistribution d;
  d.probs = {{"white", 0.5}, {"black", 0.4}, {"red", 0.1}};
  d.support = 10;
  const auto t = typicalize(d);
  bool trace = t.labels == std::set<std::string>{"white", "black"} &&
               std::abs(t.probs.prob("white") - 5.0 / 9.0) <= 1e-9 &&
               std::abs(t.probs.prob("black") - 4.0 / 9.0) <= 1e-9 && t.probs.prob("red") == 0.0;

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int failures = 0;
  for (int i = 0; i < 10000; ++i) {
    LabelDistribution r;
    const std::size_t n = 1 + rng() % 11;
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double w = u(rng);
      if (rng() % 4 == 0) w *= 0.05;
      r.probs[std::string(kBasicColors[j])] = w;
      total += w;
    }
    for (auto& [l, p] : r.probs) p /= total;
    r.support = 1;
    const auto once = typicalize(r);
    const auto twice = typicalize(once.probs);
    bool same = once.labels == twice.labels;
    for (const auto& [l, p] : once.probs.probs) same = same && std::abs(twice.probs.prob(l) - p) <= 1e-12;
    failures += !same;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "trace %s, idempotence failures %d/10000", trace ? "ok" : "WRONG", failures);
  return {trace && failures == 0, buf};
}

// ---------------------------------------------------------------------------

Outcome metric_fixtures() {
  std::vector<EvalSample> golds;
  std::map<std::string, Prediction> preds;
  for (const auto& c : oracle::metric_fixture()) {
    golds.push_back({c.id, Task::kColor, "", "obj-" + c.id, "", c.gold, Split::kTest});
    preds[c.id] = c.pred;
  }
  const auto r = score(preds, golds);
  const bool fixture = std::abs(r.r_acc - oracle::kFixtureRAcc) <= 0.01 &&
                       std::abs(r.conf - oracle::kFixtureConf) <= 0.01 &&
                       std::abs(r.macro_f1 - oracle::kFixtureMacroF1) <= 0.01;

  // Uniform predictor: Conf = mean |T| / 11.
  Prediction uniform;
  for (auto c : kBasicColors) uniform[std::string(c)] = 1.0 / 11.0;
  std::mt19937_64 rng(5);
  bool identity = true;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EvalSample> g;
    std::map<std::string, Prediction> p;
    std::size_t card_sum = 0;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      std::set<std::string> gold;
      const std::size_t k = 1 + rng() % 11;
      while (gold.size() < k) gold.insert(std::string(kBasicColors[rng() % 11]));
      card_sum += k;
      const std::string id = "u" + std::to_string(i);
      g.push_back({id, Task::kColor, "", id, "", gold, Split::kTest});
      p[id] = uniform;
    }
    const double expect = 100.0 * static_cast<double>(card_sum) / static_cast<double>(n) / 11.0;
    identity = identity && std::abs(score(p, g).conf - expect) <= 1e-9;
  }

  std::set<std::string> all;
  for (auto c : kBasicColors) all.insert(std::string(c));
  const auto b = cardinality_breakdown({{"a", {{"red", 0.3}, {"gray", 0.7}}}},
                                       {{"a", Task::kColor, "", "a", "", all, Split::kTest}});
  const bool eleven = b.count(11) && b.at(11).conf == 100.0 && b.at(11).r_acc == 100.0;

  char buf[200];
  std::snprintf(buf, sizeof buf, "R-Acc %.4f Conf %.4f F1 %.4f, uniform identity %s, |T|=11 bucket %s", r.r_acc,
                r.conf, r.macro_f1, identity ? "ok" : "WRONG", eleven ? "ok" : "WRONG");
  return {fixture && identity && eleven, buf};
}

// ---------------------------------------------------------------------------

Outcome synthetic_recovery() {
  const auto t0 = Clock::now();
  std::size_t size_total = 0, size_ok = 0, intra_total = 0, intra_ok = 0, trans_total = 0, trans_ok = 0;
  for (int i = 0; i < 200; ++i) {
    const auto sc = synth::generate_scene(5000 + static_cast<std::uint64_t>(i), 8,
                                          kAllSceneTypes[static_cast<std::size_t>(i) % kAllSceneTypes.size()]);
    std::map<std::string, double> area;
    for (const auto& o : sc.truth.objects) area[o.name] = o.area();

    for (const auto& p : scene_size_relations(sc.scene, sc.depth, 5, 2)) {
      const double a = area.at(p.smaller), b = area.at(p.larger);
      if (std::max(a, b) < 4.0 * std::min(a, b)) continue;
      ++size_total;
      size_ok += a < b;
    }

    // Scored on pairs whose truth is unambiguous in the world and in the image.
    const auto truth = synth::oracle_relations(sc.truth);
    std::map<std::pair<std::string, std::string>, const synth::SpatialTruth*> by_ids;
    for (const auto& t : truth.spatial) by_ids[{t.subject_instance, t.object_instance}] = &t;
    auto lookup = [&](const SpatialObservation& o, std::string& expected) {
      if (auto it = by_ids.find({o.subject_instance, o.object_instance}); it != by_ids.end()) {
        if (!it->second->clear || !it->second->clear_in_image) return false;
        expected = it->second->relation;
        return true;
      }
      const auto& t = *by_ids.at({o.object_instance, o.subject_instance});
      if (!t.clear || !t.clear_in_image) return false;
      expected = inverse_spatial(t.relation);
      return true;
    };
    const auto ex = extract_spatial(sc.scene, sc.depth);
    std::string expected;
    for (const auto& o : ex.intra)
      if (lookup(o, expected)) {
        ++intra_total;
        intra_ok += o.relation == expected;
      }
    for (const auto& o : ex.transitive)
      if (lookup(o, expected)) {
        ++trans_total;
        trans_ok += o.relation == expected;
      }
  }
  const double secs = seconds_since(t0);
  auto pct = [](std::size_t ok, std::size_t total) { return total ? 100.0 * ok / total : 0.0; };
  const double s = pct(size_ok, size_total), a = pct(intra_ok, intra_total), t = pct(trans_ok, trans_total);
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "size %.2f%% (%zu pairs), same-partition %.2f%% (%zu), transitive %.2f%% (%zu), %.1f s", s,
                size_total, a, intra_total, t, trans_total, secs);
  return {size_total > 0 && intra_total > 0 && trans_total > 0 && s >= 95.0 && intra_ok == intra_total &&
              t >= 90.0 && secs < 60.0,
          buf};
}

// ---------------------------------------------------------------------------

double ref_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / std::sqrt(na * nb);
}

Outcome subtype_conformance() {
  std::mt19937_64 rng(31337);
  std::normal_distribution<double> g(0.0, 1.0);
  auto vec = [&] {
    std::vector<double> v(8);
    for (auto& x : v) x = g(rng);
    return v;
  };
  int cases = 0, mismatches = 0, anchor_missing = 0;
  for (int t = 0; t < 200; ++t) {
    EmbeddingTable emb;
    std::map<std::string, std::vector<double>> text_vec;
    const std::string anchor = "sink";
    const std::size_t n = rng() % 7;
    std::set<std::string> candidates;
    for (std::size_t i = 0; i < n; ++i) candidates.insert("type" + std::to_string(rng() % 10) + " sink");
    text_vec[anchor] = vec();
    for (const auto& c : candidates) text_vec[c] = vec();
    // Occasionally duplicate a vector to force exact ties.
    if (candidates.size() >= 2 && t % 5 == 0) text_vec[*candidates.rbegin()] = text_vec[*candidates.begin()];
    for (const auto& [name, v] : text_vec) emb.add(EmbeddingTable::text_key(name), v);
    const auto image = vec(), region = vec();
    emb.add(EmbeddingTable::image_key("img"), image);
    emb.add(EmbeddingTable::region_key("img", "1"), region);

    std::set<std::string> expect_filtered{anchor};
    const double anchor_sim = ref_cosine(text_vec[anchor], image);
    for (const auto& c : candidates)
      if (ref_cosine(text_vec[c], image) > anchor_sim) expect_filtered.insert(c);
    std::string expect_pick;
    double best = -2.0;
    for (const auto& c : expect_filtered) {
      const double s = ref_cosine(region, text_vec[c]);
      if (s > best) {
        best = s;
        expect_pick = c;
      }
    }

    const auto filtered = filter_candidates(anchor, candidates, emb, EmbeddingTable::image_key("img"));
    const auto pick = select_subtype(filtered, emb, EmbeddingTable::region_key("img", "1"));
    ++cases;
    mismatches += filtered != expect_filtered || pick != expect_pick;
    anchor_missing += !filtered.count(anchor);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d cases, %d mismatches, anchor missing %d", cases, mismatches, anchor_missing);
  return {cases >= 50 && mismatches == 0 && anchor_missing == 0, buf};
}

// ---------------------------------------------------------------------------

const std::vector<std::pair<std::string, std::vector<std::string>>>& color_rows() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> rows = {
      {"yellow", {"gold", "golden", "blonde", "beige", "peach", "cream"}},
      {"brown", {"wooden", "tan", "beige", "bronze", "copper"}},
      {"gray", {"grey", "silver", "metal", "steel"}},
      {"pink", {"peach"}},
      {"purple", {"violet"}},
      {"red", {"maroon"}},
      {"green", {"teal"}},
      {"blue", {"teal", "turquoise"}},
  };
  return rows;
}

std::set<std::string> ref_colors(const std::string& term) {
  std::set<std::string> out;
  for (auto c : kBasicColors)
    if (term == c) out.insert(term);
  for (const auto& [basic, terms] : color_rows())
    for (const auto& t : terms)
      if (t == term) out.insert(basic);
  return out;
}

Outcome color_canonicalization() {
  std::map<std::string, std::set<std::string>> inverted;
  for (const auto& [basic, terms] : color_rows())
    for (const auto& t : terms) inverted[t].insert(basic);
  int row_failures = 0;
  for (const auto& [term, basics] : inverted) {
    const auto got = canonicalize_color(term).colors;
    row_failures += std::set<std::string>(got.begin(), got.end()) != basics;
  }

  std::vector<std::string> vocab;
  for (const auto& [t, b] : inverted) vocab.push_back(t);
  for (auto c : kBasicColors) vocab.emplace_back(c);
  vocab.push_back("navy");  // unmapped
  std::mt19937_64 rng(8);
  const std::vector<std::string> objects = {"cup", "rug", "lamp", "sink", "chair"};
  std::vector<ColorObservation> obs;
  std::map<std::string, std::map<std::string, int>> counts;
  std::map<std::string, int> support;
  for (int i = 0; i < 100; ++i) {
    const std::string obj = objects[rng() % objects.size()];
    const std::size_t n = 1 + rng() % 3;
    std::string txt;
    std::set<std::string> colors;
    for (std::size_t j = 0; j < n; ++j) {
      const std::string& term = vocab[rng() % vocab.size()];
      if (j) txt += j % 2 ? " and " : ", ";
      txt += term;
      for (const auto& c : ref_colors(term)) colors.insert(c);
    }
    obs.push_back({obj, txt});
    if (colors.empty()) continue;
    ++support[obj];
    for (const auto& c : colors) ++counts[obj][c];
  }
  const auto agg = aggregate_colors(obs);
  bool tally = agg.distributions.size() == counts.size();
  for (const auto& [obj, c] : counts) {
    if (!agg.distributions.count(obj)) {
      tally = false;
      continue;
    }
    const auto& d = agg.distributions.at(obj);
    int total = 0;
    for (const auto& [l, n] : c) total += n;
    tally = tally && d.support == static_cast<std::size_t>(support[obj]) && d.probs.size() == c.size();
    for (const auto& [l, n] : c) tally = tally && std::abs(d.prob(l) - static_cast<double>(n) / total) <= 1e-12;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu raw terms, %d row failures, 100-observation tally %s", inverted.size(),
                row_failures, tally ? "ok" : "WRONG");
  return {inverted.size() == 18 && row_failures == 0 && tally, buf};
}

// ---------------------------------------------------------------------------

Outcome split_contract() {
  // 1000 unordered pairs, each present in both directions.
  std::vector<EvalSample> samples;
  for (int i = 0; i < 1000; ++i) {
    const std::string a = "obj" + std::to_string(i), b = "obj" + std::to_string(i + 1000);
    samples.push_back({"size/" + a + "/" + b, Task::kSize, "", a, b, {kSmaller}, {}});
    samples.push_back({"size/" + b + "/" + a, Task::kSize, "", b, a, {kLarger}, {}});
  }
  std::vector<EvalSample> colors;
  for (int i = 0; i < 1000; ++i) colors.push_back({"c" + std::to_string(i), Task::kColor, "", "o" + std::to_string(i), "", {"red"}, {}});

  bool ok = true;
  std::string failure;
  for (std::uint64_t seed : {0ull, 1ull, 7ull, 12345ull}) {
    for (const auto* set : {&samples, &colors}) {
      const auto out = split_dataset(*set, {}, seed);
      if (out != split_dataset(*set, {}, seed)) ok = false, failure = "not reproducible";
      std::map<std::string, std::set<Split>> per_key;
      for (const auto& s : out) per_key[split_key(s)].insert(s.split);
      std::map<Split, int> n;
      for (const auto& [k, splits] : per_key) {
        if (splits.size() != 1 || splits.count(Split::kUnassigned)) ok = false, failure = "key in several splits";
        ++n[*splits.begin()];
      }
      if (per_key.size() != 1000) ok = false, failure = "key count";
      if (std::abs(n[Split::kTrain] - 200) > 1 || std::abs(n[Split::kDev] - 100) > 1 ||
          std::abs(n[Split::kTest] - 700) > 1)
        ok = false, failure = "proportions";
      std::map<std::pair<std::string, std::string>, Split> where;
      for (const auto& s : out) where[{s.o1, s.o2}] = s.split;
      for (const auto& s : out)
        if (s.task == Task::kSize && where.at({s.o2, s.o1}) != s.split) ok = false, failure = "complement apart";
    }
  }
  return {ok, ok ? "1000 keys x 4 seeds x 2 tasks: 200/100/700, disjoint, complements together, reproducible"
                 : failure};
}

// ---------------------------------------------------------------------------

Outcome complement_balance() {
  std::mt19937_64 rng(4);
  int failures = 0;
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    // Random size events through the real aggregation, sometimes with
    // complements already present in the input.
    SizeTally tally;
    const int names = 2 + static_cast<int>(rng() % 10);
    const int events = static_cast<int>(rng() % 200);
    for (int e = 0; e < events; ++e) {
      const auto a = "n" + std::to_string(rng() % names), b = "n" + std::to_string(rng() % names);
      if (a != b) tally.add({a, b});
    }
    auto records = resolve_size(tally, 1 + rng() % 4);
    if (t % 3 == 0) {
      const std::size_t n = records.size();
      for (std::size_t i = 0; i < n; ++i)
        if (rng() % 2) records.push_back(size_complement(records[i]));
    }
    const auto balanced = balance_complements(records);
    std::size_t smaller = 0, larger = 0;
    for (const auto& r : balanced) (r.relation == kSmaller ? smaller : larger)++;
    failures += smaller != larger;
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "%d/%d aggregates unbalanced", failures, trials);
  return {failures == 0, buf};
}

// ---------------------------------------------------------------------------

Outcome pipeline_determinism() {
  vispk::testing::TempDir dir("acceptance");
  synth::CorpusConfig c;
  c.seed = 21;
  c.scenes = 40;
  synth::write_corpus(dir.file("corpus"), c);
  auto config = [&](const std::string& out, std::size_t jobs) {
    RunConfig cfg;
    cfg.scenes = dir.file("corpus/scenes.jsonl");
    cfg.colors = dir.file("corpus/colors.tsv");
    cfg.embeddings = dir.file("corpus/embeddings.tsv");
    cfg.phrases = dir.file("corpus/phrases.txt");
    cfg.kb = dir.file("corpus/kb.tsv");
    cfg.out_dir = dir.file(out);
    cfg.jobs = jobs;
    return cfg;
  };
  const auto a = run_pipeline(config("run1", 1));
  const auto b = run_pipeline(config("run2", 4));
  const std::string ma = text::read_file(a.manifest_path), mb = text::read_file(b.manifest_path);
  bool files_same = a.files.size() == 6 && b.files.size() == 6;
  for (std::size_t i = 0; files_same && i < a.files.size(); ++i)
    files_same = text::read_file(a.files[i]) == text::read_file(b.files[i]);
  return {ma == mb && files_same, std::string("manifest sha256 ") + sha256_hex(ma).substr(0, 16) +
                                      (ma == mb ? " on both runs" : " differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"jenks exact optimum", jenks_equivalence},
      {"typical-label fixture", typicalize_fixture},
      {"metric fixtures", metric_fixtures},
      {"synthetic end-to-end recovery", synthetic_recovery},
      {"subtype selection", subtype_conformance},
      {"color canonicalization", color_canonicalization},
      {"split contract", split_contract},
      {"complement balance", complement_balance},
      {"pipeline determinism", pipeline_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %zu  %-30s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
