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

// vispk command line. Every subcommand is a thin wrapper over one library
// stage; `run` chains them. Exit status: 0 ok, 1 runtime error, 2 usage.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vispk/pipeline.hpp"
#include "vispk/synth.hpp"

namespace {

using namespace vispk;

enum class Level { kError, kWarn, kInfo };
Level g_level = Level::kWarn;

void info(const std::string& msg) {
  if (g_level >= Level::kInfo) std::cerr << "vispk: " << msg << "\n";
}

// Writes to the named file, or stdout when none was given.
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    text::write_file(path, content);
    info("wrote " + path);
  }
}

std::vector<std::string> lines_of(const std::string& path) { return text::read_lines(path); }

struct Options {
  RunConfig run;
  std::string output;
  std::string input;
  std::string candidates;
  std::string dataset;
  std::string predictions;
  std::string task;
  std::string split;
  std::string color_typical, size_relations, spatial_typical;
  std::string ratios = "0.2,0.1,0.7";
  std::string setting = "FT";
  double f1_threshold = 0.0;
  int synth_scenes = 10;
  int synth_objects = 8;
  bool skip_depth = false;
};

void add_output(CLI::App* c, Options& o) {
  c->add_option("-o,--output", o.output, "Output file (default: stdout)");
}

void add_scenes(CLI::App* c, Options& o, bool required = true) {
  auto* opt = c->add_option("--scenes", o.run.scenes, "Scene line-record file")->check(CLI::ExistingFile);
  if (required) opt->required();
}

void add_depth(CLI::App* c, Options& o) {
  c->add_flag("--invert-depth", o.run.invert_depth, "Depth files store disparity (larger = nearer)");
  c->add_option("--jobs", o.run.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

void add_size_flags(CLI::App* c, Options& o) {
  c->add_option("--clusters", o.run.clusters, "Jenks classes per scene")->check(CLI::PositiveNumber);
  c->add_option("--gamma", o.run.gamma, "Depth exponent for perceived size")->check(CLI::IsMember({1, 2}));
  c->add_option("--min-support", o.run.min_support, "Minimum pair support")->check(CLI::PositiveNumber);
}

void add_spatial_flags(CLI::App* c, Options& o) {
  c->add_option("--partitions", o.run.partitions, "Depth partitions")->check(CLI::PositiveNumber);
  c->add_option("--overlap", o.run.overlap, "Fractional overlap of adjacent partitions")
      ->check(CLI::Range(0.0, 1.0));
}

void add_split_flags(CLI::App* c, Options& o) {
  c->add_option("--seed", o.run.seed, "Split seed");
  c->add_option("--ratios", o.ratios, "train,dev,test fractions");
}

std::optional<double> threshold_of(const Options& o) {
  if (o.f1_threshold <= 0.0) return std::nullopt;
  return o.f1_threshold;
}

std::vector<EvalSample> select_samples(const Options& o) {
  const auto all = parse_dataset(lines_of(o.dataset));
  std::optional<Task> task;
  if (!o.task.empty()) task = parse_task(o.task);
  std::optional<Split> split;
  if (!o.split.empty()) split = parse_split(o.split);
  std::vector<EvalSample> out;
  for (const auto& s : all) {
    if (task && s.task != *task) continue;
    if (split && s.split != *split) continue;
    out.push_back(s);
  }
  check(!out.empty(), "no samples selected from " + o.dataset);
  for (const auto& s : out)
    check(s.task == out.front().task, "dataset mixes tasks; pass --task");
  return out;
}

// Only the predictions for the selected samples are scored.
std::map<std::string, Prediction> select_predictions(const Options& o, const std::vector<EvalSample>& samples) {
  auto preds = parse_predictions(lines_of(o.predictions));
  std::set<std::string> ids;
  for (const auto& s : samples) ids.insert(s.sample_id);
  std::map<std::string, Prediction> out;
  for (auto& [id, p] : preds)
    if (ids.count(id)) out[id] = std::move(p);
  return out;
}

std::string breakdown_to_text(const std::map<std::size_t, BucketMetrics>& buckets) {
  std::string out = "|T|\tn\tR-Acc\tConf\n";
  for (const auto& [card, b] : buckets)
    out += std::to_string(card) + "\t" + std::to_string(b.n) + "\t" + text::format_fixed(b.r_acc, 2) + "\t" +
           text::format_fixed(b.conf, 2) + "\n";
  return out;
}

int run_cli(int argc, char** argv) {
  Options o;
  CLI::App app{"Visible physical knowledge extraction and probing-dataset toolkit", "vispk"};
  app.require_subcommand(1);
  std::string level = "warn";
  app.add_option("--log-level", level, "error, warn or info")
      ->check(CLI::IsMember({"error", "warn", "info"}));
  app.set_config("--config", "", "TOML/INI file of flag values; command-line flags win");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Scene ingestion");
  ingest->require_subcommand(1);
  auto* validate = ingest->add_subcommand("validate", "Validate scene records and their depth rasters");
  add_scenes(validate, o);
  validate->add_flag("--skip-depth", o.skip_depth, "Do not open depth files");
  validate->add_flag("--invert-depth", o.run.invert_depth, "Depth files store disparity");

  // subtype
  auto* subtype = app.add_subcommand("subtype", "Subtype candidates and selection");
  subtype->require_subcommand(1);
  auto* collect = subtype->add_subcommand("collect", "Collect candidate subtypes for every object name");
  add_scenes(collect, o);
  collect->add_option("--phrases", o.run.phrases, "Noun phrases, one per line")->check(CLI::ExistingFile);
  collect->add_option("--kb", o.run.kb, "is-a edges, child<TAB>parent")->check(CLI::ExistingFile);
  add_output(collect, o);
  auto* select = subtype->add_subcommand("select", "Assign a subtype to every instance");
  add_scenes(select, o);
  select->add_option("--candidates", o.candidates, "Candidate file")->required()->check(CLI::ExistingFile);
  select->add_option("--embeddings", o.run.embeddings, "Embedding table")->required()->check(CLI::ExistingFile);
  select->add_option("--jobs", o.run.jobs, "Worker threads")->check(CLI::PositiveNumber);
  add_output(select, o);

  // extract
  auto* extract = app.add_subcommand("extract", "Knowledge extraction");
  extract->require_subcommand(1);
  auto* color = extract->add_subcommand("color", "Color distributions from predicted color text");
  color->add_option("--colors", o.run.colors, "Observations: key<TAB>text")->required()->check(CLI::ExistingFile);
  color->add_option("--scenes", o.run.scenes,
                    "Annotated scenes; when given, observation keys are <image_id>/<instance_id>")
      ->check(CLI::ExistingFile);
  add_output(color, o);
  auto* size = extract->add_subcommand("size", "Relative size relations");
  add_scenes(size, o);
  add_size_flags(size, o);
  add_depth(size, o);
  add_output(size, o);
  auto* spatial = extract->add_subcommand("spatial", "Scene-conditioned elevation relations");
  add_scenes(spatial, o);
  add_spatial_flags(spatial, o);
  add_depth(spatial, o);
  add_output(spatial, o);

  // labels
  auto* labels = app.add_subcommand("labels", "Typical labels");
  labels->require_subcommand(1);
  auto* typ = labels->add_subcommand("typicalize", "Recursive p_min filter over distributions");
  typ->add_option("--task", o.task, "color or spatial")->required()->check(CLI::IsMember({"color", "spatial"}));
  typ->add_option("--input", o.input, "Distribution file")->required()->check(CLI::ExistingFile);
  add_output(typ, o);

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Probing datasets");
  dataset->require_subcommand(1);
  auto* split = dataset->add_subcommand("split", "Build samples and assign train/dev/test");
  split->add_option("--color", o.color_typical, "Typical color labels")->check(CLI::ExistingFile);
  split->add_option("--size", o.size_relations, "Size relations")->check(CLI::ExistingFile);
  split->add_option("--spatial", o.spatial_typical, "Typical spatial labels")->check(CLI::ExistingFile);
  add_split_flags(split, o);
  add_output(split, o);

  // prompts
  auto* prompts = app.add_subcommand("prompts", "Prompt rendering");
  prompts->require_subcommand(1);
  auto* pemit = prompts->add_subcommand("emit", "Render one prompt per sample");
  pemit->add_option("--dataset", o.dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  pemit->add_option("--setting", o.setting, "ZS, FT or QA")->check(CLI::IsMember({"ZS", "FT", "QA"}));
  add_output(pemit, o);

  // eval
  auto* eval = app.add_subcommand("eval", "Scoring");
  eval->require_subcommand(1);
  auto* score_cmd = eval->add_subcommand("score", "R-Acc, Conf and macro-F1");
  auto* breakdown = eval->add_subcommand("breakdown", "R-Acc and Conf per gold-label cardinality");
  for (auto* c : {score_cmd, breakdown}) {
    c->add_option("--dataset", o.dataset, "Dataset file")->required()->check(CLI::ExistingFile);
    c->add_option("--predictions", o.predictions, "Predictions: id<TAB>label:prob ...")
        ->required()
        ->check(CLI::ExistingFile);
    c->add_option("--task", o.task, "Score only this task")->check(CLI::IsMember({"color", "size", "spatial"}));
    c->add_option("--split", o.split, "Score only this split")->check(CLI::IsMember({"train", "dev", "test"}));
    add_output(c, o);
  }
  score_cmd->add_option("--f1-threshold", o.f1_threshold, "Probability at which a class counts as predicted")
      ->check(CLI::Range(0.0, 1.0));

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic corpora");
  synth_cmd->require_subcommand(1);
  auto* generate = synth_cmd->add_subcommand("generate", "Write a seeded synthetic corpus");
  generate->add_option("--seed", o.run.seed, "Corpus seed");
  generate->add_option("--scenes", o.synth_scenes, "Number of scenes")->check(CLI::PositiveNumber);
  generate->add_option("--objects", o.synth_objects, "Objects per scene")->check(CLI::Range(2, 10));
  generate->add_option("--out", o.run.out_dir, "Output directory")->envname("VISPK_OUT_DIR")->required();

  // run
  auto* run = app.add_subcommand("run", "Full pipeline with manifest");
  add_scenes(run, o);
  run->add_option("--colors", o.run.colors, "Instance color text")->required()->check(CLI::ExistingFile);
  run->add_option("--embeddings", o.run.embeddings, "Embedding table")->required()->check(CLI::ExistingFile);
  run->add_option("--phrases", o.run.phrases, "Noun phrases")->check(CLI::ExistingFile);
  run->add_option("--kb", o.run.kb, "is-a edges")->check(CLI::ExistingFile);
  run->add_option("--out", o.run.out_dir, "Output directory")->envname("VISPK_OUT_DIR")->required();
  add_size_flags(run, o);
  add_spatial_flags(run, o);
  add_depth(run, o);
  add_split_flags(run, o);
  run->add_option("--f1-threshold", o.f1_threshold, "Recorded in the manifest for later scoring")
      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--setting", o.setting, "Prompt setting: ZS, FT or QA")->check(CLI::IsMember({"ZS", "FT", "QA"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  g_level = level == "info" ? Level::kInfo : level == "error" ? Level::kError : Level::kWarn;
  o.run.log_level = level;

  if (*validate) {
    const auto scenes = load_scenes(o.run.scenes);
    std::size_t objects = 0;
    for (const auto& s : scenes) objects += s.objects.size();
    if (!o.skip_depth) {
      const auto paths = depth_paths(o.run.scenes, scenes);
      for (std::size_t i = 0; i < scenes.size(); ++i) check_depth_matches(scenes[i], load_depth(paths[i], o.run.invert_depth));
    }
    std::cout << "ok\t" << scenes.size() << " scenes\t" << objects << " objects\n";
  } else if (*collect) {
    const auto scenes = load_scenes(o.run.scenes);
    const auto phrases = o.run.phrases.empty() ? std::vector<std::string>{} : lines_of(o.run.phrases);
    const auto kb = o.run.kb.empty() ? std::vector<KbEdge>{} : parse_kb_edges(lines_of(o.run.kb));
    emit(o.output, candidates_to_text(stage_candidates(scenes, phrases, kb)));
  } else if (*select) {
    const auto scenes = load_scenes(o.run.scenes);
    const auto cmap = parse_candidates(lines_of(o.candidates));
    emit(o.output, scenes_to_text(stage_annotate(scenes, cmap, load_embeddings(o.run.embeddings), o.run.jobs)));
  } else if (*color) {
    ColorAggregate agg = o.run.scenes.empty()
                             ? aggregate_colors(parse_color_observations(lines_of(o.run.colors)))
                             : stage_colors(load_scenes(o.run.scenes), parse_instance_colors(lines_of(o.run.colors)));
    if (!agg.omitted.empty()) info(std::to_string(agg.omitted.size()) + " objects had no mappable color");
    emit(o.output, distributions_to_text(agg.distributions));
  } else if (*size) {
    const auto scenes = load_scenes(o.run.scenes);
    const auto geo = stage_geometry(scenes, depth_paths(o.run.scenes, scenes), o.run.geometry(), true, false);
    emit(o.output, relations_to_text(finish_size(geo.size, o.run.min_support)));
  } else if (*spatial) {
    const auto scenes = load_scenes(o.run.scenes);
    const auto geo = stage_geometry(scenes, depth_paths(o.run.scenes, scenes), o.run.geometry(), false, true);
    emit(o.output, spatial_to_text(finish_spatial(geo.spatial)));
  } else if (*typ) {
    if (o.task == "color") {
      emit(o.output, typical_to_text(typicalize_all(parse_distributions(lines_of(o.input)))));
    } else {
      std::map<std::string, TypicalLabelSet> out;
      for (const auto& [k, t] : typicalize_all(parse_spatial(lines_of(o.input)))) out[spatial_key_string(k)] = t;
      emit(o.output, typical_to_text(out));
    }
  } else if (*split) {
    if (o.color_typical.empty() && o.size_relations.empty() && o.spatial_typical.empty())
      throw CLI::RequiredError("at least one of --color, --size, --spatial");
    std::map<std::string, TypicalLabelSet> color_t;
    if (!o.color_typical.empty()) color_t = parse_typical(lines_of(o.color_typical));
    std::vector<RelationRecord> size_r;
    if (!o.size_relations.empty()) size_r = parse_relations(lines_of(o.size_relations));
    std::map<SpatialKey, TypicalLabelSet> spatial_t;
    if (!o.spatial_typical.empty())
      for (auto& [k, t] : parse_typical(lines_of(o.spatial_typical))) spatial_t[parse_spatial_key(k)] = t;
    emit(o.output, dataset_to_text(stage_dataset(color_t, size_r, spatial_t, parse_ratios(o.ratios), o.run.seed)));
  } else if (*pemit) {
    emit(o.output, prompts_to_text(stage_prompts(parse_dataset(lines_of(o.dataset)), parse_setting(o.setting))));
  } else if (*score_cmd) {
    const auto samples = select_samples(o);
    emit(o.output, report_to_text(score(select_predictions(o, samples), samples, threshold_of(o))));
  } else if (*breakdown) {
    const auto samples = select_samples(o);
    emit(o.output, breakdown_to_text(cardinality_breakdown(select_predictions(o, samples), samples)));
  } else if (*generate) {
    synth::CorpusConfig cfg;
    cfg.seed = o.run.seed;
    cfg.scenes = o.synth_scenes;
    cfg.objects_per_scene = o.synth_objects;
    synth::write_corpus(o.run.out_dir, cfg);
    info("wrote " + std::to_string(cfg.scenes) + " scenes to " + o.run.out_dir);
  } else if (*run) {
    o.run.ratios = parse_ratios(o.ratios);
    o.run.setting = parse_setting(o.setting);
    o.run.f1_threshold = threshold_of(o);
    const auto result = run_pipeline(o.run);
    info("wrote " + std::to_string(result.files.size()) + " artifacts");
    std::cout << result.manifest_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const CLI::Error& e) {
    std::cerr << "vispk: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "vispk: error: " << e.what() << "\n";
    return 1;
  }
}
