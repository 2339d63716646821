/*
 * Copyright 2026 The Emova Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Train/generate/evaluate pipeline for emotionally matched music synthesis
// from video frames.
//
// Exit codes: 0 success, 2 validation error, 3 I/O error, 4 numeric failure.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "emova/config.hpp"
#include "emova/errors.hpp"
#include "emova/evaluation.hpp"
#include "emova/fixture.hpp"
#include "emova/pipeline.hpp"

namespace {

using namespace emova;

struct GlobalOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool verbose = false;
};

// Precedence: defaults < manifest "config" < --config file < --seed flag.
pipeline::PipelineConfig resolve_config(const GlobalOpts& opts,
                                        const nlohmann::json& manifest_overrides) {
  pipeline::PipelineConfig cfg;
  if (!manifest_overrides.is_null()) pipeline::apply_overrides(cfg, manifest_overrides);
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw IoError("cannot open config file: " + opts.config_path);
    nlohmann::json file_json;
    try {
      in >> file_json;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("config file " + opts.config_path + ": " + e.what());
    }
    pipeline::apply_overrides(cfg, file_json);
  }
  if (opts.seed_set) cfg.seed = opts.seed;
  return cfg;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"emotional video-to-audio pipeline"};
  app.require_subcommand(1);

  GlobalOpts opts;
  app.add_option("--config", opts.config_path, "JSON config override file")->expected(1);
  app.add_option("--seed", opts.seed, "pipeline seed")->each([&](const std::string&) {
    opts.seed_set = true;
  });
  app.add_flag("--verbose", opts.verbose, "chatty progress on stderr");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "extract features from a dataset manifest");
  std::string ingest_manifest, ingest_out;
  ingest->add_option("--manifest", ingest_manifest, "dataset manifest JSON")->required();
  ingest->add_option("--out", ingest_out, "feature store output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "train classifier, sequence models, dictionaries");
  std::string train_store, train_out;
  train->add_option("--store", train_store, "feature store directory")->required();
  train->add_option("--out", train_out, "model bundle output directory")->required();

  // generate
  auto* generate = app.add_subcommand("generate", "synthesize audio for a frame sequence");
  std::string gen_bundle, gen_frames, gen_out;
  double gen_fps = 0.0;
  generate->add_option("--bundle", gen_bundle, "model bundle directory")->required();
  generate->add_option("--frames", gen_frames, "directory of numbered .ppm frames")->required();
  generate->add_option("--fps", gen_fps, "frame rate of the sequence")->required();
  generate->add_option("--out", gen_out, "output WAV path")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "generate and score every manifest clip");
  std::string eval_bundle, eval_manifest, eval_out;
  evaluate->add_option("--bundle", eval_bundle, "model bundle directory")->required();
  evaluate->add_option("--manifest", eval_manifest, "dataset manifest JSON")->required();
  evaluate->add_option("--out", eval_out, "report output directory")->required();

  // mos-stats
  auto* mos = app.add_subcommand("mos-stats", "mean ± stddev per sample and axis from a CSV");
  std::string mos_csv;
  mos->add_option("--scores", mos_csv, "CSV with header sample_id,axis,score")->required();

  // synth-fixture
  auto* fixture = app.add_subcommand("synth-fixture", "write a synthetic labeled dataset");
  std::string fixture_out;
  int fixture_clips = 2;
  fixture->add_option("--out", fixture_out, "output directory")->required();
  fixture->add_option("--clips-per-quadrant", fixture_clips, "clips per emotion quadrant");

  // inspect-bundle
  auto* inspect = app.add_subcommand("inspect-bundle", "print bundle metadata");
  std::string inspect_bundle;
  inspect->add_option("--bundle", inspect_bundle, "model bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage message
    return 2;
  }

  if (ingest->parsed()) {
    const auto manifest = pipeline::load_manifest(ingest_manifest);
    const auto cfg = resolve_config(opts, manifest.config_overrides);
    const auto store = pipeline::ingest(manifest, cfg, opts.verbose);
    pipeline::save_store(store, ingest_out);
    std::size_t segments = 0;
    for (const auto& clip : store.clips) segments += clip.segments.size();
    std::cout << "ingested " << store.clips.size() << " clips, " << segments
              << " segments into " << ingest_out << "\n";
    return 0;
  }

  if (train->parsed()) {
    const auto store = pipeline::load_store(train_store);
    const auto cfg = resolve_config(opts, nlohmann::json());
    pipeline::TrainSummary summary;
    const auto bundle = pipeline::train(store, cfg, opts.verbose, &summary);
    pipeline::save_bundle(bundle, train_out);
    std::printf("anfis train accuracy: %.1f%%\n", summary.anfis_accuracy * 100.0);
    for (const auto& [q, loss] : summary.lstm_final_loss)
      std::printf("lstm %s final loss: %.3g\n", anfis::quadrant_name(q), loss);
    std::cout << "bundle written to " << train_out << "\n";
    return 0;
  }

  if (generate->parsed()) {
    const auto bundle = pipeline::load_bundle(gen_bundle);
    const auto result = pipeline::generate_to_files(bundle, gen_frames, gen_fps, gen_out);
    std::cout << "quadrant: " << anfis::quadrant_name(result.quadrant) << "\n"
              << "steps: " << result.report.steps.size() << "\n"
              << "wav: " << result.wav_path << "\n"
              << "report: " << result.report_path << "\n";
    return 0;
  }

  if (evaluate->parsed()) {
    const auto bundle = pipeline::load_bundle(eval_bundle);
    const auto manifest = pipeline::load_manifest(eval_manifest);
    const auto result = pipeline::evaluate_manifest(bundle, manifest, eval_out, opts.verbose);
    std::printf("%-24s %s\n", "clip", "spectrogram_mae");
    for (const auto& clip : result.clips)
      std::printf("%-24s %.3f\n", clip.id.c_str(), clip.spectrogram_mae);
    std::printf("%-24s %.3f\n", "mean", result.mean_mae);
    return 0;
  }

  if (mos->parsed()) {
    std::cout << pipeline::mos_stats_from_csv(mos_csv);
    return 0;
  }

  if (fixture->parsed()) {
    pipeline::FixtureSpec spec;
    spec.clips_per_quadrant = fixture_clips;
    pipeline::write_fixture(fixture_out, opts.seed_set ? opts.seed : 0, spec);
    std::cout << "fixture written to " << fixture_out << "\n";
    return 0;
  }

  if (inspect->parsed()) {
    const auto bundle = pipeline::load_bundle(inspect_bundle);
    std::cout << "format_version: " << bundle.format_version << "\n";
    std::printf("anfis train accuracy: %.1f%%\n", bundle.anfis_train_accuracy * 100.0);
    for (const auto& [q, model] : bundle.lstms) {
      const auto& dict = bundle.dictionaries.at(q);
      std::cout << "quadrant " << anfis::quadrant_name(q) << ": lstm "
                << model.layer1.hidden_size << "/" << model.layer2.hidden_size << " units, "
                << dict.entries.size() << " dictionary entries\n";
    }
    std::cout << "config: " << pipeline::config_to_json(bundle.config).dump() << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
