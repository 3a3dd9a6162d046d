// Copyright 2026 The pscp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pscp/errors.hpp"
#include "pscp/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string model_path;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_model) {
  cmd->add_option("--config", args.config_path, "experiment config JSON")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "master seed override");
  if (needs_model) {
    cmd->add_option("--model", args.model_path, "parameter dump path")
        ->required();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pscp: trains small generative models with fixed priors on synthetic "
      "data and measures out-of-distribution likelihoods"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* gen = app.add_subcommand("gen-data", "write in/ood CSV datasets");
  add_common(gen, args, false);
  CLI::App* train = app.add_subcommand("train", "train a model, dump params");
  add_common(train, args, false);
  CLI::App* eval = app.add_subcommand("eval", "likelihoods and latents");
  add_common(eval, args, true);
  CLI::App* sweep =
      app.add_subcommand("sweep-distance", "train/eval across mode spacings");
  add_common(sweep, args, false);
  CLI::App* analyze =
      app.add_subcommand("analyze", "second-order likelihood-gap report");
  add_common(analyze, args, true);
  CLI::App* km = app.add_subcommand("kmeans", "cluster the training data");
  add_common(km, args, false);

  CLI11_PARSE(app, argc, argv);

  try {
    const pscp::ExperimentConfig cfg =
        pscp::load_config(args.config_path, args.seed);
    if (gen->parsed()) pscp::cmd_gen_data(cfg, args.out_dir);
    if (train->parsed()) pscp::cmd_train(cfg, args.out_dir);
    if (eval->parsed()) pscp::cmd_eval(cfg, args.model_path, args.out_dir);
    if (sweep->parsed()) pscp::cmd_sweep_distance(cfg, args.out_dir);
    if (analyze->parsed()) {
      pscp::cmd_analyze(cfg, args.model_path, args.out_dir);
    }
    if (km->parsed()) pscp::cmd_kmeans(cfg, args.out_dir);
  } catch (const pscp::NumericFailure& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 2;
  } catch (const pscp::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const pscp::ShapeError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  }
  return 0;
}
