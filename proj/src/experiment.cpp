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

#include "pscp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pscp/analysis.hpp"
#include "pscp/dump.hpp"
#include "pscp/errors.hpp"
#include "pscp/flow.hpp"
#include "pscp/vae.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pscp {

namespace {

// ---------------------------------------------------------------- config

void require_keys(const json& obj, const char* where,
                  std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError(std::string("config: unknown key '") + it.key() +
                        "' in " + where);
    }
  }
}

template <typename T>
void maybe(const json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::vector<double>> get_matrix(const json& j, const char* what) {
  auto m = j.get<std::vector<std::vector<double>>>();
  if (m.empty()) throw ConfigError(std::string("config: empty ") + what);
  for (const auto& row : m) {
    if (row.size() != m[0].size()) {
      throw ConfigError(std::string("config: ragged ") + what);
    }
  }
  return m;
}

}  // namespace

std::vector<std::vector<double>> PriorSpec::mode_means(std::size_t dim) const {
  if (means) {
    for (const auto& m : *means) {
      if (m.size() != dim) {
        throw ConfigError("config: prior mean dim does not match model dim");
      }
    }
    return *means;
  }
  // k modes spaced `distance` apart along the first axis, centered.
  std::vector<std::vector<double>> out(k, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    out[i][0] = (static_cast<double>(i) - static_cast<double>(k - 1) / 2.0) *
                distance;
  }
  return out;
}

MixturePrior PriorSpec::build(std::size_t dim) const {
  if (kind == "standard") return MixturePrior::standard_gaussian(dim);
  if (k < 1) throw ConfigError("config: prior.k must be >= 1");
  if (kind == "gaussian") return MixturePrior::gaussian(mode_means(dim), variance);
  if (kind == "gen_gaussian") {
    return MixturePrior::gen_gaussian_unit_var(mode_means(dim), beta);
  }
  throw ConfigError("config: unknown prior kind '" + kind + "'");
}

SyntheticSpec DataSpec::synthetic(std::size_t dim, std::uint64_t seed) const {
  SyntheticSpec spec;
  if (means) {
    spec.means = *means;
  } else {
    spec.means.assign(2, std::vector<double>(dim, 0.0));
    spec.means[0][0] = -3.5;
    spec.means[1][0] = 3.5;
  }
  if (variances) {
    spec.variances = *variances;
  } else {
    spec.variances.assign(spec.means.size(), std::vector<double>(dim, 1.0));
    for (auto& v : spec.variances) v[0] = 0.5;
  }
  if (spec.means.size() != spec.variances.size()) {
    throw ConfigError("config: data means/variances count mismatch");
  }
  for (const auto& m : spec.means) {
    if (m.size() != dim) {
      throw ConfigError("config: data mean dim does not match model dim");
    }
  }
  for (const auto& v : spec.variances) {
    if (v.size() != dim) {
      throw ConfigError("config: data variance dim does not match model dim");
    }
  }
  spec.n_per_component = n_per_component;
  spec.seed = seed;
  return spec;
}

ExperimentConfig parse_config(const std::string& json_text,
                              std::optional<std::uint64_t> seed_override) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  require_keys(j, "config",
               {"model", "prior", "data", "assignment", "train", "eval",
                "sweep_distances", "seed", "analysis"});

  ExperimentConfig cfg;
  try {
    if (j.contains("model")) {
      const json& m = j["model"];
      require_keys(m, "model", {"kind", "dim", "couplings", "hidden", "latent"});
      maybe(m, "kind", cfg.model.kind);
      maybe(m, "dim", cfg.model.dim);
      maybe(m, "couplings", cfg.model.couplings);
      maybe(m, "hidden", cfg.model.hidden);
      maybe(m, "latent", cfg.model.latent);
    }
    if (j.contains("prior")) {
      const json& p = j["prior"];
      require_keys(p, "prior",
                   {"kind", "k", "distance", "variance", "beta", "means"});
      maybe(p, "kind", cfg.prior.kind);
      maybe(p, "k", cfg.prior.k);
      maybe(p, "distance", cfg.prior.distance);
      maybe(p, "variance", cfg.prior.variance);
      maybe(p, "beta", cfg.prior.beta);
      if (p.contains("means")) cfg.prior.means = get_matrix(p["means"], "prior means");
    }
    if (j.contains("data")) {
      const json& d = j["data"];
      require_keys(d, "data",
                   {"means", "variances", "n_per_component", "ood_n", "ood_var",
                    "in_csv", "ood_csv"});
      if (d.contains("means")) cfg.data.means = get_matrix(d["means"], "data means");
      if (d.contains("variances")) {
        cfg.data.variances = get_matrix(d["variances"], "data variances");
      }
      maybe(d, "n_per_component", cfg.data.n_per_component);
      maybe(d, "ood_n", cfg.data.ood_n);
      maybe(d, "ood_var", cfg.data.ood_var);
      if (d.contains("in_csv")) cfg.data.in_csv = d["in_csv"].get<std::string>();
      if (d.contains("ood_csv")) cfg.data.ood_csv = d["ood_csv"].get<std::string>();
    }
    maybe(j, "assignment", cfg.assignment);
    if (j.contains("train")) {
      const json& t = j["train"];
      require_keys(t, "train", {"epochs", "batch", "lr", "beta1"});
      maybe(t, "epochs", cfg.train.epochs);
      maybe(t, "batch", cfg.train.batch);
      maybe(t, "lr", cfg.train.lr);
      maybe(t, "beta1", cfg.train.beta1);
    }
    if (j.contains("eval")) {
      const json& e = j["eval"];
      require_keys(e, "eval", {"bins", "iw_samples"});
      maybe(e, "bins", cfg.eval.bins);
      maybe(e, "iw_samples", cfg.eval.iw_samples);
    }
    if (j.contains("analysis")) {
      const json& a = j["analysis"];
      require_keys(a, "analysis", {"g", "sigma2_psi", "mean_image_samples"});
      maybe(a, "g", cfg.analysis.g);
      if (a.contains("sigma2_psi")) {
        cfg.analysis.sigma2_psi = a["sigma2_psi"].get<double>();
      }
      maybe(a, "mean_image_samples", cfg.analysis.mean_image_samples);
    }
    maybe(j, "sweep_distances", cfg.sweep_distances);
    maybe(j, "seed", cfg.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (cfg.model.kind != "flow" && cfg.model.kind != "vae") {
    throw ConfigError("config: model.kind must be 'flow' or 'vae'");
  }
  if (cfg.model.dim < 1) throw ConfigError("config: model.dim must be >= 1");
  if (cfg.assignment != "labels" && cfg.assignment != "kmeans" &&
      cfg.assignment != "none") {
    throw ConfigError("config: assignment must be labels, kmeans or none");
  }
  if (cfg.train.epochs < 1 || cfg.train.batch < 1) {
    throw ConfigError("config: train.epochs and train.batch must be >= 1");
  }
  if (cfg.eval.bins < 1) throw ConfigError("config: eval.bins must be >= 1");

  if (seed_override) cfg.seed = *seed_override;
  char seed_buf[32];
  std::snprintf(seed_buf, sizeof seed_buf, "%llu",
                static_cast<unsigned long long>(cfg.seed));
  char hash_buf[20];
  std::snprintf(hash_buf, sizeof hash_buf, "%016llx",
                static_cast<unsigned long long>(
                    fnv1a(j.dump() + "#" + seed_buf)));
  cfg.config_hash = hash_buf;
  return cfg;
}

ExperimentConfig load_config(const std::string& path,
                             std::optional<std::uint64_t> seed_override) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), seed_override);
}

// ------------------------------------------------------------- plumbing

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output dir '" + dir + "'");
}

Dataset load_in_data(const ExperimentConfig& cfg) {
  if (cfg.data.in_csv) return csv_read(*cfg.data.in_csv);
  return gen_mixture(
      cfg.data.synthetic(cfg.model.dim, derive_seed(cfg.seed, 0, "data-in")));
}

Dataset load_ood_data(const ExperimentConfig& cfg) {
  if (cfg.data.ood_csv) return csv_read(*cfg.data.ood_csv);
  return gen_ood(cfg.model.dim, derive_seed(cfg.seed, 0, "data-ood"),
                 cfg.data.ood_n, cfg.data.ood_var);
}

struct Stats {
  double mean = 0.0, stdev = 0.0, min = 0.0, max = 0.0;
};

Stats stats_of(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  s.min = s.max = v[0];
  for (double x : v) {
    s.mean += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.stdev += (x - s.mean) * (x - s.mean);
  s.stdev = v.size() > 1
                ? std::sqrt(s.stdev / static_cast<double>(v.size() - 1))
                : 0.0;
  return s;
}

json stats_json(const Stats& s, std::size_t n) {
  return {{"mean", s.mean}, {"std", s.stdev}, {"min", s.min},
          {"max", s.max}, {"n", n}};
}

void write_scalar_csv(const std::string& path, const char* col,
                      const std::vector<double>& v) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << col << "\n";
  char buf[40];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    f << buf << "\n";
  }
}

void write_matrix_csv(const std::string& path, const Tensor& m) {
  Dataset d;
  d.rows = m;
  csv_write(path, d);
}

json config_echo(const ExperimentConfig& cfg) {
  json j;
  j["model"] = {{"kind", cfg.model.kind},
                {"dim", cfg.model.dim},
                {"couplings", cfg.model.couplings},
                {"hidden", cfg.model.hidden},
                {"latent", cfg.latent_dim()}};
  j["prior"] = {{"kind", cfg.prior.kind},
                {"k", cfg.prior.kind == "standard" ? 1 : cfg.prior.k},
                {"distance", cfg.prior.distance},
                {"variance", cfg.prior.variance},
                {"beta", cfg.prior.beta}};
  j["assignment"] = cfg.assignment;
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch", cfg.train.batch},
                {"lr", cfg.train.lr},
                {"beta1", cfg.train.beta1}};
  j["eval"] = {{"bins", cfg.eval.bins}, {"iw_samples", cfg.eval.iw_samples}};
  j["seed"] = cfg.seed;
  return j;
}

ComponentAssignment make_assignment(const ExperimentConfig& cfg,
                                    const Dataset& data,
                                    const MixturePrior& prior) {
  if (cfg.assignment == "labels") {
    return assign_components(data, AssignMode::kLabels);
  }
  if (cfg.assignment == "kmeans") {
    return assign_components(data, AssignMode::kKMeans, prior.num_components(),
                             derive_seed(cfg.seed, 0, "kmeans"));
  }
  throw ConfigError(
      "config: a mixture prior requires assignment 'labels' or 'kmeans'");
}

TrainConfig train_config(const ExperimentConfig& cfg) {
  TrainConfig tc;
  tc.epochs = cfg.train.epochs;
  tc.batch = cfg.train.batch;
  tc.adam.lr = cfg.train.lr;
  tc.adam.beta1 = cfg.train.beta1;
  tc.seed = derive_seed(cfg.seed, 0, "train");
  return tc;
}

struct TrainedModel {
  std::optional<FlowModel> flow;
  std::optional<VaeModel> vae;
  TrainResult result;
};

TrainedModel train_from_config(const ExperimentConfig& cfg) {
  const Dataset data = load_in_data(cfg);
  if (data.dim() != cfg.model.dim) {
    throw ConfigError("train: data dim does not match model dim");
  }
  const MixturePrior prior = cfg.prior.build(cfg.latent_dim());
  std::optional<ComponentAssignment> assign;
  if (prior.num_components() > 1) {
    assign = make_assignment(cfg, data, prior);
  }
  const TrainConfig tc = train_config(cfg);
  TrainedModel out;
  if (cfg.model.kind == "flow") {
    if (cfg.latent_dim() != cfg.model.dim) {
      throw ConfigError("train: a flow's latent dim equals its data dim");
    }
    FlowConfig fc;
    fc.dim = cfg.model.dim;
    fc.n_couplings = cfg.model.couplings;
    fc.hidden = cfg.model.hidden;
    FlowModel model = FlowModel::init(fc, derive_seed(cfg.seed, 0, "init"));
    out.result =
        train_flow(model, prior, data, assign ? &*assign : nullptr, tc);
    out.flow = std::move(model);
  } else {
    VaeConfig vc;
    vc.dim = cfg.model.dim;
    vc.latent = cfg.latent_dim();
    vc.hidden = cfg.model.hidden;
    VaeModel model = VaeModel::init(vc, derive_seed(cfg.seed, 0, "init"));
    out.result =
        train_vae(model, prior, data, assign ? &*assign : nullptr, tc);
    out.vae = std::move(model);
  }
  return out;
}

struct LoadedModel {
  std::optional<FlowModel> flow;
  std::optional<VaeModel> vae;

  std::size_t data_dim() const {
    return flow ? flow->cfg.dim : vae->cfg.dim;
  }
  std::size_t latent_dim() const {
    return flow ? flow->cfg.dim : vae->cfg.latent;
  }
  Tensor latents(const Tensor& x) const {
    return flow ? flow_forward(*flow, x).z : vae_encode_mean(*vae, x);
  }
  std::vector<double> log_likelihood(const MixturePrior& prior,
                                     const Tensor& x, std::size_t iw_samples,
                                     std::uint64_t seed) const {
    if (flow) return flow_log_likelihood(*flow, prior, x);
    return vae_iw_log_likelihood(*vae, prior, x, iw_samples, seed);
  }
};

LoadedModel load_model(const std::string& path) {
  LoadedModel m;
  if (peek_dump_kind(path) == DumpKind::kFlow) {
    m.flow = load_flow(path);
  } else {
    m.vae = load_vae(path);
  }
  return m;
}

json histogram_json(const std::vector<double>& a, const std::vector<double>& b,
                    std::size_t bins) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* v : {&a, &b}) {
    for (double x : *v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (!(hi > lo)) hi = lo + 1.0;
  const double w = (hi - lo) / static_cast<double>(bins);
  std::vector<double> edges(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    edges[i] = lo + w * static_cast<double>(i);
  }
  auto count = [&](const std::vector<double>& v) {
    std::vector<std::size_t> c(bins, 0);
    for (double x : v) {
      auto bin = static_cast<std::size_t>((x - lo) / w);
      ++c[std::min(bin, bins - 1)];
    }
    return c;
  };
  return {{"edges", edges}, {"in", count(a)}, {"ood", count(b)}};
}

void write_json(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << j.dump(2) << "\n";
}

}  // namespace

// ------------------------------------------------------------- commands

void cmd_gen_data(const ExperimentConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  const Dataset in = load_in_data(cfg);
  const Dataset ood = load_ood_data(cfg);
  if (in.dim() != ood.dim()) {
    throw ConfigError("gen-data: in/ood dim mismatch");
  }
  csv_write(out_dir + "/in.csv", in);
  csv_write(out_dir + "/ood.csv", ood);
  std::printf("in.csv: %zu rows, ood.csv: %zu rows\n", in.size(), ood.size());
}

void cmd_train(const ExperimentConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  TrainedModel trained = train_from_config(cfg);
  const std::string model_path = out_dir + "/model.pscp";
  if (trained.flow) {
    save_flow(model_path, *trained.flow);
  } else {
    save_vae(model_path, *trained.vae);
  }
  {
    std::ofstream f(out_dir + "/loss.csv");
    f << "epoch,loss\n";
    char buf[40];
    for (std::size_t i = 0; i < trained.result.loss_trace.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", trained.result.loss_trace[i]);
      f << i << "," << buf << "\n";
    }
  }
  std::printf("model: %s (final loss %.4f, hash %s)\n", model_path.c_str(),
              trained.result.loss_trace.back(), cfg.config_hash.c_str());
}

void cmd_eval(const ExperimentConfig& cfg, const std::string& model_path,
              const std::string& out_dir) {
  ensure_dir(out_dir);
  const LoadedModel model = load_model(model_path);
  const Dataset in = load_in_data(cfg);
  const Dataset ood = load_ood_data(cfg);
  if (model.data_dim() != in.dim() || model.data_dim() != ood.dim()) {
    throw ConfigError("eval: model dim conflicts with data dim");
  }
  const MixturePrior prior = cfg.prior.build(model.latent_dim());

  const std::vector<double> ll_in = model.log_likelihood(
      prior, in.rows, cfg.eval.iw_samples, derive_seed(cfg.seed, 0, "iw-in"));
  const std::vector<double> ll_ood = model.log_likelihood(
      prior, ood.rows, cfg.eval.iw_samples, derive_seed(cfg.seed, 0, "iw-ood"));
  write_scalar_csv(out_dir + "/ll_in.csv", "log_likelihood", ll_in);
  write_scalar_csv(out_dir + "/ll_ood.csv", "log_likelihood", ll_ood);
  write_matrix_csv(out_dir + "/latents_in.csv", model.latents(in.rows));
  write_matrix_csv(out_dir + "/latents_ood.csv", model.latents(ood.rows));

  json summary;
  summary["config_hash"] = cfg.config_hash;
  summary["config"] = config_echo(cfg);
  summary["in"] = stats_json(stats_of(ll_in), ll_in.size());
  summary["ood"] = stats_json(stats_of(ll_ood), ll_ood.size());
  summary["histogram"] = histogram_json(ll_in, ll_ood, cfg.eval.bins);
  // Final training NLL, when the model sits next to its loss trace.
  summary["train_final_nll"] = nullptr;
  {
    const fs::path loss = fs::path(model_path).parent_path() / "loss.csv";
    std::ifstream f(loss);
    std::string line, last;
    if (f) {
      std::getline(f, line);  // header
      while (std::getline(f, line)) {
        if (!line.empty()) last = line;
      }
      const auto comma = last.find(',');
      if (comma != std::string::npos) {
        summary["train_final_nll"] = std::stod(last.substr(comma + 1));
      }
    }
  }
  write_json(out_dir + "/summary.json", summary);
  std::printf("mean ll: in %.4f, ood %.4f\n", stats_of(ll_in).mean,
              stats_of(ll_ood).mean);
}

void cmd_sweep_distance(const ExperimentConfig& cfg,
                        const std::string& out_dir) {
  if (cfg.sweep_distances.size() < 2) {
    throw ConfigError("sweep-distance: need at least 2 distances");
  }
  ensure_dir(out_dir);
  std::ofstream f(out_dir + "/sweep.csv");
  if (!f) throw ConfigError("cannot write sweep.csv");
  f << "prior_kind,distance,mean_ll_in,mean_ll_ood,status\n";
  std::size_t run = 0;
  for (const char* family : {"gaussian", "gen_gaussian"}) {
    for (double d : cfg.sweep_distances) {
      ExperimentConfig run_cfg = cfg;
      run_cfg.prior.kind = family;
      run_cfg.prior.k = 2;
      run_cfg.prior.distance = d;
      run_cfg.prior.means.reset();
      run_cfg.seed = derive_seed(cfg.seed, run, "sweep");
      ++run;
      try {
        TrainedModel trained = train_from_config(run_cfg);
        LoadedModel model;
        model.flow = std::move(trained.flow);
        model.vae = std::move(trained.vae);
        const Dataset in = load_in_data(run_cfg);
        const Dataset ood = load_ood_data(run_cfg);
        const MixturePrior prior = run_cfg.prior.build(model.latent_dim());
        const Stats s_in = stats_of(model.log_likelihood(
            prior, in.rows, cfg.eval.iw_samples,
            derive_seed(run_cfg.seed, 0, "iw-in")));
        const Stats s_ood = stats_of(model.log_likelihood(
            prior, ood.rows, cfg.eval.iw_samples,
            derive_seed(run_cfg.seed, 0, "iw-ood")));
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,ok\n", family, d,
                      s_in.mean, s_ood.mean);
        f << buf;
      } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        f << family << "," << d << ",nan,nan,error: " << msg << "\n";
      }
      f.flush();
    }
  }
}

void cmd_analyze(const ExperimentConfig& cfg, const std::string& model_path,
                 const std::string& out_dir) {
  ensure_dir(out_dir);
  const LoadedModel model = load_model(model_path);
  const Dataset in = load_in_data(cfg);
  const Dataset ood = load_ood_data(cfg);
  if (model.data_dim() != in.dim() || model.data_dim() != ood.dim()) {
    throw ConfigError("analyze: model dim conflicts with data dim");
  }
  const MixturePrior prior = cfg.prior.build(model.latent_dim());
  if (prior.num_components() < 2) {
    throw ConfigError("analyze: needs a mixture prior");
  }

  const Tensor lat_in = model.latents(in.rows);
  const Tensor lat_ood = model.latents(ood.rows);
  const ComponentAssignment a_in = allocate_nearest(lat_in, prior);
  const ComponentAssignment a_ood = allocate_nearest(lat_ood, prior);

  std::vector<std::vector<double>> mean_images;
  for (std::size_t i = 0; i < prior.num_components(); ++i) {
    const std::uint64_t seed = derive_seed(cfg.seed, i, "mean-image");
    const std::size_t ns = cfg.analysis.mean_image_samples;
    MeanImage mi = model.flow
                       ? component_mean_image(*model.flow, prior, i, ns, seed)
                       : component_mean_image(*model.vae, prior, i, ns, seed);
    mean_images.push_back(mi.sampled);
  }
  const ComponentStats st_in = component_sigma(in, a_in, mean_images);
  const ComponentStats st_ood = component_sigma(ood, a_ood, mean_images);

  const double sigma2_psi =
      cfg.analysis.sigma2_psi.value_or(prior.component_variance());
  ChannelFactors factors = ChannelFactors::unit(in.dim());
  for (double& g : factors.g) g = cfg.analysis.g;
  const SecondOrderReport rep =
      second_order_report(st_in, st_ood, factors, sigma2_psi);

  const ForceOutResult fo_in = latent_forceout(lat_in, prior);
  const ForceOutResult fo_ood = latent_forceout(lat_ood, prior);

  auto stats_to_json = [](const ComponentStats& st) {
    json j;
    j["w"] = st.w;
    j["n"] = st.n;
    j["mean_image"] = st.mean_image;
    j["sigma2"] = json::array();
    for (std::size_t i = 0; i < st.k(); ++i) {
      if (st.occupied(i)) {
        j["sigma2"].push_back(st.sigma2[i]);
      } else {
        j["sigma2"].push_back(nullptr);
      }
    }
    return j;
  };

  json rep_json;
  rep_json["config_hash"] = cfg.config_hash;
  rep_json["sigma2_psi"] = sigma2_psi;
  rep_json["delta"] = rep.delta;
  if (rep.has_bound) {
    rep_json["bound"] = rep.bound;
    rep_json["argmax_pair"] = {rep.argmax_out, rep.argmax_in};
  } else {
    rep_json["bound"] = nullptr;
    rep_json["note"] = "bound skipped: empty component";
  }
  rep_json["in_stats"] = stats_to_json(st_in);
  rep_json["ood_stats"] = stats_to_json(st_ood);
  rep_json["forceout"] = {{"in_fraction", fo_in.fraction},
                          {"ood_fraction", fo_ood.fraction}};
  rep_json["allocation_latent"] = "flow forward / vae posterior mean";
  write_json(out_dir + "/report.json", rep_json);

  // Per-dim sigma2 tables, one row per occupied component.
  for (const auto& [name, st] : {std::pair<const char*, const ComponentStats&>(
                                     "sigma_in.csv", st_in),
                                 {"sigma_ood.csv", st_ood}}) {
    std::ofstream sf(out_dir + "/" + name);
    sf << "component";
    for (std::size_t j = 0; j < in.dim(); ++j) sf << ",sigma2_" << j;
    sf << "\n";
    char buf[40];
    for (std::size_t i = 0; i < st.k(); ++i) {
      if (!st.occupied(i)) continue;
      sf << i;
      for (std::size_t j = 0; j < in.dim(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", st.sigma2[i][j]);
        sf << "," << buf;
      }
      sf << "\n";
    }
  }
  std::printf("delta %.4f%s\n", rep.delta,
              rep.has_bound ? "" : " (bound skipped)");
}

void cmd_kmeans(const ExperimentConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  const Dataset data = load_in_data(cfg);
  const std::size_t k = cfg.prior.kind == "standard" ? 1 : cfg.prior.k;
  const KMeansResult km =
      kmeans(data, k, derive_seed(cfg.seed, 0, "kmeans"));
  write_matrix_csv(out_dir + "/centroids.csv", km.centroids);
  {
    std::ofstream f(out_dir + "/assignment.csv");
    f << "row,cluster\n";
    for (std::size_t i = 0; i < km.assignment.index.size(); ++i) {
      f << i << "," << km.assignment.index[i] << "\n";
    }
  }
  json j = {{"config_hash", cfg.config_hash},
            {"k", k},
            {"inertia", km.inertia},
            {"iterations", km.iterations}};
  write_json(out_dir + "/kmeans.json", j);
  std::printf("k=%zu inertia %.4f in %zu iterations\n", k, km.inertia,
              km.iterations);
}

}  // namespace pscp
