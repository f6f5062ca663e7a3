#include "fedcorr/config.hpp"

#include <fstream>
#include <set>

#include "fedcorr/error.hpp"

namespace fedcorr {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw InvalidInput("config: " + path + ": " + what);
}

void check_keys(const json& j, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) fail(path + "." + key, "unknown key");
  }
}

const json& require(const json& j, const std::string& path,
                    const std::string& key) {
  if (!j.contains(key)) fail(path, "missing required key '" + key + "'");
  return j.at(key);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::size_t as_count(const json& j, const std::string& path) {
  if (!j.is_number_unsigned()) fail(path, "expected a non-negative integer");
  return j.get<std::size_t>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

void parse_partition(const json& j, FedConfig& fed) {
  check_keys(j, "partition", {"kind", "labels_per_client"});
  const std::string kind = as_string(require(j, "partition", "kind"),
                                     "partition.kind");
  if (kind == "iid") {
    fed.partition = PartitionKind::kIid;
    if (j.contains("labels_per_client"))
      fail("partition.labels_per_client", "only valid for label_limited");
  } else if (kind == "label_limited") {
    fed.partition = PartitionKind::kLabelLimited;
    fed.labels_per_client = as_count(
        require(j, "partition", "labels_per_client"),
        "partition.labels_per_client");
  } else {
    fail("partition.kind", "unknown partition '" + kind + "'");
  }
}

void parse_model(const json& j, ModelSpec& model) {
  check_keys(j, "model",
             {"kind", "input_dim", "hidden", "classes", "slice_rows"});
  const std::string kind = as_string(require(j, "model", "kind"), "model.kind");
  model.input_dim = as_count(require(j, "model", "input_dim"),
                             "model.input_dim");
  if (kind == "linreg") {
    model.kind = ModelSpec::Kind::kLinReg;
  } else if (kind == "logreg") {
    model.kind = ModelSpec::Kind::kLogReg;
  } else if (kind == "mlp") {
    model.kind = ModelSpec::Kind::kMlp;
    model.hidden = as_count(require(j, "model", "hidden"), "model.hidden");
    model.classes = as_count(require(j, "model", "classes"), "model.classes");
    if (model.hidden == 0 || model.classes == 0)
      fail("model", "hidden and classes must be positive");
  } else {
    fail("model.kind", "unknown model '" + kind + "'");
  }
  if (j.contains("slice_rows")) {
    if (kind == "mlp") fail("model.slice_rows", "mlp layers fix their slicing");
    model.slice_rows = as_count(j.at("slice_rows"), "model.slice_rows");
  }
  if (model.input_dim == 0) fail("model.input_dim", "must be positive");
}

void parse_dataset(const json& j, DatasetSpec& ds) {
  const std::string kind = as_string(require(j, "dataset", "kind"),
                                     "dataset.kind");
  if (kind == "synth_linreg") {
    check_keys(j, "dataset", {"kind", "samples", "dim", "noise", "seed"});
    ds.kind = DatasetSpec::Kind::kSynthLinreg;
    ds.samples = as_count(require(j, "dataset", "samples"), "dataset.samples");
    ds.dim = as_count(require(j, "dataset", "dim"), "dataset.dim");
    ds.noise = as_number(require(j, "dataset", "noise"), "dataset.noise");
  } else if (kind == "synth_logreg") {
    check_keys(j, "dataset", {"kind", "samples", "dim", "margin", "seed"});
    ds.kind = DatasetSpec::Kind::kSynthLogreg;
    ds.samples = as_count(require(j, "dataset", "samples"), "dataset.samples");
    ds.dim = as_count(require(j, "dataset", "dim"), "dataset.dim");
    ds.margin = as_number(require(j, "dataset", "margin"), "dataset.margin");
  } else if (kind == "synth_digits") {
    check_keys(j, "dataset",
               {"kind", "samples", "side", "classes", "noise", "seed"});
    ds.kind = DatasetSpec::Kind::kSynthDigits;
    ds.samples = as_count(require(j, "dataset", "samples"), "dataset.samples");
    ds.side = as_count(require(j, "dataset", "side"), "dataset.side");
    ds.classes = as_count(require(j, "dataset", "classes"), "dataset.classes");
    ds.noise = as_number(require(j, "dataset", "noise"), "dataset.noise");
  } else if (kind == "libsvm") {
    check_keys(j, "dataset", {"kind", "path", "dim"});
    ds.kind = DatasetSpec::Kind::kLibsvm;
    ds.path = as_string(require(j, "dataset", "path"), "dataset.path");
    ds.dim = as_count(require(j, "dataset", "dim"), "dataset.dim");
  } else if (kind == "idx") {
    check_keys(j, "dataset", {"kind", "images", "labels"});
    ds.kind = DatasetSpec::Kind::kIdx;
    ds.images = as_string(require(j, "dataset", "images"), "dataset.images");
    ds.labels = as_string(require(j, "dataset", "labels"), "dataset.labels");
  } else {
    fail("dataset.kind", "unknown dataset '" + kind + "'");
  }
  if (j.contains("seed")) ds.seed = as_count(j.at("seed"), "dataset.seed");
}

void parse_scheme(const json& j, FedConfig& fed) {
  const std::string kind = as_string(require(j, "scheme", "kind"),
                                     "scheme.kind");
  const std::set<std::string> ada_keys{"kind",   "update_period",
                                       "alpha",  "beta",
                                       "memory", "residual_fraction"};
  auto read_ada = [&](AdaConfig& ada) {
    if (j.contains("update_period"))
      ada.update_period = as_count(j.at("update_period"),
                                   "scheme.update_period");
    if (j.contains("alpha")) ada.alpha = as_number(j.at("alpha"), "scheme.alpha");
    if (j.contains("beta")) ada.beta = as_number(j.at("beta"), "scheme.beta");
    if (j.contains("memory"))
      ada.memory = as_count(j.at("memory"), "scheme.memory");
    if (j.contains("residual_fraction"))
      ada.residual_fraction =
          as_number(j.at("residual_fraction"), "scheme.residual_fraction");
  };

  if (kind == "none") {
    check_keys(j, "scheme", {"kind"});
    fed.scheme = Scheme::kNone;
  } else if (kind == "svdfed" || kind == "adasvdfed" || kind == "predictive") {
    check_keys(j, "scheme", ada_keys);
    fed.scheme = kind == "svdfed"      ? Scheme::kSvdFed
                 : kind == "adasvdfed" ? Scheme::kAdaSvdFed
                                       : Scheme::kPredictive;
    read_ada(fed.ada);
  } else if (kind == "pcafed") {
    check_keys(j, "scheme", {"kind", "update_period", "alpha", "beta",
                             "memory"});
    fed.scheme = Scheme::kPcaFed;
    if (j.contains("update_period"))
      fed.pca.update_period = as_count(j.at("update_period"),
                                       "scheme.update_period");
    if (j.contains("alpha"))
      fed.pca.alpha = as_number(j.at("alpha"), "scheme.alpha");
    if (j.contains("beta")) fed.pca.beta = as_number(j.at("beta"), "scheme.beta");
    if (j.contains("memory"))
      fed.pca.memory = as_count(j.at("memory"), "scheme.memory");
  } else {
    fail("scheme.kind", "unknown scheme '" + kind + "'");
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  check_keys(j, "$",
             {"seed", "rounds", "clients", "local_steps", "learning_rate",
              "momentum", "weight_decay", "val_fraction", "target_accuracy",
              "partition", "model", "dataset", "scheme", "probe"});

  ExperimentConfig cfg;
  cfg.fed.rounds = as_count(require(j, "$", "rounds"), "rounds");
  cfg.fed.clients = as_count(require(j, "$", "clients"), "clients");
  cfg.fed.local_steps = as_count(require(j, "$", "local_steps"), "local_steps");
  cfg.fed.learning_rate =
      as_number(require(j, "$", "learning_rate"), "learning_rate");
  if (j.contains("seed")) cfg.fed.seed = as_count(j.at("seed"), "seed");
  if (j.contains("momentum"))
    cfg.fed.momentum = as_number(j.at("momentum"), "momentum");
  if (j.contains("weight_decay"))
    cfg.fed.weight_decay = as_number(j.at("weight_decay"), "weight_decay");
  if (j.contains("val_fraction"))
    cfg.fed.val_fraction = as_number(j.at("val_fraction"), "val_fraction");
  if (j.contains("target_accuracy"))
    cfg.fed.target_accuracy =
        as_number(j.at("target_accuracy"), "target_accuracy");

  parse_partition(require(j, "$", "partition"), cfg.fed);
  parse_model(require(j, "$", "model"), cfg.model);
  parse_dataset(require(j, "$", "dataset"), cfg.dataset);
  parse_scheme(require(j, "$", "scheme"), cfg.fed);

  if (j.contains("probe")) {
    const json& p = j.at("probe");
    check_keys(p, "probe", {"beta", "window"});
    if (p.contains("beta"))
      cfg.fed.probe_beta = as_number(p.at("beta"), "probe.beta");
    if (p.contains("window"))
      cfg.fed.probe_window = as_count(p.at("window"), "probe.window");
  }

  cfg.fed.validate();

  // Cross-check dataset and model dimensions where they are statically
  // known; file-backed datasets are verified once loaded.
  switch (cfg.dataset.kind) {
    case DatasetSpec::Kind::kSynthLinreg:
    case DatasetSpec::Kind::kSynthLogreg:
    case DatasetSpec::Kind::kLibsvm:
      if (cfg.dataset.dim != cfg.model.input_dim)
        fail("dataset.dim", "does not match model.input_dim");
      break;
    case DatasetSpec::Kind::kSynthDigits:
      if (cfg.dataset.side * cfg.dataset.side != cfg.model.input_dim)
        fail("dataset.side", "side^2 does not match model.input_dim");
      break;
    case DatasetSpec::Kind::kIdx:
      break;
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_experiment_config(j);
}

LabeledDataset materialize_dataset(const DatasetSpec& spec,
                                   std::uint64_t default_seed) {
  const std::uint64_t seed = spec.seed.value_or(default_seed);
  switch (spec.kind) {
    case DatasetSpec::Kind::kSynthLinreg:
      return synth_linreg(spec.samples, spec.dim, spec.noise, seed);
    case DatasetSpec::Kind::kSynthLogreg:
      return synth_logreg(spec.samples, spec.dim, spec.margin, seed);
    case DatasetSpec::Kind::kSynthDigits: {
      const auto [images, labels] =
          synth_digits(spec.samples, spec.side, spec.classes, spec.noise, seed);
      return dataset_from_idx(images, labels);
    }
    case DatasetSpec::Kind::kLibsvm:
      return load_libsvm(spec.path, spec.dim);
    case DatasetSpec::Kind::kIdx:
      return dataset_from_idx(load_idx(spec.images), load_idx(spec.labels));
  }
  throw InvalidInput("dataset: unknown kind");
}

}  // namespace fedcorr
