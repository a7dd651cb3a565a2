// Command-line front end. Talks to the library only through the C API.
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rfaug/rfaug.h"

namespace {

struct Failure {
  std::string stage;
  rfaug_status status;
};

void check(const std::string& stage, rfaug_status status) {
  if (status != RFAUG_OK) throw Failure{stage, status};
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

const uint64_t* opt(const std::optional<uint64_t>& v) { return v ? &*v : nullptr; }

struct ModelHandle {
  rfaug_model* p = nullptr;
  ~ModelHandle() { rfaug_model_free(p); }
};

void print_progress(const char* message, void*) { std::fprintf(stderr, "%s\n", message); }

void print_epoch(const rfaug_epoch_stats* s, void*) {
  std::fprintf(stderr, "epoch %zu: loss %.6f, accuracy %.4f\n", s->epoch, s->mean_loss, s->accuracy);
}

const char* policy_name(rfaug_policy p) {
  switch (p) {
    case RFAUG_POLICY_NOAUG: return "NoAug";
    case RFAUG_POLICY_UNIFORM_TDL: return "UniformTdl";
    case RFAUG_POLICY_UNIFORM_CDL: return "UniformCdl";
    case RFAUG_POLICY_5G_ONLY_CDL: return "FiveGOnlyCdl";
    case RFAUG_POLICY_WIFI_ONLY_TDL: return "WifiOnlyTdl";
    case RFAUG_POLICY_DECOUPLED_CDL_TDL: return "DecoupledCdlTdl";
  }
  return "?";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RF fingerprinting channel-augmentation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rfaug_version());

  std::string config, out, manifest, model_path, policy;
  std::optional<uint64_t> seed;
  std::vector<uint64_t> seeds;

  auto* synth = app.add_subcommand("synth", "Synthesize Day-1/Day-2 captures and manifests");
  synth->add_option("--config", config, "Experiment config (INI)")->check(CLI::ExistingFile);
  synth->add_option("--seed", seed, "Master seed (default: first seed in the config)");
  synth->add_option("--out", out, "Output directory")->required();

  auto* augment = app.add_subcommand("augment", "Expand a Day-1 manifest with channel-augmented copies");
  augment->add_option("--manifest", manifest, "Input manifest")->required()->check(CLI::ExistingFile);
  augment->add_option("--config", config, "Augmentation plan (INI, [plan] section)")->check(CLI::ExistingFile);
  augment->add_option("--policy", policy, "Override the plan's policy");
  augment->add_option("--seed", seed, "Override the plan's master seed");
  augment->add_option("--out", out, "Output directory (manifest.csv and aug/)")->required();

  auto* train = app.add_subcommand("train", "Train the classifier on every window of a manifest");
  train->add_option("--manifest", manifest, "Training manifest")->required()->check(CLI::ExistingFile);
  train->add_option("--config", config, "Network config (INI, [net] section)")->check(CLI::ExistingFile);
  train->add_option("--seed", seed, "Override the network seed");
  train->add_option("--out", out, "Model file to write")->required();

  auto* eval = app.add_subcommand("eval", "Score a model on a manifest");
  eval->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  eval->add_option("--manifest", manifest, "Test manifest")->required()->check(CLI::ExistingFile);

  auto* experiment = app.add_subcommand("experiment", "Run every policy over every seed and write results");
  experiment->add_option("--config", config, "Experiment config (INI)")->check(CLI::ExistingFile);
  experiment->add_option("--seed", seeds, "Master seed; repeat to run several (default: config seeds)");
  experiment->add_option("--out", out, "Output directory (default: config out_dir)");

  auto* features = app.add_subcommand("features", "Export penultimate-layer activations as CSV");
  features->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  features->add_option("--manifest", manifest, "Manifest to embed")->required()->check(CLI::ExistingFile);
  features->add_option("--out", out, "CSV file to write")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      check("synth", rfaug_synth(opt(config), opt(seed), out.c_str()));
      std::printf("wrote %s/manifest_day1.csv and %s/manifest_day2.csv\n", out.c_str(), out.c_str());
    } else if (*augment) {
      check("augment", rfaug_augment(manifest.c_str(), opt(config), opt(policy), opt(seed), out.c_str()));
      std::printf("wrote %s/manifest.csv\n", out.c_str());
    } else if (*train) {
      ModelHandle m;
      check("train", rfaug_model_train(manifest.c_str(), opt(config), opt(seed), print_epoch, nullptr, &m.p));
      check("train", rfaug_model_save(m.p, out.c_str()));
      std::printf("wrote %s\n", out.c_str());
    } else if (*eval) {
      ModelHandle m;
      check("eval", rfaug_model_load(model_path.c_str(), &m.p));
      const std::size_t n = rfaug_model_num_classes(m.p);
      std::vector<std::size_t> confusion(n * n);
      double accuracy = 0.0;
      std::size_t total = 0;
      check("eval", rfaug_model_evaluate(m.p, manifest.c_str(), &accuracy, &total, confusion.data()));
      std::printf("accuracy %.6f over %zu windows\nconfusion (rows: true class)\n", accuracy, total);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) std::printf("%s%zu", j ? " " : "", confusion[i * n + j]);
        std::printf("\n");
      }
    } else if (*experiment) {
      rfaug_result_row rows[8];
      std::size_t count = 0;
      check("experiment", rfaug_experiment_run(opt(config), seeds.data(), seeds.size(), opt(out), print_progress,
                                               nullptr, rows, 8, &count));
      std::printf("policy,day1_acc,day2_acc\n");
      for (std::size_t i = 0; i < count && i < 8; ++i) {
        std::printf("%s,%.6f,%.6f\n", policy_name(rows[i].policy), rows[i].day1_acc, rows[i].day2_acc);
      }
    } else if (*features) {
      ModelHandle m;
      check("features", rfaug_model_load(model_path.c_str(), &m.p));
      check("features", rfaug_model_export_features(m.p, manifest.c_str(), out.c_str()));
      std::printf("wrote %s\n", out.c_str());
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "rfaug %s: %s error: %s\n", f.stage.c_str(), rfaug_status_name(f.status),
                 rfaug_last_error());
    return static_cast<int>(f.status);
  }
  return 0;
}
