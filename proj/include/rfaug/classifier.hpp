#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rfaug/config.hpp"
#include "rfaug/iq.hpp"
#include "rfaug/random.hpp"

namespace rfaug {

/// Conv1d(same padding) -> ReLU -> MaxPool(2), repeated `conv_stages` times
/// over a 2 x window_len (I, Q) input, then Dense(hidden) -> ReLU ->
/// Dense(num_classes) -> softmax.
struct NetConfig {
  std::size_t window_len = 256;
  std::size_t conv_stages = 2;
  std::size_t filters = 16;
  std::size_t kernel = 7;
  std::size_t hidden = 64;
  std::size_t num_classes = 4;
  std::size_t epochs = 16;
  std::size_t batch_size = 64;
  double learning_rate = 0.01;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

NetConfig net_config_from(const KvConfig& cfg, const std::string& section = "net");
void net_config_to(const NetConfig& net, KvConfig& cfg, const std::string& section = "net");

/// Offsets of each parameter block inside the flat parameter vector.
struct ParamLayout {
  struct Block {
    std::size_t offset;
    std::size_t size;

    friend bool operator==(const Block&, const Block&) = default;
  };
  std::vector<Block> conv_weights;  // [filters][in_channels][kernel]
  std::vector<Block> conv_biases;
  Block dense1_weights;  // [hidden][flat]
  Block dense1_bias;
  Block dense2_weights;  // [classes][hidden]
  Block dense2_bias;
  std::size_t flat_dim = 0;
  std::size_t total = 0;

  static ParamLayout of(const NetConfig& cfg);
  std::vector<Block> blocks() const;

  friend bool operator==(const ParamLayout&, const ParamLayout&) = default;
};

class Network {
 public:
  /// He-initialized weights and zero biases, drawn from cfg.seed.
  explicit Network(const NetConfig& cfg);
  Network(const NetConfig& cfg, std::vector<float> params);

  const NetConfig& config() const noexcept { return cfg_; }
  const ParamLayout& layout() const noexcept { return layout_; }
  std::span<const float> params() const noexcept { return params_; }
  std::span<float> params() noexcept { return params_; }

  std::vector<double> probabilities(std::span<const Sample> window) const;
  int predict(std::span<const Sample> window) const;
  /// Post-ReLU hidden activations (the penultimate layer).
  std::vector<float> features(std::span<const Sample> window) const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  NetConfig cfg_;
  ParamLayout layout_;
  std::vector<float> params_;
};

/// Power-normalized (I, Q) planes; a zero-power window stays zero.
std::vector<float> window_to_input(std::span<const Sample> window);

struct EpochLog {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double accuracy = 0.0;  // on the draws made during the epoch
};

struct TrainedModel {
  Network network;
  std::vector<EpochLog> log;
};

/// Mini-batch gradient descent on mean cross-entropy with class-balanced
/// sampling. Every class needs at least one example. Deterministic in cfg.seed.
TrainedModel train(std::span<const Example> train_set, const NetConfig& cfg);

/// Draw order used by train(): one epoch of len(train_set) indices. Each
/// round visits every class once in a fresh random order; within a class,
/// examples are drawn without replacement from a reshuffled pool.
class BalancedSampler {
 public:
  BalancedSampler(std::span<const Example> examples, std::size_t num_classes, std::uint64_t seed);
  std::vector<std::size_t> next_epoch();

 private:
  std::size_t draw_from(std::size_t cls);

  std::vector<std::vector<std::size_t>> by_class_;
  std::vector<std::size_t> cursor_;
  std::size_t epoch_len_;
  Rng rng_;
};

struct EvalReport {
  double accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<double> per_class_accuracy;         // 0 for classes absent from the set
  std::size_t total = 0;
};

EvalReport evaluate(const Network& net, std::span<const Example> test_set);

/// Max relative error between back-propagated and central-difference
/// (step 1e-4) gradients of the mean loss over `probe_batch`, sampled across
/// every parameter block. Relative error is |a - n| / max(|a| + |n|, 1e-8).
double gradient_check(const NetConfig& cfg, std::span<const Example> probe_batch,
                      std::size_t samples_per_block = 24);

/// Analytic gradient of the mean loss, double precision. Exposed for tests.
std::vector<double> loss_gradient(const NetConfig& cfg, std::span<const double> params,
                                  std::span<const Example> batch, double* loss_out = nullptr);
double mean_loss(const NetConfig& cfg, std::span<const double> params, std::span<const Example> batch);

/// CSV: label,waveform,day,f0..f{H-1}; one row per example.
void export_features(const Network& net, std::span<const Example> examples,
                     const std::filesystem::path& path);

/// Versioned flat binary: "RFAUGNN1", u32 version, u32 shape fields, then
/// per block a u32 count and little-endian float32 values.
void save_model(const Network& net, const std::filesystem::path& path);
Network load_model(const std::filesystem::path& path);

}  // namespace rfaug
