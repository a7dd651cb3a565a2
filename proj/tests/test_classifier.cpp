#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "rfaug/classifier.hpp"
#include "support.hpp"

using namespace rfaug;
using testing::error_kind;
using testing::TempDir;

namespace {

NetConfig probe_config() {
  NetConfig cfg;
  cfg.window_len = 32;
  cfg.conv_stages = 1;
  cfg.filters = 4;
  cfg.kernel = 5;
  cfg.hidden = 8;
  cfg.num_classes = 4;
  cfg.seed = 3;
  return cfg;
}

Example make_example(std::vector<Sample> window, int label) {
  Example e;
  e.window = std::move(window);
  e.label = label;
  e.meta.transmitter_id = label;
  return e;
}

// Gaussian windows whose label carries no information.
std::vector<Example> noise_set(std::size_t per_class, std::size_t classes, std::size_t w, std::uint64_t seed) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < per_class * classes; ++i) {
    out.push_back(make_example(testing::gaussian_samples(w, seed * 7919 + i), static_cast<int>(i % classes)));
  }
  return out;
}

// Class c is a noisy tone at a class-specific frequency.
std::vector<Example> tone_set(std::size_t per_class, std::size_t classes, std::size_t w, std::uint64_t seed) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < per_class * classes; ++i) {
    const std::size_t c = i % classes;
    auto v = testing::gaussian_samples(w, seed * 104729 + i);
    const double phase0 = static_cast<double>(i) * 0.37;
    for (std::size_t k = 0; k < w; ++k) {
      v[k] = 0.2 * v[k] + std::polar(1.0, phase0 + 2.0 * 3.141592653589793 * static_cast<double>((c + 1) * k) / 16.0);
    }
    out.push_back(make_example(std::move(v), static_cast<int>(c)));
  }
  return out;
}

std::vector<double> as_double(std::span<const float> p) { return {p.begin(), p.end()}; }

}  // namespace

TEST_CASE("parameter layout matches the stated shapes") {
  NetConfig cfg;
  cfg.window_len = 64;
  cfg.conv_stages = 2;
  cfg.filters = 6;
  cfg.kernel = 3;
  cfg.hidden = 10;
  cfg.num_classes = 5;
  const auto l = ParamLayout::of(cfg);
  REQUIRE(l.conv_weights.size() == 2);
  CHECK(l.conv_weights[0].size == 6 * 2 * 3);
  CHECK(l.conv_weights[1].size == 6 * 6 * 3);
  CHECK(l.conv_biases[1].size == 6);
  CHECK(l.flat_dim == 6 * 16);
  CHECK(l.dense1_weights.size == 10 * 96);
  CHECK(l.dense2_weights.size == 5 * 10);
  const std::size_t expected = (36 + 6) + (108 + 6) + (960 + 10) + (50 + 5);
  CHECK(l.total == expected);
  std::size_t sum = 0;
  for (const auto& b : l.blocks()) sum += b.size;
  CHECK(sum == expected);
  CHECK(Network(cfg).params().size() == expected);
}

TEST_CASE("net config validation") {
  auto cfg = probe_config();
  cfg.validate();
  cfg.kernel = 4;
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::Config);
  cfg = probe_config();
  cfg.window_len = 30;
  cfg.conv_stages = 2;
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::Config);
  cfg = probe_config();
  cfg.num_classes = 1;
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::Config);
  cfg = probe_config();
  cfg.batch_size = 0;
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::Config);
}

TEST_CASE("softmax outputs sum to one") {
  NetConfig cfg;
  cfg.window_len = 64;
  const Network net(cfg);
  for (const auto& ex : noise_set(5, 4, 64, 1)) {
    const auto p = net.probabilities(ex.window);
    REQUIRE(p.size() == 4);
    double s = 0;
    for (const double v : p) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) < 1e-6);
    CHECK(net.predict(ex.window) == static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()));
  }
}

TEST_CASE("gradient check on the probe net") {
  const auto cfg = probe_config();
  const auto batch = noise_set(2, 4, cfg.window_len, 5);
  const double err = gradient_check(cfg, batch);
  CHECK(err < 1e-4);
  CHECK(gradient_check(cfg, batch) == err);
}

TEST_CASE("gradient check on a deeper net") {
  NetConfig cfg;
  cfg.window_len = 64;
  cfg.conv_stages = 2;
  cfg.filters = 5;
  cfg.kernel = 7;
  cfg.hidden = 12;
  cfg.seed = 9;
  CHECK(gradient_check(cfg, tone_set(2, 4, 64, 2)) < 1e-4);
}

TEST_CASE("analytic gradient agrees with an independent central difference") {
  const auto cfg = probe_config();
  const auto batch = tone_set(1, 4, cfg.window_len, 8);
  auto params = as_double(Network(cfg).params());
  double loss = 0;
  const auto grad = loss_gradient(cfg, params, batch, &loss);
  CHECK(loss == doctest::Approx(mean_loss(cfg, params, batch)).epsilon(1e-12));
  std::mt19937_64 gen(4);
  const double h = 1e-5;
  double worst = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t i = gen() % params.size();
    const double saved = params[i];
    params[i] = saved + h;
    const double up = mean_loss(cfg, params, batch);
    params[i] = saved - h;
    const double down = mean_loss(cfg, params, batch);
    params[i] = saved;
    const double numeric = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(numeric - grad[i]) / std::max(std::abs(numeric) + std::abs(grad[i]), 1e-8));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("zero input with zero weights gives finite, symmetric gradients") {
  const auto cfg = probe_config();
  std::vector<Example> batch;
  for (int c = 0; c < 4; ++c) batch.push_back(make_example(std::vector<Sample>(cfg.window_len), c));
  const std::vector<double> params(ParamLayout::of(cfg).total, 0.0);
  double loss = 0;
  const auto grad = loss_gradient(cfg, params, batch, &loss);
  CHECK(loss == doctest::Approx(std::log(4.0)));
  for (const double g : grad) CHECK(std::isfinite(g));
  const auto l = ParamLayout::of(cfg);
  for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(grad[l.dense2_bias.offset + c]) < 1e-15);
}

TEST_CASE("training separates a constant-offset toy set") {
  NetConfig cfg;
  cfg.window_len = 32;
  cfg.conv_stages = 1;
  cfg.filters = 4;
  cfg.kernel = 3;
  cfg.hidden = 8;
  cfg.num_classes = 2;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.05;
  std::vector<Example> data;
  for (int i = 0; i < 64; ++i) {
    const int label = i % 2;
    auto v = testing::gaussian_samples(32, 500 + static_cast<std::uint64_t>(i));
    for (auto& z : v) z = 0.1 * z + (label ? Sample(1.0, 1.0) : Sample(-1.0, -1.0));
    data.push_back(make_example(std::move(v), label));
  }
  const auto model = train(data, cfg);
  REQUIRE(model.log.size() == 16);
  for (std::size_t e = 0; e < model.log.size(); ++e) CHECK(model.log[e].epoch == e + 1);
  CHECK(evaluate(model.network, data).accuracy == 1.0);
}

TEST_CASE("zero epochs returns the initialization") {
  auto cfg = probe_config();
  cfg.epochs = 0;
  const auto data = noise_set(250, 4, cfg.window_len, 3);
  const auto model = train(data, cfg);
  CHECK(model.network == Network(cfg));
  CHECK(model.log.empty());
  CHECK(std::abs(evaluate(model.network, data).accuracy - 0.25) < 0.05);
}

TEST_CASE("training is deterministic in the seed") {
  auto cfg = probe_config();
  cfg.epochs = 3;
  const auto data = tone_set(20, 4, cfg.window_len, 6);
  const auto a = train(data, cfg);
  const auto b = train(data, cfg);
  CHECK(a.network == b.network);
  cfg.seed = 4;
  CHECK_FALSE(train(data, cfg).network == a.network);
}

TEST_CASE("training needs every class") {
  auto cfg = probe_config();
  auto data = tone_set(5, 3, cfg.window_len, 1);
  CHECK(error_kind([&] { (void)train(data, cfg); }) == ErrorKind::Config);
}

TEST_CASE("balanced sampler draws classes evenly from imbalanced data") {
  const std::size_t counts[] = {10, 100, 30, 500};
  std::vector<Example> data;
  for (int c = 0; c < 4; ++c) {
    for (std::size_t i = 0; i < counts[c]; ++i) data.push_back(make_example({}, c));
  }
  std::mt19937_64 gen(2);
  std::shuffle(data.begin(), data.end(), gen);
  BalancedSampler sampler(data, 4, 11);
  for (int epoch = 0; epoch < 3; ++epoch) {
    const auto order = sampler.next_epoch();
    CHECK(order.size() == data.size());
    std::size_t drawn[4] = {};
    for (const auto i : order) ++drawn[data[i].label];
    const auto [lo, hi] = std::minmax_element(std::begin(drawn), std::end(drawn));
    CHECK(*hi - *lo <= 64);
  }
}

TEST_CASE("evaluate on a constant-class model") {
  const auto cfg = probe_config();
  std::vector<float> params(ParamLayout::of(cfg).total, 0.0f);
  params[ParamLayout::of(cfg).dense2_bias.offset] = 1.0f;
  const Network net(cfg, params);
  const auto data = noise_set(25, 4, cfg.window_len, 2);
  const auto r = evaluate(net, data);
  CHECK(r.accuracy == 0.25);
  CHECK(r.total == 100);
  for (std::size_t c = 0; c < 4; ++c) {
    CHECK(r.confusion[c][0] == 25);
    CHECK(r.per_class_accuracy[c] == (c == 0 ? 1.0 : 0.0));
  }
  CHECK(error_kind([&] { (void)evaluate(net, std::span<const Example>{}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("confusion matrix is consistent with accuracy for random models") {
  const auto data = tone_set(10, 4, 32, 3);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto cfg = probe_config();
    cfg.seed = seed;
    const auto r = evaluate(Network(cfg), data);
    std::size_t trace = 0, total = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      std::size_t row = 0;
      for (std::size_t j = 0; j < 4; ++j) row += r.confusion[i][j];
      CHECK(row == 10);
      trace += r.confusion[i][i];
      total += row;
    }
    CHECK(r.accuracy == static_cast<double>(trace) / static_cast<double>(total));
  }
}

TEST_CASE("a trained model scores its training data above label noise") {
  auto cfg = probe_config();
  cfg.epochs = 30;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.05;
  const auto data = tone_set(40, 4, cfg.window_len, 4);
  const auto model = train(data, cfg);
  const auto noise = noise_set(40, 4, cfg.window_len, 9);
  CHECK(evaluate(model.network, data).accuracy >= evaluate(model.network, noise).accuracy);
  CHECK(evaluate(model.network, data).accuracy > 0.9);
}

TEST_CASE("feature export") {
  TempDir dir("classifier");
  const auto cfg = probe_config();
  const Network net(cfg);
  auto data = tone_set(3, 4, cfg.window_len, 1);
  data.push_back(data.front());
  export_features(net, data, dir / "f.csv");
  std::istringstream in(testing::read_text(dir / "f.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(std::count(header.begin(), header.end(), ',') + 1 == static_cast<long>(3 + cfg.hidden));
  CHECK(header.rfind("label,waveform,day,f0", 0) == 0);
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  CHECK(rows.size() == data.size());
  CHECK(rows.front() == rows.back());
  CHECK(net.features(data[0].window).size() == cfg.hidden);
}

TEST_CASE("model files round trip and reject damage") {
  TempDir dir("classifier");
  auto cfg = probe_config();
  cfg.learning_rate = 0.0123;
  cfg.seed = 0xABCDEF0123ULL;
  const Network net(cfg);
  save_model(net, dir / "m.bin");
  const auto back = load_model(dir / "m.bin");
  CHECK(back == net);
  CHECK(back.config() == cfg);

  auto bytes = testing::read_bytes(dir / "m.bin");
  auto bad = bytes;
  bad[0] = 'X';
  testing::write_bytes(dir / "magic.bin", bad);
  CHECK(error_kind([&] { (void)load_model(dir / "magic.bin"); }) == ErrorKind::Format);
  bad = bytes;
  bad.resize(bytes.size() - 3);
  testing::write_bytes(dir / "short.bin", bad);
  CHECK(error_kind([&] { (void)load_model(dir / "short.bin"); }) == ErrorKind::Format);
  bad = bytes;
  bad.push_back(0);
  testing::write_bytes(dir / "long.bin", bad);
  CHECK(error_kind([&] { (void)load_model(dir / "long.bin"); }) == ErrorKind::Format);
  CHECK(error_kind([&] { (void)load_model(dir / "missing.bin"); }) == ErrorKind::Io);
}

TEST_CASE("window_to_input power-normalizes I and Q planes") {
  std::vector<Sample> w(16, Sample(3.0, -4.0));
  const auto in = window_to_input(w);
  REQUIRE(in.size() == 32);
  CHECK(in[0] == doctest::Approx(0.6));
  CHECK(in[16] == doctest::Approx(-0.8));
  const auto zero = window_to_input(std::vector<Sample>(16));
  for (const float v : zero) CHECK(v == 0.0f);
}
