#include "rfaug/classifier.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "rfaug/error.hpp"

namespace rfaug {

namespace {

std::size_t pad_of(const NetConfig& cfg) { return cfg.kernel / 2; }

std::size_t in_channels(const NetConfig& cfg, std::size_t stage) { return stage == 0 ? 2 : cfg.filters; }

// Length entering stage s.
std::size_t stage_len(const NetConfig& cfg, std::size_t stage) { return cfg.window_len >> stage; }

template <typename T>
struct Trace {
  std::vector<std::vector<T>> stage_in;  // [C + 1]; stage_in[C] is the flattened feature map
  std::vector<std::vector<T>> conv_out;  // post-ReLU, [F][L]
  std::vector<std::vector<std::uint32_t>> pool_idx;
  std::vector<T> hidden;  // post-ReLU
  std::vector<T> logits;
  std::vector<T> probs;
};

template <typename T>
class Engine {
 public:
  Engine(const NetConfig& cfg, const ParamLayout& layout, std::span<const T> params)
      : cfg_(cfg), layout_(layout), p_(params) {}

  void forward(std::span<const T> input, Trace<T>& tr) const {
    const std::size_t C = cfg_.conv_stages;
    const std::size_t F = cfg_.filters;
    const std::size_t K = cfg_.kernel;
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(pad_of(cfg_));
    tr.stage_in.resize(C + 1);
    tr.conv_out.resize(C);
    tr.pool_idx.resize(C);
    tr.stage_in[0].assign(input.begin(), input.end());

    for (std::size_t s = 0; s < C; ++s) {
      const std::size_t cin = in_channels(cfg_, s);
      const std::size_t L = stage_len(cfg_, s);
      const T* w = p_.data() + layout_.conv_weights[s].offset;
      const T* b = p_.data() + layout_.conv_biases[s].offset;
      const auto& in = tr.stage_in[s];
      auto& out = tr.conv_out[s];
      out.assign(F * L, T(0));
      for (std::size_t f = 0; f < F; ++f) {
        T* o = out.data() + f * L;
        std::fill(o, o + L, b[f]);
        for (std::size_t c = 0; c < cin; ++c) {
          const T* x = in.data() + c * L;
          for (std::size_t k = 0; k < K; ++k) {
            const T wk = w[(f * cin + c) * K + k];
            const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(k) - pad;
            const std::size_t t0 = off < 0 ? static_cast<std::size_t>(-off) : 0;
            const std::size_t t1 = off > 0 ? L - static_cast<std::size_t>(off) : L;
            for (std::size_t t = t0; t < t1; ++t) o[t] += wk * x[static_cast<std::ptrdiff_t>(t) + off];
          }
        }
        for (std::size_t t = 0; t < L; ++t) o[t] = std::max(o[t], T(0));
      }

      const std::size_t half = L / 2;
      auto& pooled = tr.stage_in[s + 1];
      auto& idx = tr.pool_idx[s];
      pooled.resize(F * half);
      idx.resize(F * half);
      for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t t = 0; t < half; ++t) {
          const std::size_t a = f * L + 2 * t;
          const bool second = out[a + 1] > out[a];
          idx[f * half + t] = static_cast<std::uint32_t>(second ? a + 1 : a);
          pooled[f * half + t] = second ? out[a + 1] : out[a];
        }
      }
    }

    const auto& flat = tr.stage_in[C];
    const std::size_t H = cfg_.hidden;
    const std::size_t D = layout_.flat_dim;
    const T* w1 = p_.data() + layout_.dense1_weights.offset;
    const T* b1 = p_.data() + layout_.dense1_bias.offset;
    tr.hidden.resize(H);
    for (std::size_t h = 0; h < H; ++h) {
      T acc = b1[h];
      const T* row = w1 + h * D;
      for (std::size_t d = 0; d < D; ++d) acc += row[d] * flat[d];
      tr.hidden[h] = std::max(acc, T(0));
    }

    const std::size_t N = cfg_.num_classes;
    const T* w2 = p_.data() + layout_.dense2_weights.offset;
    const T* b2 = p_.data() + layout_.dense2_bias.offset;
    tr.logits.resize(N);
    for (std::size_t n = 0; n < N; ++n) {
      T acc = b2[n];
      for (std::size_t h = 0; h < H; ++h) acc += w2[n * H + h] * tr.hidden[h];
      tr.logits[n] = acc;
    }
    const T top = *std::max_element(tr.logits.begin(), tr.logits.end());
    tr.probs.resize(N);
    T sum = 0;
    for (std::size_t n = 0; n < N; ++n) sum += tr.probs[n] = std::exp(tr.logits[n] - top);
    for (auto& p : tr.probs) p /= sum;
  }

  /// Cross-entropy of the last forward pass, computed from the logits.
  double loss(const Trace<T>& tr, int label) const {
    const double top = static_cast<double>(*std::max_element(tr.logits.begin(), tr.logits.end()));
    double sum = 0.0;
    for (const T z : tr.logits) sum += std::exp(static_cast<double>(z) - top);
    return top + std::log(sum) - static_cast<double>(tr.logits[static_cast<std::size_t>(label)]);
  }

  /// Adds scale * d(loss)/d(params) into grad.
  void backward(const Trace<T>& tr, int label, T scale, std::span<T> grad) const {
    const std::size_t C = cfg_.conv_stages;
    const std::size_t F = cfg_.filters;
    const std::size_t K = cfg_.kernel;
    const std::size_t H = cfg_.hidden;
    const std::size_t N = cfg_.num_classes;
    const std::size_t D = layout_.flat_dim;
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(pad_of(cfg_));

    std::vector<T> dlogit(N);
    for (std::size_t n = 0; n < N; ++n) {
      dlogit[n] = scale * (tr.probs[n] - (static_cast<int>(n) == label ? T(1) : T(0)));
    }

    const T* w2 = p_.data() + layout_.dense2_weights.offset;
    T* gw2 = grad.data() + layout_.dense2_weights.offset;
    T* gb2 = grad.data() + layout_.dense2_bias.offset;
    std::vector<T> dh(H, T(0));
    for (std::size_t n = 0; n < N; ++n) {
      gb2[n] += dlogit[n];
      for (std::size_t h = 0; h < H; ++h) {
        gw2[n * H + h] += dlogit[n] * tr.hidden[h];
        dh[h] += w2[n * H + h] * dlogit[n];
      }
    }
    for (std::size_t h = 0; h < H; ++h) {
      if (!(tr.hidden[h] > T(0))) dh[h] = T(0);
    }

    const auto& flat = tr.stage_in[C];
    const T* w1 = p_.data() + layout_.dense1_weights.offset;
    T* gw1 = grad.data() + layout_.dense1_weights.offset;
    T* gb1 = grad.data() + layout_.dense1_bias.offset;
    std::vector<T> dnext(D, T(0));
    for (std::size_t h = 0; h < H; ++h) {
      const T g = dh[h];
      if (g == T(0)) continue;
      gb1[h] += g;
      T* grow = gw1 + h * D;
      const T* row = w1 + h * D;
      for (std::size_t d = 0; d < D; ++d) {
        grow[d] += g * flat[d];
        dnext[d] += row[d] * g;
      }
    }

    std::vector<T> dout;
    for (std::size_t s = C; s-- > 0;) {
      const std::size_t cin = in_channels(cfg_, s);
      const std::size_t L = stage_len(cfg_, s);
      const auto& out = tr.conv_out[s];
      const auto& idx = tr.pool_idx[s];

      // Un-pool onto the arg-max positions, then mask by the ReLU.
      dout.assign(F * L, T(0));
      for (std::size_t i = 0; i < idx.size(); ++i) dout[idx[i]] += dnext[i];
      for (std::size_t i = 0; i < dout.size(); ++i) {
        if (!(out[i] > T(0))) dout[i] = T(0);
      }

      const auto& in = tr.stage_in[s];
      const T* w = p_.data() + layout_.conv_weights[s].offset;
      T* gw = grad.data() + layout_.conv_weights[s].offset;
      T* gb = grad.data() + layout_.conv_biases[s].offset;
      const bool need_input_grad = s > 0;
      std::vector<T> din(need_input_grad ? cin * L : 0, T(0));
      for (std::size_t f = 0; f < F; ++f) {
        const T* d = dout.data() + f * L;
        T bsum = 0;
        for (std::size_t t = 0; t < L; ++t) bsum += d[t];
        gb[f] += bsum;
        for (std::size_t c = 0; c < cin; ++c) {
          const T* x = in.data() + c * L;
          for (std::size_t k = 0; k < K; ++k) {
            const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(k) - pad;
            const std::size_t t0 = off < 0 ? static_cast<std::size_t>(-off) : 0;
            const std::size_t t1 = off > 0 ? L - static_cast<std::size_t>(off) : L;
            T acc = 0;
            for (std::size_t t = t0; t < t1; ++t) acc += d[t] * x[static_cast<std::ptrdiff_t>(t) + off];
            gw[(f * cin + c) * K + k] += acc;
            if (need_input_grad) {
              const T wk = w[(f * cin + c) * K + k];
              T* dx = din.data() + c * L;
              for (std::size_t t = t0; t < t1; ++t) dx[static_cast<std::ptrdiff_t>(t) + off] += wk * d[t];
            }
          }
        }
      }
      dnext = std::move(din);
    }
  }

 private:
  const NetConfig& cfg_;
  const ParamLayout& layout_;
  std::span<const T> p_;
};

template <typename T>
std::vector<T> input_as(std::span<const Sample> window) {
  const auto planes = window_to_input(window);
  return {planes.begin(), planes.end()};
}

void check_window(const NetConfig& cfg, std::span<const Sample> window) {
  if (window.size() != cfg.window_len) {
    fail(ErrorKind::InvalidArgument, "window has " + std::to_string(window.size()) +
                                         " samples, network expects " + std::to_string(cfg.window_len));
  }
}

void check_label(const NetConfig& cfg, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= cfg.num_classes) {
    fail(ErrorKind::InvalidArgument, "label " + std::to_string(label) + " outside [0, " +
                                         std::to_string(cfg.num_classes) + ")");
  }
}

// Little-endian primitive I/O for the model file.
void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) fail(ErrorKind::Format, "model file truncated");
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

std::uint64_t get_u64(std::istream& in) {
  const std::uint64_t lo = get_u32(in);
  return lo | static_cast<std::uint64_t>(get_u32(in)) << 32;
}

constexpr char kModelMagic[8] = {'R', 'F', 'A', 'U', 'G', 'N', 'N', '1'};
constexpr std::uint32_t kModelVersion = 1;

std::string format_float(float v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void NetConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::Config, "net: " + what); };
  if (conv_stages < 1) bad("conv_stages must be >= 1");
  if (conv_stages > 16) bad("conv_stages must be <= 16");
  if (window_len < 16) bad("window_len must be >= 16");
  if (window_len % (std::size_t{1} << conv_stages) != 0) {
    bad("window_len must be divisible by 2^conv_stages");
  }
  if (filters < 1) bad("filters must be >= 1");
  if (kernel < 1 || kernel % 2 == 0) bad("kernel must be odd");
  if (kernel > window_len >> (conv_stages - 1)) bad("kernel longer than the last conv input");
  if (hidden < 1) bad("hidden must be >= 1");
  if (num_classes < 2) bad("num_classes must be >= 2");
  if (batch_size < 1) bad("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("learning_rate must be > 0");
}

NetConfig net_config_from(const KvConfig& cfg, const std::string& section) {
  const std::string s = section + ".";
  NetConfig net;
  auto size = [&](const char* key, std::size_t fallback) {
    const auto v = cfg.get_int(s + key, static_cast<std::int64_t>(fallback));
    if (v < 0) fail(ErrorKind::Config, "net: " + std::string(key) + " must be >= 0");
    return static_cast<std::size_t>(v);
  };
  net.window_len = size("window_len", net.window_len);
  net.conv_stages = size("conv_stages", net.conv_stages);
  net.filters = size("filters", net.filters);
  net.kernel = size("kernel", net.kernel);
  net.hidden = size("hidden", net.hidden);
  net.num_classes = size("num_classes", net.num_classes);
  net.epochs = size("epochs", net.epochs);
  net.batch_size = size("batch_size", net.batch_size);
  net.learning_rate = cfg.get_double(s + "learning_rate", net.learning_rate);
  net.seed = cfg.get_u64(s + "seed", net.seed);
  net.validate();
  return net;
}

void net_config_to(const NetConfig& net, KvConfig& cfg, const std::string& section) {
  const std::string s = section + ".";
  cfg.set(s + "window_len", static_cast<std::int64_t>(net.window_len));
  cfg.set(s + "conv_stages", static_cast<std::int64_t>(net.conv_stages));
  cfg.set(s + "filters", static_cast<std::int64_t>(net.filters));
  cfg.set(s + "kernel", static_cast<std::int64_t>(net.kernel));
  cfg.set(s + "hidden", static_cast<std::int64_t>(net.hidden));
  cfg.set(s + "num_classes", static_cast<std::int64_t>(net.num_classes));
  cfg.set(s + "epochs", static_cast<std::int64_t>(net.epochs));
  cfg.set(s + "batch_size", static_cast<std::int64_t>(net.batch_size));
  cfg.set(s + "learning_rate", net.learning_rate);
  cfg.set(s + "seed", std::to_string(net.seed));
}

ParamLayout ParamLayout::of(const NetConfig& cfg) {
  cfg.validate();
  ParamLayout l;
  std::size_t at = 0;
  auto take = [&](std::size_t n) {
    const Block b{at, n};
    at += n;
    return b;
  };
  for (std::size_t s = 0; s < cfg.conv_stages; ++s) {
    l.conv_weights.push_back(take(cfg.filters * in_channels(cfg, s) * cfg.kernel));
    l.conv_biases.push_back(take(cfg.filters));
  }
  l.flat_dim = cfg.filters * (cfg.window_len >> cfg.conv_stages);
  l.dense1_weights = take(cfg.hidden * l.flat_dim);
  l.dense1_bias = take(cfg.hidden);
  l.dense2_weights = take(cfg.num_classes * cfg.hidden);
  l.dense2_bias = take(cfg.num_classes);
  l.total = at;
  return l;
}

std::vector<ParamLayout::Block> ParamLayout::blocks() const {
  std::vector<Block> out;
  for (std::size_t s = 0; s < conv_weights.size(); ++s) {
    out.push_back(conv_weights[s]);
    out.push_back(conv_biases[s]);
  }
  out.insert(out.end(), {dense1_weights, dense1_bias, dense2_weights, dense2_bias});
  return out;
}

Network::Network(const NetConfig& cfg) : cfg_(cfg), layout_(ParamLayout::of(cfg)), params_(layout_.total, 0.0f) {
  Rng rng(cfg.seed);
  auto he = [&](ParamLayout::Block b, std::size_t fan_in) {
    const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < b.size; ++i) params_[b.offset + i] = static_cast<float>(sd * rng.normal());
  };
  for (std::size_t s = 0; s < cfg.conv_stages; ++s) he(layout_.conv_weights[s], in_channels(cfg, s) * cfg.kernel);
  he(layout_.dense1_weights, layout_.flat_dim);
  he(layout_.dense2_weights, cfg.hidden);
}

Network::Network(const NetConfig& cfg, std::vector<float> params)
    : cfg_(cfg), layout_(ParamLayout::of(cfg)), params_(std::move(params)) {
  if (params_.size() != layout_.total) {
    fail(ErrorKind::Format, "parameter count " + std::to_string(params_.size()) + " does not match network shape (" +
                                std::to_string(layout_.total) + ")");
  }
  for (const float v : params_) {
    if (!std::isfinite(v)) fail(ErrorKind::Validation, "non-finite network parameter");
  }
}

std::vector<double> Network::probabilities(std::span<const Sample> window) const {
  check_window(cfg_, window);
  const auto input = input_as<float>(window);
  Trace<float> tr;
  Engine<float>(cfg_, layout_, params_).forward(input, tr);
  return {tr.probs.begin(), tr.probs.end()};
}

int Network::predict(std::span<const Sample> window) const {
  const auto p = probabilities(window);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::vector<float> Network::features(std::span<const Sample> window) const {
  check_window(cfg_, window);
  const auto input = input_as<float>(window);
  Trace<float> tr;
  Engine<float>(cfg_, layout_, params_).forward(input, tr);
  return tr.hidden;
}

std::vector<float> window_to_input(std::span<const Sample> window) {
  const std::size_t W = window.size();
  std::vector<float> out(2 * W, 0.0f);
  const double p = mean_power(window);
  if (!(p > 0.0)) return out;
  const double scale = 1.0 / std::sqrt(p);
  for (std::size_t t = 0; t < W; ++t) {
    out[t] = static_cast<float>(window[t].real() * scale);
    out[W + t] = static_cast<float>(window[t].imag() * scale);
  }
  return out;
}

BalancedSampler::BalancedSampler(std::span<const Example> examples, std::size_t num_classes, std::uint64_t seed)
    : by_class_(num_classes), cursor_(num_classes, 0), epoch_len_(examples.size()), rng_(seed) {
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const int label = examples[i].label;
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
      fail(ErrorKind::Config, "example " + std::to_string(i) + " has label " + std::to_string(label) +
                                  " outside [0, " + std::to_string(num_classes) + ")");
    }
    by_class_[static_cast<std::size_t>(label)].push_back(i);
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (by_class_[c].empty()) fail(ErrorKind::Config, "class " + std::to_string(c) + " has no training examples");
  }
}

std::size_t BalancedSampler::draw_from(std::size_t cls) {
  auto& pool = by_class_[cls];
  if (cursor_[cls] == 0) {
    for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng_.below(i)]);
  }
  const std::size_t pick = pool[cursor_[cls]];
  cursor_[cls] = (cursor_[cls] + 1) % pool.size();
  return pick;
}

std::vector<std::size_t> BalancedSampler::next_epoch() {
  std::vector<std::size_t> order;
  order.reserve(epoch_len_);
  std::vector<std::size_t> classes(by_class_.size());
  while (order.size() < epoch_len_) {
    for (std::size_t c = 0; c < classes.size(); ++c) classes[c] = c;
    for (std::size_t i = classes.size(); i > 1; --i) std::swap(classes[i - 1], classes[rng_.below(i)]);
    for (const std::size_t c : classes) {
      if (order.size() == epoch_len_) break;
      order.push_back(draw_from(c));
    }
  }
  return order;
}

TrainedModel train(std::span<const Example> train_set, const NetConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) fail(ErrorKind::Config, "training set is empty");
  for (const auto& ex : train_set) check_window(cfg, ex.window);

  TrainedModel model{Network(cfg), {}};
  if (cfg.epochs == 0) return model;

  BalancedSampler sampler(train_set, cfg.num_classes, mix_seed(cfg.seed, 1));
  std::vector<std::vector<float>> inputs;
  inputs.reserve(train_set.size());
  for (const auto& ex : train_set) inputs.push_back(window_to_input(ex.window));

  const ParamLayout& layout = model.network.layout();
  std::span<float> params = model.network.params();
  std::vector<float> grad(layout.total);
  Trace<float> tr;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = sampler.next_epoch();
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const float scale = 1.0f / static_cast<float>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0f);
      const Engine<float> engine(cfg, layout, params);
      for (std::size_t i = start; i < stop; ++i) {
        const auto& ex = train_set[order[i]];
        engine.forward(inputs[order[i]], tr);
        loss_sum += engine.loss(tr, ex.label);
        const auto best = std::max_element(tr.probs.begin(), tr.probs.end()) - tr.probs.begin();
        if (best == ex.label) ++correct;
        engine.backward(tr, ex.label, scale, grad);
      }
      const float lr = static_cast<float>(cfg.learning_rate);
      for (std::size_t j = 0; j < params.size(); ++j) params[j] -= lr * grad[j];
    }
    for (const float v : params) {
      if (!std::isfinite(v)) {
        fail(ErrorKind::Degenerate, "training diverged in epoch " + std::to_string(epoch + 1));
      }
    }
    const auto n = static_cast<double>(order.size());
    model.log.push_back({epoch + 1, loss_sum / n, static_cast<double>(correct) / n});
  }
  return model;
}

EvalReport evaluate(const Network& net, std::span<const Example> test_set) {
  if (test_set.empty()) fail(ErrorKind::InvalidArgument, "evaluate: test set is empty");
  const std::size_t N = net.config().num_classes;
  EvalReport r;
  r.confusion.assign(N, std::vector<std::size_t>(N, 0));
  r.per_class_accuracy.assign(N, 0.0);
  std::size_t correct = 0;
  for (const auto& ex : test_set) {
    check_label(net.config(), ex.label);
    const int pred = net.predict(ex.window);
    ++r.confusion[static_cast<std::size_t>(ex.label)][static_cast<std::size_t>(pred)];
    if (pred == ex.label) ++correct;
  }
  r.total = test_set.size();
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);
  for (std::size_t c = 0; c < N; ++c) {
    std::size_t row = 0;
    for (const auto v : r.confusion[c]) row += v;
    if (row > 0) r.per_class_accuracy[c] = static_cast<double>(r.confusion[c][c]) / static_cast<double>(row);
  }
  return r;
}

double mean_loss(const NetConfig& cfg, std::span<const double> params, std::span<const Example> batch) {
  const ParamLayout layout = ParamLayout::of(cfg);
  if (params.size() != layout.total) fail(ErrorKind::InvalidArgument, "parameter vector has the wrong size");
  if (batch.empty()) fail(ErrorKind::InvalidArgument, "empty batch");
  const Engine<double> engine(cfg, layout, params);
  Trace<double> tr;
  double sum = 0.0;
  for (const auto& ex : batch) {
    check_window(cfg, ex.window);
    check_label(cfg, ex.label);
    engine.forward(input_as<double>(ex.window), tr);
    sum += engine.loss(tr, ex.label);
  }
  return sum / static_cast<double>(batch.size());
}

std::vector<double> loss_gradient(const NetConfig& cfg, std::span<const double> params,
                                  std::span<const Example> batch, double* loss_out) {
  const ParamLayout layout = ParamLayout::of(cfg);
  if (params.size() != layout.total) fail(ErrorKind::InvalidArgument, "parameter vector has the wrong size");
  if (batch.empty()) fail(ErrorKind::InvalidArgument, "empty batch");
  const Engine<double> engine(cfg, layout, params);
  Trace<double> tr;
  std::vector<double> grad(layout.total, 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  double sum = 0.0;
  for (const auto& ex : batch) {
    check_window(cfg, ex.window);
    check_label(cfg, ex.label);
    engine.forward(input_as<double>(ex.window), tr);
    sum += engine.loss(tr, ex.label);
    engine.backward(tr, ex.label, scale, grad);
  }
  if (loss_out) *loss_out = sum * scale;
  return grad;
}

double gradient_check(const NetConfig& cfg, std::span<const Example> probe_batch, std::size_t samples_per_block) {
  const Network init(cfg);
  std::vector<double> params(init.params().begin(), init.params().end());
  const auto analytic = loss_gradient(cfg, params, probe_batch);

  constexpr double kStep = 1e-4;
  double worst = 0.0;
  const auto blocks = init.layout().blocks();
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto block = blocks[bi];
    std::vector<std::size_t> picks(block.size);
    for (std::size_t i = 0; i < picks.size(); ++i) picks[i] = block.offset + i;
    Rng rng(mix_seed(cfg.seed, 1000 + bi));
    for (std::size_t i = picks.size(); i > 1; --i) std::swap(picks[i - 1], picks[rng.below(i)]);
    picks.resize(std::min(picks.size(), samples_per_block));

    for (const std::size_t j : picks) {
      const double saved = params[j];
      params[j] = saved + kStep;
      const double up = mean_loss(cfg, params, probe_batch);
      params[j] = saved - kStep;
      const double down = mean_loss(cfg, params, probe_batch);
      params[j] = saved;
      const double numeric = (up - down) / (2.0 * kStep);
      const double a = analytic[j];
      const double rel = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), 1e-8);
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

void export_features(const Network& net, std::span<const Example> examples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << "label,waveform,day";
  for (std::size_t h = 0; h < net.config().hidden; ++h) out << ",f" << h;
  out << '\n';
  for (const auto& ex : examples) {
    out << ex.label << ',' << to_string(ex.meta.waveform) << ',' << to_string(ex.meta.day);
    for (const float v : net.features(ex.window)) out << ',' << format_float(v);
    out << '\n';
  }
  if (!out) fail(ErrorKind::Io, "write error on " + path.string());
}

void save_model(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  const auto& c = net.config();
  out.write(kModelMagic, sizeof(kModelMagic));
  put_u32(out, kModelVersion);
  for (const std::size_t v : {c.window_len, c.conv_stages, c.filters, c.kernel, c.hidden, c.num_classes, c.epochs,
                              c.batch_size}) {
    put_u32(out, static_cast<std::uint32_t>(v));
  }
  put_u64(out, std::bit_cast<std::uint64_t>(c.learning_rate));
  put_u64(out, c.seed);
  const auto params = net.params();
  for (const auto& b : net.layout().blocks()) {
    put_u32(out, static_cast<std::uint32_t>(b.size));
    for (std::size_t i = 0; i < b.size; ++i) put_u32(out, std::bit_cast<std::uint32_t>(params[b.offset + i]));
  }
  if (!out) fail(ErrorKind::Io, "write error on " + path.string());
}

Network load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open model " + path.string());
  try {
    char magic[sizeof(kModelMagic)];
    if (!in.read(magic, sizeof(magic)) || !std::equal(magic, magic + sizeof(magic), kModelMagic)) {
      fail(ErrorKind::Format, "not a model file (bad magic)");
    }
    const auto version = get_u32(in);
    if (version != kModelVersion) fail(ErrorKind::Format, "unsupported model version " + std::to_string(version));
    NetConfig c;
    for (std::size_t* field : {&c.window_len, &c.conv_stages, &c.filters, &c.kernel, &c.hidden, &c.num_classes,
                               &c.epochs, &c.batch_size}) {
      *field = get_u32(in);
    }
    c.learning_rate = std::bit_cast<double>(get_u64(in));
    c.seed = get_u64(in);
    try {
      c.validate();
    } catch (const Error& e) {
      fail(ErrorKind::Format, std::string("invalid network shape: ") + e.what());
    }
    const ParamLayout layout = ParamLayout::of(c);
    std::vector<float> params(layout.total);
    for (const auto& b : layout.blocks()) {
      const auto n = get_u32(in);
      if (n != b.size) fail(ErrorKind::Format, "weight block size mismatch");
      for (std::size_t i = 0; i < b.size; ++i) params[b.offset + i] = std::bit_cast<float>(get_u32(in));
    }
    if (in.peek() != std::char_traits<char>::eof()) fail(ErrorKind::Format, "trailing bytes after weights");
    return Network(c, std::move(params));
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace rfaug
