#include "spikescan/tasks.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "spikescan/ops.hpp"

namespace spikescan {

namespace {

using Json = nlohmann::json;

// x [B x 1 x T] copied onto `channels` channels.
Tensor replicate(const Tensor& x, std::size_t channels) {
  Tensor out(Shape{batch_of(x), channels, length_of(x)});
  for (std::size_t b = 0; b < batch_of(x); ++b)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t t = 0; t < length_of(x); ++t) out.at(b, c, t) = x.at(b, 0, t);
  return out;
}

Tensor rows(const Tensor& t, const std::vector<std::size_t>& index) {
  Dataset view;
  view.inputs = t;
  return view.gather(index);
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

Json epochs_json(const std::vector<EpochLog>& logs) {
  Json out = Json::array();
  for (const EpochLog& e : logs)
    out.push_back({{"epoch", e.epoch},
                   {"train_loss", e.train_loss},
                   {"test_loss", e.test_loss},
                   {"test_accuracy", e.test_accuracy}});
  return out;
}

}  // namespace

std::string TargetChannel::label() const {
  const std::string tau = tau_m == 4.0 / 3.0 ? "4/3" : fixed(tau_m, 0);
  return to_string(reset) + " reset, tau_m=" + tau + (integer ? ", integer" : "");
}

std::vector<TargetChannel> approx_targets() {
  std::vector<TargetChannel> out;
  for (ResetMode mode : {ResetMode::kHard, ResetMode::kSoft})
    for (double tau : {4.0 / 3.0, 2.0, 4.0}) out.push_back({mode, tau, false});
  return out;
}

std::vector<TargetChannel> integer_approx_targets() {
  std::vector<TargetChannel> out;
  for (double tau : {4.0 / 3.0, 2.0, 4.0}) out.push_back({ResetMode::kSoft, tau, true});
  return out;
}

TargetTrace integer_lif_sequence(double beta, int n_max, const Tensor& x) {
  require_rank(x, 3, "integer_lif_sequence");
  if (!(beta >= 0.0 && beta < 1.0) || n_max < 1) throw DomainError("integer LIF: need 0 <= beta < 1 and n_max >= 1");
  TargetTrace out{Tensor(x.shape()), Tensor(x.shape())};
  const std::size_t lanes = batch_of(x) * channels_of(x), steps = length_of(x);
  for (std::size_t l = 0; l < lanes; ++l) {
    double v = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
      const std::size_t i = l * steps + t;
      const double h = beta * v + (1.0 - beta) * x[i];
      const double s = clip_round_scalar(h, n_max);
      out.h[i] = h;
      out.s[i] = s;
      v = h - s;
    }
  }
  return out;
}

TargetTrace target_trace(const std::vector<TargetChannel>& targets, const Tensor& x) {
  require_rank(x, 3, "target_trace");
  if (channels_of(x) != 1) throw ShapeError("target_trace: expected a single input channel");
  const std::size_t batch = batch_of(x), steps = length_of(x), c_out = targets.size();
  TargetTrace out{Tensor(Shape{batch, c_out, steps}), Tensor(Shape{batch, c_out, steps})};
  for (std::size_t c = 0; c < c_out; ++c) {
    const TargetChannel& ch = targets[c];
    TargetTrace one;
    if (ch.integer) {
      if (ch.reset != ResetMode::kSoft) throw DomainError("integer targets need soft reset");
      one = integer_lif_sequence(1.0 - 1.0 / ch.tau_m, 4, x);
    } else {
      const LifTrace tr = lif_sequence(NeuronConfig::lif(ch.tau_m, ch.reset), x);
      one = {tr.h, tr.s};
    }
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t t = 0; t < steps; ++t) {
        out.h.at(b, c, t) = one.h.at(b, 0, t);
        out.s.at(b, c, t) = one.s.at(b, 0, t);
      }
  }
  return out;
}

ApproxModel ApproxModel::init(std::size_t channels, std::size_t k, std::size_t expansion, double tau,
                              std::mt19937_64& rng) {
  if (channels == 0 || k == 0 || expansion == 0 || !(tau > 0.0)) throw DomainError("approx model: bad structure");
  ApproxModel m;
  m.channels = channels;
  m.k = k;
  m.expansion = expansion;
  m.tau = tau;
  const std::size_t wide = channels * expansion;
  m.params.emplace_back("up.weight", uniform_init(Shape{wide, channels, k}, channels * k, rng));
  m.params.emplace_back("up.bias", uniform_init(Shape{wide}, channels * k, rng));
  m.params.emplace_back("down.weight", uniform_init(Shape{channels, wide, k}, wide * k, rng));
  m.params.emplace_back("down.bias", uniform_init(Shape{channels}, wide * k, rng));
  return m;
}

std::size_t ApproxModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, value] : params) n += value.size();
  return n;
}

ApproxTaped approx_forward(const ApproxModel& model, Tape& tape, const std::vector<Var>& leaves, const Tensor& x,
                           Execution exec) {
  const Var input = tape.constant(replicate(x, model.channels));
  const auto& p = model.params;
  Var up = relu(causal_conv1d(input, leaf_named(p, leaves, "up.weight"), leaf_named(p, leaves, "up.bias")));
  Var pre = causal_conv1d(up, leaf_named(p, leaves, "down.weight"), leaf_named(p, leaves, "down.bias"));
  Var alpha = pow(sigmoid(pre), 1.0 / model.tau);
  return {scan(alpha, input, exec), alpha};
}

Tensor approx_membrane(const ApproxModel& model, const Tensor& x, Execution exec) {
  Tape tape;
  std::vector<Var> leaves;
  for (const auto& [name, value] : model.params) leaves.push_back(tape.constant(value));
  return approx_forward(model, tape, leaves, x, exec).h.value();
}

Scale parse_scale(const std::string& name) {
  if (name == "desk") return Scale::kDesk;
  if (name == "full") return Scale::kFull;
  throw DomainError("unknown scale '" + name + "'");
}

Dataset approx_dataset(const std::string& dataset, Scale scale, std::uint64_t seed) {
  if (dataset == "a") return gen_dataset_a(scale == Scale::kDesk ? 2200 : 11000, seed);
  if (dataset == "b") return gen_dataset_b(seed);
  throw DomainError("unknown dataset '" + dataset + "'");
}

namespace {

// Per-channel fraction of test steps whose predicted spike equals the target.
std::vector<double> spike_accuracy(const Tensor& h_pred, const Tensor& s_target,
                                   const std::vector<TargetChannel>& targets, double tolerance = 0.0) {
  const std::size_t batch = batch_of(h_pred), steps = length_of(h_pred);
  std::vector<double> acc(targets.size(), 0.0);
  for (std::size_t c = 0; c < targets.size(); ++c) {
    std::size_t hits = 0;
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t t = 0; t < steps; ++t) {
        const double h = h_pred.at(b, c, t);
        const double s = targets[c].integer ? clip_round_scalar(h, 4) : heaviside(h - 1.0);
        hits += std::abs(s - s_target.at(b, c, t)) <= tolerance;
      }
    acc[c] = static_cast<double>(hits) / static_cast<double>(batch * steps);
  }
  return acc;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double mse_value(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mse");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace

ApproxResult run_approx_experiment(const std::string& dataset_name, const Dataset& data,
                                   const std::vector<TargetChannel>& targets, const TrainConfig& cfg) {
  cfg.validate();
  if (targets.empty()) throw DomainError("approx experiment: no target channels");
  if (data.train.empty() || data.test.empty()) throw DomainError("approx experiment: empty split");
  std::mt19937_64 rng(cfg.seed);
  ApproxModel model = ApproxModel::init(targets.size(), 8, 8, 0.5, rng);

  const TargetTrace all = target_trace(targets, data.inputs);
  const Tensor x_test = data.gather(data.test);
  const Tensor h_test = rows(all.h, data.test), s_test = rows(all.s, data.test);

  ApproxResult result;
  result.dataset = dataset_name;
  result.integer = targets.front().integer;
  result.parameters = model.parameter_count();
  for (const TargetChannel& t : targets) result.channels.push_back(t.label());

  auto evaluate = [&](std::size_t epoch, double train_loss) {
    const Tensor h = approx_membrane(model, x_test);
    result.accuracy = spike_accuracy(h, s_test, targets);
    result.average = mean_of(result.accuracy);
    if (result.integer) result.accuracy_within_one = spike_accuracy(h, s_test, targets, 1.0);
    result.per_epoch.push_back({epoch, train_loss, mse_value(h, h_test), result.average});
  };
  evaluate(0, std::nan(""));

  const std::size_t per_epoch = (data.train.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total = per_epoch * cfg.epochs;
  AdamW opt(model.params, cfg);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (const auto& batch : shuffled_batches(data.train, cfg.batch_size, rng)) {
      Tape tape;
      const std::vector<Var> leaves = parameter_leaves(tape, model.params);
      const ApproxTaped out = approx_forward(model, tape, leaves, data.gather(batch));
      const Var loss = mse(out.h, rows(all.h, batch));
      tape.backward(loss);
      loss_sum += loss.value()[0];
      ++batches;
      opt.step(model.params, leaf_grads(leaves), cosine_lr(cfg.peak_lr, opt.steps(), total));
    }
    evaluate(epoch, loss_sum / static_cast<double>(batches));
  }
  return result;
}

namespace {

struct PixelNet {
  std::size_t in = 16, hidden = 32, classes = 4, steps = 16;
  NeuronLayer first, second;
  NamedTensors params;

  PixelNet(NeuronKind kind, std::size_t size, std::size_t h, std::mt19937_64& rng)
      : in(size), hidden(h), steps(size) {
    first = NeuronLayer{kind, hidden, steps};
    second = NeuronLayer{kind, hidden, steps};
    params.emplace_back("conv1.weight", uniform_init(Shape{hidden, in, 3}, in * 3, rng));
    params.emplace_back("conv1.bias", uniform_init(Shape{hidden}, in * 3, rng));
    first.init(params, "n1.", rng);
    params.emplace_back("conv2.weight", uniform_init(Shape{hidden, hidden, 3}, hidden * 3, rng));
    params.emplace_back("conv2.bias", uniform_init(Shape{hidden}, hidden * 3, rng));
    second.init(params, "n2.", rng);
    params.emplace_back("fc.weight", uniform_init(Shape{classes, hidden, 1}, hidden, rng));
    params.emplace_back("fc.bias", uniform_init(Shape{classes}, hidden, rng));
  }

  Var logits(Tape& tape, const std::vector<Var>& leaves, const Tensor& x,
             std::vector<Tensor>* spikes = nullptr) const {
    auto p = [&](const char* name) { return leaf_named(params, leaves, name); };
    Var h = conv1d(tape.constant(x), p("conv1.weight"), p("conv1.bias"), 1);
    h = first.forward(h, params, leaves, "n1.");
    if (spikes) spikes->push_back(h.value());
    h = conv1d(h, p("conv2.weight"), p("conv2.bias"), 1);
    h = second.forward(h, params, leaves, "n2.");
    if (spikes) spikes->push_back(h.value());
    const std::size_t batch = batch_of(x);
    Var pooled = reshape(time_mean(h), Shape{batch, hidden, 1});
    return reshape(conv1d(pooled, p("fc.weight"), p("fc.bias"), 0), Shape{batch, classes});
  }

  double accuracy(const Tensor& x, const std::vector<int>& labels) const {
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& [name, value] : params) leaves.push_back(tape.constant(value));
    const Tensor z = logits(tape, leaves, x).value();
    std::size_t hits = 0;
    for (std::size_t b = 0; b < labels.size(); ++b) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < classes; ++k)
        if (z.at(b, k) > z.at(b, best)) best = k;
      hits += static_cast<int>(best) == labels[b];
    }
    return static_cast<double>(hits) / static_cast<double>(labels.size());
  }
};

}  // namespace

PixelResult run_pixel_task(NeuronKind kind, const PixelConfig& cfg) {
  cfg.train.validate();
  const Dataset data = gen_pixel_dataset(cfg.samples, cfg.train.seed);
  std::mt19937_64 rng(cfg.train.seed + 1);
  PixelNet net(kind, channels_of(data.inputs), cfg.hidden, rng);
  const Tensor x_test = data.gather(data.test);
  const std::vector<int> y_test = data.gather_labels(data.test);

  PixelResult result;
  result.neuron = to_string(kind);
  result.untrained_accuracy = net.accuracy(x_test, y_test);
  result.per_epoch.push_back({0, std::nan(""), std::nan(""), result.untrained_accuracy});
  const std::size_t per_epoch = (data.train.size() + cfg.train.batch_size - 1) / cfg.train.batch_size;
  const std::size_t total = per_epoch * cfg.train.epochs;
  AdamW opt(net.params, cfg.train);
  for (std::size_t epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (const auto& batch : shuffled_batches(data.train, cfg.train.batch_size, rng)) {
      Tape tape;
      const std::vector<Var> leaves = parameter_leaves(tape, net.params);
      const std::vector<int> labels = data.gather_labels(batch);
      const Var loss = softmax_cross_entropy(net.logits(tape, leaves, data.gather(batch)), labels);
      tape.backward(loss);
      loss_sum += loss.value()[0];
      ++batches;
      opt.step(net.params, leaf_grads(leaves), cosine_lr(cfg.train.peak_lr, opt.steps(), total));
    }
    result.per_epoch.push_back({epoch, loss_sum / static_cast<double>(batches), std::nan(""),
                                net.accuracy(x_test, y_test)});
  }
  result.accuracy = result.per_epoch.back().test_accuracy;
  result.spike_limit = kind == NeuronKind::kDsn ? 4 : 1;
  Tape tape;
  std::vector<Var> leaves;
  for (const auto& [name, value] : net.params) leaves.push_back(tape.constant(value));
  std::vector<Tensor> spikes;
  net.logits(tape, leaves, x_test, &spikes);
  for (const Tensor& s : spikes) result.firing_rates.push_back(measure_firing_rate(s, result.spike_limit));
  return result;
}

namespace {

struct Autoregressor {
  std::size_t channels;
  NeuronLayer layer;
  NamedTensors params;

  Autoregressor(NeuronKind kind, std::size_t c, std::size_t t_train, std::size_t sliding_order, std::mt19937_64& rng)
      : channels(c) {
    layer = NeuronLayer{kind, c, t_train};
    layer.order = kind == NeuronKind::kMaskedPsn ? t_train : sliding_order;
    params.emplace_back("enc.weight", uniform_init(Shape{c, 1, 1}, 1, rng));
    params.emplace_back("enc.bias", uniform_init(Shape{c}, 1, rng));
    layer.init(params, "neuron.", rng);
    params.emplace_back("dec.weight", uniform_init(Shape{1, c, 1}, c, rng));
    params.emplace_back("dec.bias", uniform_init(Shape{1}, c, rng));
  }

  Var predict(Tape& tape, const std::vector<Var>& leaves, const Tensor& x, Execution exec) const {
    auto p = [&](const char* name) { return leaf_named(params, leaves, name); };
    Var h = conv1d(tape.constant(x), p("enc.weight"), p("enc.bias"), 0);
    h = layer.forward(h, params, leaves, "neuron.", exec);
    return conv1d(h, p("dec.weight"), p("dec.bias"), 0);
  }

  // Step-by-step evaluation through the neuron's online update, or its
  // sequence mode when it has none.
  Tensor predict_serial(const Tensor& x) const {
    const Tensor& ew = find_tensor(params, "enc.weight");
    const Tensor& eb = find_tensor(params, "enc.bias");
    const Tensor& dw = find_tensor(params, "dec.weight");
    const double db = find_tensor(params, "dec.bias")[0];
    const std::size_t batch = batch_of(x), steps = length_of(x);
    Tensor enc(Shape{batch, channels, steps});
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t t = 0; t < steps; ++t) enc.at(b, c, t) = ew[c] * x.at(b, 0, t) + eb[c];
    const auto neuron = layer.build(params, "neuron.");
    auto stepper = neuron->stepper(batch, channels);
    const Tensor s = stepper ? step_fold(*stepper, enc) : neuron->spikes(enc);
    Tensor out(Shape{batch, 1, steps});
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t t = 0; t < steps; ++t) {
        double acc = db;
        for (std::size_t c = 0; c < channels; ++c) acc += dw[c] * s.at(b, c, t);
        out.at(b, 0, t) = acc;
      }
    return out;
  }
};

// Inputs x_0..x_{T-1} and targets x_1..x_T from [n x 1 x (T + 1)] sequences.
std::pair<Tensor, Tensor> shift_pair(const Tensor& seq) {
  const std::size_t n = batch_of(seq), steps = length_of(seq) - 1;
  Tensor x(Shape{n, 1, steps}), y(Shape{n, 1, steps});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t t = 0; t < steps; ++t) {
      x.at(b, 0, t) = seq.at(b, 0, t);
      y.at(b, 0, t) = seq.at(b, 0, t + 1);
    }
  return {x, y};
}

}  // namespace

ExtrapolationResult run_extrapolation(NeuronKind kind, std::size_t train_length,
                                      const std::vector<std::size_t>& eval_lengths, const ExtrapolationConfig& cfg) {
  cfg.train.validate();
  if (train_length < 2) throw DomainError("extrapolation: train length must be at least 2");
  std::mt19937_64 rng(cfg.train.seed);
  Autoregressor model(kind, cfg.channels, train_length, cfg.sliding_order, rng);
  const Dataset train = gen_autoregression(cfg.train_sequences, train_length, cfg.train.seed + 1);
  const auto [x_all, y_all] = shift_pair(train.inputs);

  ExtrapolationResult result;
  result.neuron = to_string(kind);
  result.train_length = train_length;
  std::vector<std::size_t> all(batch_of(x_all));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const std::size_t per_epoch = (all.size() + cfg.train.batch_size - 1) / cfg.train.batch_size;
  const std::size_t total = per_epoch * cfg.train.epochs;
  AdamW opt(model.params, cfg.train);
  for (std::size_t epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (const auto& batch : shuffled_batches(all, cfg.train.batch_size, rng)) {
      Tape tape;
      const std::vector<Var> leaves = parameter_leaves(tape, model.params);
      const Var loss = mse(model.predict(tape, leaves, rows(x_all, batch), Execution::kParallel), rows(y_all, batch));
      tape.backward(loss);
      loss_sum += loss.value()[0];
      ++batches;
      opt.step(model.params, leaf_grads(leaves), cosine_lr(cfg.train.peak_lr, opt.steps(), total));
    }
    result.per_epoch.push_back({epoch, loss_sum / static_cast<double>(batches), std::nan(""), std::nan("")});
  }

  // Evaluation sequences share a seed across lengths, so shorter ones are
  // prefixes of longer ones.
  const std::uint64_t eval_seed = cfg.train.seed + 2;
  {
    const auto [x, y] = shift_pair(gen_autoregression(cfg.eval_sequences, train_length, eval_seed).inputs);
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& [name, value] : model.params) leaves.push_back(tape.constant(value));
    result.train_mode_loss = mse_value(model.predict(tape, leaves, x, Execution::kParallel).value(), y);
  }
  for (std::size_t length : eval_lengths) {
    const auto [x, y] = shift_pair(gen_autoregression(cfg.eval_sequences, length, eval_seed).inputs);
    result.points.push_back({length, mse_value(model.predict_serial(x), y)});
  }
  return result;
}

std::string to_json(const ApproxResult& r, std::uint64_t seed) {
  Json channels = Json::array();
  for (std::size_t c = 0; c < r.channels.size(); ++c)
    channels.push_back({{"channel", c + 1}, {"target", r.channels[c]}, {"accuracy", r.accuracy[c]}});
  Json j{{"task", "approx"},
         {"neuron", "dynamic-decay"},
         {"dataset", r.dataset},
         {"integer", r.integer},
         {"seed", seed},
         {"parameters", r.parameters},
         {"per_epoch", epochs_json(r.per_epoch)},
         {"final", {{"average_accuracy", r.average}, {"channels", channels}}}};
  if (r.integer) {
    j["final"]["accuracy_within_one"] = r.accuracy_within_one;
    j["final"]["average_within_one"] = mean_of(r.accuracy_within_one);
  }
  return j.dump(2);
}

std::string to_csv(const ApproxResult& r) {
  std::string out = "channel,target,accuracy_percent\n";
  for (std::size_t c = 0; c < r.channels.size(); ++c)
    out += std::to_string(c + 1) + ",\"" + r.channels[c] + "\"," + fixed(100.0 * r.accuracy[c], 2) + "\n";
  out += "average,," + fixed(100.0 * r.average, 2) + "\n";
  return out;
}

std::string to_json(const PixelResult& r, std::uint64_t seed) {
  Json j{{"task", "pixel"},
         {"neuron", r.neuron},
         {"seed", seed},
         {"per_epoch", epochs_json(r.per_epoch)},
         {"final", {{"accuracy", r.accuracy}, {"untrained_accuracy", r.untrained_accuracy}}}};
  Json rates = Json::array();
  for (std::size_t i = 0; i < r.firing_rates.size(); ++i)
    rates.push_back({{"layer", i + 1},
                     {"mean_count", r.firing_rates[i].mean_count},
                     {"normalized", r.firing_rates[i].normalized}});
  j["final"]["spike_limit"] = r.spike_limit;
  j["final"]["firing_rates"] = rates;
  return j.dump(2);
}

std::string to_json(const ExtrapolationResult& r, std::uint64_t seed) {
  Json points = Json::array();
  for (const ExtrapolationPoint& p : r.points) points.push_back({{"length", p.length}, {"loss", p.loss}});
  Json j{{"task", "extrapolate"},
         {"neuron", r.neuron},
         {"seed", seed},
         {"per_epoch", epochs_json(r.per_epoch)},
         {"final", {{"train_length", r.train_length}, {"train_mode_loss", r.train_mode_loss}, {"serial", points}}}};
  return j.dump(2);
}

std::string to_csv(const ExtrapolationResult& r) {
  std::string out = "neuron,length,loss,ratio_to_train\n";
  for (const ExtrapolationPoint& p : r.points)
    out += r.neuron + "," + std::to_string(p.length) + "," + fixed(p.loss, 10) + "," +
           fixed(p.loss / r.train_mode_loss, 6) + "\n";
  return out;
}

}  // namespace spikescan
