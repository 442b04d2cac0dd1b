#include "walkforge/nets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <utility>

#include "walkforge/checkpoint.hpp"
#include "walkforge/error.hpp"

namespace walkforge::nets {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void require(bool ok, Errc code, const char* what) {
  if (!ok) throw Error(code, what);
}

// out[i] = b[i] + sum_j w[i, j] * v[j]
void affine(std::span<const double> w, std::span<const double> b, std::span<const double> v,
            std::span<double> out) {
  const std::size_t cols = v.size();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double* row = w.data() + i * cols;
    double acc = b[i];
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * v[j];
    out[i] = acc;
  }
}

// grad_w[i, j] += dz[i] * v[j]; grad_b[i] += dz[i]; dv[j] += sum_i w[i, j] * dz[i]
void affine_backward(std::span<const double> w, std::span<const double> v,
                     std::span<const double> dz, std::span<double> grad_w,
                     std::span<double> grad_b, std::span<double> dv) {
  const std::size_t cols = v.size();
  for (std::size_t i = 0; i < dz.size(); ++i) {
    const double g = dz[i];
    if (g == 0.0) continue;
    grad_b[i] += g;
    double* gw = grad_w.data() + i * cols;
    const double* row = w.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) {
      gw[j] += g * v[j];
      dv[j] += row[j] * g;
    }
  }
}

Matrix concat_directions(const Matrix& fwd, const Matrix* bwd_reversed) {
  const std::size_t steps = fwd.rows();
  const std::size_t h = fwd.cols();
  Matrix out(steps, bwd_reversed ? 2 * h : h);
  for (std::size_t t = 0; t < steps; ++t) {
    std::copy_n(fwd.row(t).begin(), h, out.row(t).begin());
    if (bwd_reversed) {
      const auto src = bwd_reversed->row(steps - 1 - t);
      std::copy_n(src.begin(), h, out.row(t).begin() + static_cast<std::ptrdiff_t>(h));
    }
  }
  return out;
}

Matrix draw_mask(std::size_t rows, std::size_t cols, Mode mode, double rate, std::mt19937_64& rng) {
  Matrix mask(rows, cols, 1.0);
  if (mode != Mode::Train || rate <= 0.0) return mask;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& m : mask.flat()) m = uniform(rng) < rate ? 0.0 : keep_scale;
  return mask;
}

Matrix relu_masked(const Matrix& pre, const Matrix& mask) {
  Matrix out(pre.rows(), pre.cols());
  for (std::size_t i = 0; i < pre.flat().size(); ++i) {
    out.flat()[i] = std::max(pre.flat()[i], 0.0) * mask.flat()[i];
  }
  return out;
}

// Gradient through out = relu(pre) * mask, in place.
void relu_masked_backward(const Matrix& pre, const Matrix& mask, Matrix& grad) {
  for (std::size_t i = 0; i < grad.flat().size(); ++i) {
    grad.flat()[i] *= pre.flat()[i] > 0.0 ? mask.flat()[i] : 0.0;
  }
}

struct BiTrace {
  LayerTrace fwd;
  LayerTrace bwd;  // run on the reversed sequence
  Matrix out;
};

BiTrace recurrent_layer(const LstmCellParams& fwd, const LstmCellParams* bwd, const Matrix& seq) {
  BiTrace trace;
  trace.fwd = lstm_layer_trace(fwd, seq);
  if (bwd) trace.bwd = lstm_layer_trace(*bwd, reversed_rows(seq));
  trace.out = concat_directions(trace.fwd.hidden, bwd ? &trace.bwd.hidden : nullptr);
  return trace;
}

// Back-propagates d_out (L x dirs*h) through one (bi)directional layer and
// returns the gradient with respect to that layer's input sequence.
Matrix recurrent_layer_backward(const LstmCellParams& fwd, const LstmCellParams* bwd,
                                const LayerTrace& fwd_trace, const LayerTrace& bwd_trace,
                                const Matrix& d_out, LstmCellParams& g_fwd,
                                LstmCellParams* g_bwd) {
  const std::size_t steps = d_out.rows();
  const std::size_t h = fwd.hidden;
  Matrix d_fwd(steps, h);
  for (std::size_t t = 0; t < steps; ++t) std::copy_n(d_out.row(t).begin(), h, d_fwd.row(t).begin());
  Matrix d_in = lstm_layer_backward(fwd, fwd_trace, d_fwd, g_fwd);
  if (bwd) {
    Matrix d_bwd(steps, h);
    for (std::size_t t = 0; t < steps; ++t) {
      const auto src = d_out.row(t);
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(h), h, d_bwd.row(steps - 1 - t).begin());
    }
    const Matrix d_in_rev = lstm_layer_backward(*bwd, bwd_trace, d_bwd, *g_bwd);
    for (std::size_t t = 0; t < steps; ++t) {
      const auto src = d_in_rev.row(steps - 1 - t);
      auto dst = d_in.row(t);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
  }
  return d_in;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

LstmCellParams::LstmCellParams(std::size_t hidden_, std::size_t input_)
    : hidden(hidden_), input(input_) {
  const std::size_t w = hidden * (hidden + input);
  for (auto* m : {&w_c, &w_u, &w_f, &w_o}) m->assign(w, 0.0);
  for (auto* b : {&b_c, &b_u, &b_f, &b_o}) b->assign(hidden, 0.0);
}

std::vector<std::span<double>> LstmCellParams::blocks() {
  return {w_c, w_u, w_f, w_o, b_c, b_u, b_f, b_o};
}

std::vector<std::span<const double>> LstmCellParams::blocks() const {
  return {w_c, w_u, w_f, w_o, b_c, b_u, b_f, b_o};
}

CellCache lstm_cell_forward(const LstmCellParams& p, std::span<const double> a_prev,
                            std::span<const double> c_prev, std::span<const double> x) {
  const std::size_t h = p.hidden;
  require(h >= 1, Errc::ShapeMismatch, "hidden width must be >= 1");
  require(a_prev.size() == h && c_prev.size() == h, Errc::ShapeMismatch, "state width != hidden");
  require(x.size() == p.input, Errc::ShapeMismatch, "input width mismatch");
  require(p.w_c.size() == h * p.concat_width() && p.b_c.size() == h, Errc::ShapeMismatch,
          "cell parameter shape");

  CellCache s;
  s.concat.reserve(p.concat_width());
  s.concat.insert(s.concat.end(), a_prev.begin(), a_prev.end());
  s.concat.insert(s.concat.end(), x.begin(), x.end());
  s.c_prev.assign(c_prev.begin(), c_prev.end());
  for (auto* v : {&s.candidate, &s.update, &s.forget, &s.output, &s.c, &s.tanh_c, &s.a}) {
    v->resize(h);
  }

  affine(p.w_c, p.b_c, s.concat, s.candidate);
  affine(p.w_u, p.b_u, s.concat, s.update);
  affine(p.w_f, p.b_f, s.concat, s.forget);
  affine(p.w_o, p.b_o, s.concat, s.output);
  for (std::size_t i = 0; i < h; ++i) {
    s.candidate[i] = std::tanh(s.candidate[i]);
    s.update[i] = sigmoid(s.update[i]);
    s.forget[i] = sigmoid(s.forget[i]);
    s.output[i] = sigmoid(s.output[i]);
    s.c[i] = s.update[i] * s.candidate[i] + s.forget[i] * c_prev[i];
    s.tanh_c[i] = std::tanh(s.c[i]);
    s.a[i] = s.output[i] * s.tanh_c[i];
    if (!std::isfinite(s.c[i]) || !std::isfinite(s.a[i])) {
      throw Error(Errc::NonFiniteActivation, "LSTM cell state");
    }
  }
  return s;
}

LayerTrace lstm_layer_trace(const LstmCellParams& params, const Matrix& sequence,
                            std::span<const double> a0, std::span<const double> c0) {
  const std::size_t steps = sequence.rows();
  require(steps >= 1, Errc::ShapeMismatch, "sequence must have at least one step");
  const std::vector<double> zeros(params.hidden, 0.0);
  LayerTrace trace;
  trace.hidden = Matrix(steps, params.hidden);
  trace.steps.reserve(steps);
  std::span<const double> a = a0.empty() ? std::span<const double>(zeros) : a0;
  std::span<const double> c = c0.empty() ? std::span<const double>(zeros) : c0;
  for (std::size_t t = 0; t < steps; ++t) {
    trace.steps.push_back(lstm_cell_forward(params, a, c, sequence.row(t)));
    const auto& step = trace.steps.back();
    std::copy(step.a.begin(), step.a.end(), trace.hidden.row(t).begin());
    a = step.a;
    c = step.c;
  }
  return trace;
}

Matrix lstm_layer_forward(const LstmCellParams& params, const Matrix& sequence,
                          std::span<const double> a0, std::span<const double> c0) {
  return lstm_layer_trace(params, sequence, a0, c0).hidden;
}

Matrix lstm_layer_backward(const LstmCellParams& p, const LayerTrace& trace, const Matrix& d_hidden,
                           LstmCellParams& g) {
  const std::size_t h = p.hidden;
  const std::size_t steps = trace.steps.size();
  require(d_hidden.rows() == steps && d_hidden.cols() == h, Errc::ShapeMismatch,
          "hidden gradient shape");
  Matrix d_input(steps, p.input);
  std::vector<double> da_next(h, 0.0);
  std::vector<double> dc_next(h, 0.0);
  std::vector<double> dz_c(h), dz_u(h), dz_f(h), dz_o(h);
  std::vector<double> d_concat(p.concat_width());

  for (std::size_t t = steps; t-- > 0;) {
    const CellCache& s = trace.steps[t];
    for (std::size_t i = 0; i < h; ++i) {
      const double da = d_hidden(t, i) + da_next[i];
      const double dc = dc_next[i] + da * s.output[i] * (1.0 - s.tanh_c[i] * s.tanh_c[i]);
      const double d_out = da * s.tanh_c[i];
      const double d_cand = dc * s.update[i];
      const double d_upd = dc * s.candidate[i];
      const double d_fgt = dc * s.c_prev[i];
      dc_next[i] = dc * s.forget[i];
      dz_c[i] = d_cand * (1.0 - s.candidate[i] * s.candidate[i]);
      dz_u[i] = d_upd * s.update[i] * (1.0 - s.update[i]);
      dz_f[i] = d_fgt * s.forget[i] * (1.0 - s.forget[i]);
      dz_o[i] = d_out * s.output[i] * (1.0 - s.output[i]);
    }
    std::fill(d_concat.begin(), d_concat.end(), 0.0);
    affine_backward(p.w_c, s.concat, dz_c, g.w_c, g.b_c, d_concat);
    affine_backward(p.w_u, s.concat, dz_u, g.w_u, g.b_u, d_concat);
    affine_backward(p.w_f, s.concat, dz_f, g.w_f, g.b_f, d_concat);
    affine_backward(p.w_o, s.concat, dz_o, g.w_o, g.b_o, d_concat);
    std::copy_n(d_concat.begin(), h, da_next.begin());
    std::copy(d_concat.begin() + static_cast<std::ptrdiff_t>(h), d_concat.end(),
              d_input.row(t).begin());
  }
  return d_input;
}

Matrix reversed_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t t = 0; t < m.rows(); ++t) {
    std::copy(m.row(t).begin(), m.row(t).end(), out.row(m.rows() - 1 - t).begin());
  }
  return out;
}

Matrix bilstm_layer_forward(const LstmCellParams& fwd, const LstmCellParams& bwd,
                            const Matrix& sequence) {
  require(fwd.hidden == bwd.hidden && fwd.input == bwd.input, Errc::ShapeMismatch,
          "forward and backward cells differ in shape");
  return recurrent_layer(fwd, &bwd, sequence).out;
}

Network Network::zeros(const NetworkShape& shape, double dropout_rate) {
  require(shape.input >= 1 && shape.hidden1 >= 1 && shape.hidden2 >= 1, Errc::InvalidConfig,
          "network widths must be >= 1");
  require(dropout_rate >= 0.0 && dropout_rate < 1.0, Errc::InvalidConfig,
          "dropout rate must lie in [0, 1)");
  Network net;
  net.shape = shape;
  net.dropout_rate = dropout_rate;
  const std::size_t dirs = shape.bidirectional ? 2 : 1;
  net.layer1_fwd = LstmCellParams(shape.hidden1, shape.input);
  net.layer2_fwd = LstmCellParams(shape.hidden2, dirs * shape.hidden1);
  if (shape.bidirectional) {
    net.layer1_bwd = LstmCellParams(shape.hidden1, shape.input);
    net.layer2_bwd = LstmCellParams(shape.hidden2, dirs * shape.hidden1);
  }
  net.dense_w.assign(dirs * shape.hidden2, 0.0);
  net.dense_b.assign(1, 0.0);
  return net;
}

Network Network::initialized(const NetworkShape& shape, double dropout_rate, std::uint64_t seed) {
  Network net = zeros(shape, dropout_rate);
  std::mt19937_64 rng(seed);
  const auto init_cell = [&](LstmCellParams& cell) {
    if (cell.hidden == 0) return;
    const double bound = 1.0 / std::sqrt(static_cast<double>(cell.concat_width()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto* w : {&cell.w_c, &cell.w_u, &cell.w_f, &cell.w_o}) {
      for (auto& v : *w) v = u(rng);
    }
    std::fill(cell.b_f.begin(), cell.b_f.end(), 1.0);
  };
  init_cell(net.layer1_fwd);
  init_cell(net.layer1_bwd);
  init_cell(net.layer2_fwd);
  init_cell(net.layer2_bwd);
  const double bound = 1.0 / std::sqrt(static_cast<double>(net.dense_w.size()));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (auto& v : net.dense_w) v = u(rng);
  return net;
}

std::vector<std::span<double>> Network::blocks() {
  std::vector<std::span<double>> out;
  for (auto* cell : {&layer1_fwd, &layer1_bwd, &layer2_fwd, &layer2_bwd}) {
    if (cell->hidden == 0) continue;
    for (auto b : cell->blocks()) out.push_back(b);
  }
  out.emplace_back(dense_w);
  out.emplace_back(dense_b);
  return out;
}

std::vector<std::span<const double>> Network::blocks() const {
  std::vector<std::span<const double>> out;
  for (const auto* cell : {&layer1_fwd, &layer1_bwd, &layer2_fwd, &layer2_bwd}) {
    if (cell->hidden == 0) continue;
    for (auto b : cell->blocks()) out.push_back(b);
  }
  out.emplace_back(dense_w);
  out.emplace_back(dense_b);
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto b : blocks()) n += b.size();
  return n;
}

void Network::set_zero() {
  for (auto b : blocks()) std::fill(b.begin(), b.end(), 0.0);
}

ForwardCache network_forward(const Network& net, std::span<const double> sample,
                             std::size_t lookback, Mode mode, std::uint64_t mask_seed) {
  const std::size_t f = net.shape.input;
  require(lookback >= 1 && sample.size() == lookback * f, Errc::ShapeMismatch,
          "sample does not match lookback x input width");

  ForwardCache cache;
  cache.mode = mode;
  cache.input = Matrix(lookback, f);
  std::copy(sample.begin(), sample.end(), cache.input.flat().begin());

  const bool bi = net.shape.bidirectional;
  std::mt19937_64 rng(mask_seed);

  auto l1 = recurrent_layer(net.layer1_fwd, bi ? &net.layer1_bwd : nullptr, cache.input);
  cache.l1_fwd = std::move(l1.fwd);
  cache.l1_bwd = std::move(l1.bwd);
  cache.l1_out = std::move(l1.out);
  cache.l1_mask = draw_mask(lookback, cache.l1_out.cols(), mode, net.dropout_rate, rng);
  cache.l2_in = relu_masked(cache.l1_out, cache.l1_mask);

  auto l2 = recurrent_layer(net.layer2_fwd, bi ? &net.layer2_bwd : nullptr, cache.l2_in);
  cache.l2_fwd = std::move(l2.fwd);
  cache.l2_bwd = std::move(l2.bwd);
  cache.l2_out = std::move(l2.out);
  cache.l2_mask = draw_mask(lookback, cache.l2_out.cols(), mode, net.dropout_rate, rng);
  cache.l2_post = relu_masked(cache.l2_out, cache.l2_mask);

  const auto last = cache.l2_post.row(lookback - 1);
  cache.last.assign(last.begin(), last.end());
  double pred = net.dense_b[0];
  for (std::size_t j = 0; j < cache.last.size(); ++j) pred += net.dense_w[j] * cache.last[j];
  if (!std::isfinite(pred)) throw Error(Errc::NonFiniteActivation, "network output");
  cache.prediction = pred;
  cache.valid = true;
  return cache;
}

double predict(const Network& net, std::span<const double> sample, std::size_t lookback) {
  return network_forward(net, sample, lookback, Mode::Eval).prediction;
}

std::vector<double> predict_all(const Network& net, const splitter::SampleSet& samples) {
  std::vector<double> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out[i] = predict(net, samples.sample(i), samples.lookback);
  }
  return out;
}

void network_backward(const Network& net, const ForwardCache& cache, double d_pred,
                      Network& grads) {
  if (!cache.valid || cache.mode != Mode::Train) {
    throw Error(Errc::StaleCache, "backward needs a train-mode forward cache");
  }
  require(grads.shape == net.shape, Errc::ShapeMismatch, "gradient buffer shape");
  const bool bi = net.shape.bidirectional;
  const std::size_t steps = cache.input.rows();

  for (std::size_t j = 0; j < cache.last.size(); ++j) grads.dense_w[j] += d_pred * cache.last[j];
  grads.dense_b[0] += d_pred;

  Matrix d_l2(steps, cache.l2_out.cols());
  for (std::size_t j = 0; j < d_l2.cols(); ++j) d_l2(steps - 1, j) = d_pred * net.dense_w[j];
  relu_masked_backward(cache.l2_out, cache.l2_mask, d_l2);
  Matrix d_l1 = recurrent_layer_backward(net.layer2_fwd, bi ? &net.layer2_bwd : nullptr,
                                         cache.l2_fwd, cache.l2_bwd, d_l2, grads.layer2_fwd,
                                         bi ? &grads.layer2_bwd : nullptr);
  relu_masked_backward(cache.l1_out, cache.l1_mask, d_l1);
  recurrent_layer_backward(net.layer1_fwd, bi ? &net.layer1_bwd : nullptr, cache.l1_fwd,
                           cache.l1_bwd, d_l1, grads.layer1_fwd, bi ? &grads.layer1_bwd : nullptr);
}

LossResult logcosh_loss(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(preds.size()) + " predictions vs " +
                                          std::to_string(targets.size()) + " targets");
  }
  LossResult out;
  out.grad.resize(preds.size());
  if (preds.empty()) return out;
  const double m = static_cast<double>(preds.size());
  const double log2 = std::log(2.0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double r = preds[i] - targets[i];
    const double ar = std::abs(r);
    out.loss += ar + std::log1p(std::exp(-2.0 * ar)) - log2;
    out.grad[i] = std::tanh(r) / m;
  }
  out.loss /= m;
  return out;
}

void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state,
               const AdamConfig& config) {
  require(params.size() == grads.size(), Errc::ShapeMismatch, "parameter/gradient block count");
  std::size_t total = 0;
  double sq = 0.0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    require(params[b].size() == grads[b].size(), Errc::ShapeMismatch, "parameter/gradient block size");
    total += params[b].size();
    for (const double g : grads[b]) sq += g * g;
  }
  if (state.m.empty() && state.v.empty() && state.step == 0) {
    state.m.assign(total, 0.0);
    state.v.assign(total, 0.0);
  }
  require(state.m.size() == total && state.v.size() == total, Errc::ShapeMismatch,
          "optimizer state size");

  const double norm = std::sqrt(sq);
  const double scale = (config.clip_norm > 0.0 && norm > config.clip_norm) ? config.clip_norm / norm : 1.0;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(config.beta1, t);
  const double bias2 = 1.0 - std::pow(config.beta2, t);

  std::size_t k = 0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    for (std::size_t i = 0; i < params[b].size(); ++i, ++k) {
      const double g = scale * grads[b][i];
      state.m[k] = config.beta1 * state.m[k] + (1.0 - config.beta1) * g;
      state.v[k] = config.beta2 * state.v[k] + (1.0 - config.beta2) * g * g;
      const double m_hat = state.m[k] / bias1;
      const double v_hat = state.v[k] / bias2;
      params[b][i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config) {
  const std::span<double> p[] = {params};
  const std::span<const double> g[] = {grads};
  adam_step(p, g, state, config);
}

std::vector<double> train(Network& net, const splitter::SampleSet& samples,
                          const TrainConfig& config) {
  require(samples.size() >= 1, Errc::EmptyRange, "no training samples");
  require(samples.n_features == net.shape.input, Errc::ShapeMismatch,
          "sample feature width != network input");
  require(config.epochs >= 1 && config.batch_size >= 1, Errc::InvalidConfig,
          "epochs and batch_size must be >= 1");
  require(config.dropout_rate >= 0.0 && config.dropout_rate < 1.0, Errc::InvalidConfig,
          "dropout rate must lie in [0, 1)");
  net.dropout_rate = config.dropout_rate;

  Network grads = Network::zeros(net.shape, net.dropout_rate);
  AdamState state;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(config.seed);
  std::vector<double> history;
  history.reserve(config.epochs);

  std::vector<ForwardCache> caches;
  std::vector<double> preds;
  std::vector<double> targets;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const std::uint64_t epoch_seed = mix_seed(config.seed, epoch);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(start + config.batch_size, order.size());
      caches.clear();
      preds.clear();
      targets.clear();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        caches.push_back(network_forward(net, samples.sample(idx), samples.lookback, Mode::Train,
                                         mix_seed(epoch_seed, idx)));
        preds.push_back(caches.back().prediction);
        targets.push_back(samples.targets[idx]);
      }
      const auto loss = logcosh_loss(preds, targets);
      epoch_loss += loss.loss * static_cast<double>(end - start);
      grads.set_zero();
      for (std::size_t k = 0; k < caches.size(); ++k) {
        network_backward(net, caches[k], loss.grad[k], grads);
      }
      const auto p = net.blocks();
      const auto g = std::as_const(grads).blocks();
      adam_step(p, g, state, config.adam);
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss)) {
      throw Error(Errc::DivergedLoss, "epoch " + std::to_string(epoch));
    }
    history.push_back(epoch_loss);
  }
  return history;
}

void save(const Network& net, std::ostream& out) {
  write_checkpoint_header(out, net.shape.bidirectional ? ModelTag::BiLstm : ModelTag::Lstm);
  binio::write<std::uint64_t>(out, net.shape.input);
  binio::write<std::uint64_t>(out, net.shape.hidden1);
  binio::write<std::uint64_t>(out, net.shape.hidden2);
  binio::write<double>(out, net.dropout_rate);
  binio::write<std::uint64_t>(out, net.parameter_count());
  for (const auto b : net.blocks()) binio::write_doubles(out, b);
}

Network load(std::istream& in) {
  const ModelTag tag = read_checkpoint_header(in);
  if (tag != ModelTag::BiLstm && tag != ModelTag::Lstm) {
    throw Error(Errc::BadArtifact, "checkpoint does not hold a recurrent network");
  }
  NetworkShape shape;
  shape.bidirectional = tag == ModelTag::BiLstm;
  shape.input = binio::read<std::uint64_t>(in);
  shape.hidden1 = binio::read<std::uint64_t>(in);
  shape.hidden2 = binio::read<std::uint64_t>(in);
  const double dropout = binio::read<double>(in);
  Network net = Network::zeros(shape, dropout);
  if (binio::read<std::uint64_t>(in) != net.parameter_count()) {
    throw Error(Errc::BadArtifact, "checkpoint parameter count mismatch");
  }
  for (auto b : net.blocks()) binio::read_doubles(in, b);
  return net;
}

void write_loss_csv(std::span<const double> history, std::ostream& out) {
  out << "epoch,loss\n";
  char buf[32];
  for (std::size_t e = 0; e < history.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%.17g", history[e]);
    out << e << ',' << buf << '\n';
  }
}

}  // namespace walkforge::nets
