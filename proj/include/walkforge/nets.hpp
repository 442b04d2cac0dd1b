#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "walkforge/matrix.hpp"
#include "walkforge/splitter.hpp"

namespace walkforge::nets {

/// One LSTM cell. Every gate matrix is hidden x (hidden + input), row-major,
/// and multiplies the concatenation [a_prev, x].
struct LstmCellParams {
  std::size_t hidden = 0;
  std::size_t input = 0;
  std::vector<double> w_c, w_u, w_f, w_o;
  std::vector<double> b_c, b_u, b_f, b_o;

  LstmCellParams() = default;
  LstmCellParams(std::size_t hidden, std::size_t input);

  std::size_t concat_width() const noexcept { return hidden + input; }
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
};

/// Activations of one cell step, kept for the backward pass.
struct CellCache {
  std::vector<double> concat;  // [a_prev, x]
  std::vector<double> c_prev;
  std::vector<double> candidate;  // c~
  std::vector<double> update;     // Gamma_u
  std::vector<double> forget;     // Gamma_f
  std::vector<double> output;     // Gamma_o
  std::vector<double> c;
  std::vector<double> tanh_c;
  std::vector<double> a;
};

CellCache lstm_cell_forward(const LstmCellParams& params, std::span<const double> a_prev,
                            std::span<const double> c_prev, std::span<const double> x);

/// Hidden states of every step plus per-step caches.
struct LayerTrace {
  std::vector<CellCache> steps;
  Matrix hidden;  // L x h
};

/// Runs the cell left to right from (a0, c0); empty spans mean zeros.
LayerTrace lstm_layer_trace(const LstmCellParams& params, const Matrix& sequence,
                            std::span<const double> a0 = {}, std::span<const double> c0 = {});
Matrix lstm_layer_forward(const LstmCellParams& params, const Matrix& sequence,
                          std::span<const double> a0 = {}, std::span<const double> c0 = {});

/// Accumulates parameter gradients for d(loss)/d(hidden) and returns
/// d(loss)/d(input sequence). Flows through both the a and c recurrences.
Matrix lstm_layer_backward(const LstmCellParams& params, const LayerTrace& trace,
                           const Matrix& d_hidden, LstmCellParams& grads);

Matrix reversed_rows(const Matrix& m);

/// output[t] = [forward(x)[t], reverse(backward(reverse(x)))[t]], L x 2h.
Matrix bilstm_layer_forward(const LstmCellParams& fwd, const LstmCellParams& bwd,
                            const Matrix& sequence);

struct NetworkShape {
  std::size_t input = 0;
  std::size_t hidden1 = 800;
  std::size_t hidden2 = 1000;
  bool bidirectional = true;

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

/// Two recurrent layers (each followed by ReLU and dropout) and a single
/// linear output unit read from the last time step. With bidirectional=false
/// this is the plain LSTM model and the backward cells are empty.
struct Network {
  NetworkShape shape;
  double dropout_rate = 0.2;
  LstmCellParams layer1_fwd, layer1_bwd;
  LstmCellParams layer2_fwd, layer2_bwd;
  std::vector<double> dense_w;
  std::vector<double> dense_b;  // single element

  static Network zeros(const NetworkShape& shape, double dropout_rate = 0.0);
  /// Uniform +-1/sqrt(fan_in) weights, forget bias 1, remaining biases 0.
  static Network initialized(const NetworkShape& shape, double dropout_rate, std::uint64_t seed);

  std::size_t directions() const noexcept { return shape.bidirectional ? 2 : 1; }
  std::size_t parameter_count() const;
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
  void set_zero();
};

enum class Mode { Train, Eval };

struct ForwardCache {
  Mode mode = Mode::Eval;
  bool valid = false;
  Matrix input;  // L x F
  LayerTrace l1_fwd, l1_bwd, l2_fwd, l2_bwd;
  Matrix l1_out, l1_mask, l2_in;  // pre-ReLU output, dropout scale, post-dropout
  Matrix l2_out, l2_mask, l2_post;
  std::vector<double> last;  // dense input
  double prediction = 0.0;
};

/// Forward pass for one sample (L x F, row-major). In train mode dropout draws
/// a keep-mask from `mask_seed` and rescales survivors by 1 / (1 - rate).
ForwardCache network_forward(const Network& net, std::span<const double> sample,
                             std::size_t lookback, Mode mode, std::uint64_t mask_seed = 0);

double predict(const Network& net, std::span<const double> sample, std::size_t lookback);
std::vector<double> predict_all(const Network& net, const splitter::SampleSet& samples);

/// Accumulates d(loss)/d(params) for upstream gradient d_pred into grads.
void network_backward(const Network& net, const ForwardCache& cache, double d_pred,
                      Network& grads);

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  // d(loss)/d(pred_i)
};

/// Mean log(cosh(p - y)) via |r| + log1p(exp(-2|r|)) - log 2; gradient tanh(r)/m.
LossResult logcosh_loss(std::span<const double> preds, std::span<const double> targets);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 1.0;  // global L2 norm; 0 disables clipping
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

/// Global-norm clipping followed by one bias-corrected Adam update. The
/// parameter and gradient block lists must have matching shapes.
void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state,
               const AdamConfig& config);
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  AdamConfig adam;
  double dropout_rate = 0.2;
  std::uint64_t seed = 0;
};

/// Mini-batch training on log-cosh loss. Sets net.dropout_rate from the
/// config. Returns the mean loss of each epoch.
std::vector<double> train(Network& net, const splitter::SampleSet& samples,
                          const TrainConfig& config);

void save(const Network& net, std::ostream& out);
Network load(std::istream& in);
void write_loss_csv(std::span<const double> history, std::ostream& out);

/// splitmix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace walkforge::nets
