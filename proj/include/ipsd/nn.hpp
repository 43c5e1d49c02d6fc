#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace ipsd {

// rows = channels/features, cols = time steps
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Handle to one trainable tensor: values and the matching gradient buffer.
struct ParamRef {
  std::string name;
  double* value = nullptr;
  double* grad = nullptr;
  std::size_t size = 0;
  std::vector<int> dims;
};

// Uniform init in +-sqrt(1/fan_in); biases are initialised to zero so a
// freshly built network maps the zero signal to zero.
void init_uniform(Mat& m, int fan_in, std::mt19937_64& rng);

// 1D convolution, kernel 3, stride 1, zero padding 1 (output length equals
// input length). Weights are stored as one out_ch x in_ch matrix per tap so
// the forward pass is three shifted matrix products.
class Conv1d {
 public:
  Conv1d(int in_channels, int out_channels);

  struct Cache {
    Mat input;
  };

  Mat forward(const Mat& x, Cache* cache = nullptr) const;
  // Accumulates parameter gradients and returns the input gradient.
  Mat backward(const Mat& grad_out, const Cache& cache);

  void init(std::mt19937_64& rng);
  void collect_params(std::vector<ParamRef>& out, const std::string& prefix);
  void zero_grads();

  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }

  std::array<Mat, 3>& taps() { return w_; }
  Vec& bias() { return b_; }

 private:
  int in_ch_ = 0;
  int out_ch_ = 0;
  std::array<Mat, 3> w_, gw_;
  Vec b_, gb_;
};

Mat leaky_relu(const Mat& x, double slope = 0.01);
std::vector<double> leaky_relu(const std::vector<double>& x, double slope = 0.01);
Mat leaky_relu_backward(const Mat& grad_out, const Mat& pre_activation, double slope = 0.01);

Mat relu(const Mat& x);
Mat relu_backward(const Mat& grad_out, const Mat& pre_activation);

// Affine map applied per time step: [in x T] -> [out x T].
class Linear {
 public:
  Linear(int in_dim, int out_dim);

  struct Cache {
    Mat input;
  };

  Mat forward(const Mat& x, Cache* cache = nullptr) const;
  Mat backward(const Mat& grad_out, const Cache& cache);

  void init(std::mt19937_64& rng);
  void collect_params(std::vector<ParamRef>& out, const std::string& prefix);
  void zero_grads();

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  Mat& weight() { return w_; }
  Vec& bias() { return b_; }

 private:
  int in_dim_ = 0, out_dim_ = 0;
  Mat w_, gw_;
  Vec b_, gb_;
};

// Single-direction gated recurrent unit over a [in x T] sequence, hidden
// state starts at zero. Gate equations:
//   z_t = sigmoid(Wz x_t + Uz h_{t-1} + bz)
//   r_t = sigmoid(Wr x_t + Ur h_{t-1} + br)
//   c_t = tanh(Wh x_t + Uh (r_t . h_{t-1}) + bh)
//   h_t = (1 - z_t) . h_{t-1} + z_t . c_t
class Gru {
 public:
  Gru(int in_dim, int hidden_dim);

  struct Cache {
    Mat x;        // [in x T]
    Mat h;        // [H x (T+1)], column 0 is h_0 = 0
    Mat z, r, c;  // gate activations per step
    Mat rh;       // r_t . h_{t-1}
  };

  Mat forward(const Mat& x, Cache* cache = nullptr) const;
  Mat backward(const Mat& grad_out, const Cache& cache);

  void init(std::mt19937_64& rng);
  void collect_params(std::vector<ParamRef>& out, const std::string& prefix);
  void zero_grads();

  int in_dim() const { return in_dim_; }
  int hidden_dim() const { return hidden_; }
  Vec& candidate_bias() { return bh_; }

 private:
  int in_dim_ = 0, hidden_ = 0;
  Mat wz_, wr_, wh_;  // H x in
  Mat uz_, ur_, uh_;  // H x H
  Vec bz_, br_, bh_;
  Mat gwz_, gwr_, gwh_, guz_, gur_, guh_;
  Vec gbz_, gbr_, gbh_;
};

// Two independent GRUs; the second runs over the reversed sequence and its
// outputs are re-reversed, then both are concatenated per step to [2H x T].
class BidirGru {
 public:
  BidirGru(int in_dim, int hidden_dim);

  struct Cache {
    Gru::Cache fwd, bwd;
  };

  Mat forward(const Mat& x, Cache* cache = nullptr) const;
  Mat backward(const Mat& grad_out, const Cache& cache);

  void init(std::mt19937_64& rng);
  void collect_params(std::vector<ParamRef>& out, const std::string& prefix);
  void zero_grads();

  int out_dim() const { return 2 * fwd_.hidden_dim(); }
  Gru& forward_cell() { return fwd_; }
  Gru& backward_cell() { return bwd_; }

 private:
  Gru fwd_, bwd_;
};

// Numerically stable log-softmax over each column.
Mat log_softmax_cols(const Mat& logits);
Vec log_softmax(const Vec& logits);

// Draws an index from the categorical distribution given by one column of
// log-probabilities.
int sample_categorical(const Eigen::Ref<const Vec>& log_probs, std::mt19937_64& rng);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam with bias correction over a fixed set of parameter tensors.
class Adam {
 public:
  Adam(std::vector<ParamRef> params, AdamConfig cfg);

  // One update using the gradients currently stored in the ParamRefs.
  void step();
  void zero_grads();
  std::int64_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  std::vector<ParamRef> params_;
  AdamConfig cfg_;
  std::vector<double> m_, v_;
  std::int64_t t_ = 0;
};

// Hooks for checking analytic gradients against central finite differences.
struct GradCheckTarget {
  std::vector<ParamRef> params;
  std::function<double()> loss;               // loss at current parameters
  std::function<double()> loss_with_grads;    // same, but also fills gradients
};

// Max over parameters of |analytic - central difference| /
// max(|analytic|, |cd|, 1e-12). With num_shards > 1, only every
// num_shards-th scalar (starting at shard) is perturbed, so independent
// copies of a network can split the sweep across threads.
double max_relative_grad_error(GradCheckTarget& target, double eps = 1e-5, int shard = 0,
                               int num_shards = 1);

// Checkpoint: raw little-endian doubles in ParamRef order plus a text
// manifest with one line per tensor.
void save_checkpoint(const std::vector<ParamRef>& params, const std::string& bin_path,
                     const std::string& manifest_path);
void load_checkpoint(std::vector<ParamRef>& params, const std::string& bin_path,
                     const std::string& manifest_path);

}  // namespace ipsd
