#include "ipsd/nn.hpp"

#include "ipsd/errors.hpp"

#include <bit>
#include <cassert>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ipsd {

void init_uniform(Mat& m, int fan_in, std::mt19937_64& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
}

namespace {

ParamRef make_ref(const std::string& name, Mat& value, Mat& grad, std::vector<int> dims) {
  return ParamRef{name, value.data(), grad.data(), static_cast<std::size_t>(value.size()),
                  std::move(dims)};
}

ParamRef make_ref(const std::string& name, Vec& value, Vec& grad) {
  return ParamRef{name, value.data(), grad.data(), static_cast<std::size_t>(value.size()),
                  {static_cast<int>(value.size())}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Conv1d

Conv1d::Conv1d(int in_channels, int out_channels) : in_ch_(in_channels), out_ch_(out_channels) {
  if (in_ch_ <= 0 || out_ch_ <= 0) throw std::invalid_argument("channel counts must be positive");
  for (auto& w : w_) w = Mat::Zero(out_ch_, in_ch_);
  for (auto& g : gw_) g = Mat::Zero(out_ch_, in_ch_);
  b_ = Vec::Zero(out_ch_);
  gb_ = Vec::Zero(out_ch_);
}

Mat Conv1d::forward(const Mat& x, Cache* cache) const {
  if (x.rows() != in_ch_)
    throw std::invalid_argument("conv input has wrong channel count");
  const Eigen::Index t = x.cols();
  Mat y(out_ch_, t);
  y.noalias() = w_[1] * x;
  if (t > 1) {
    y.rightCols(t - 1).noalias() += w_[0] * x.leftCols(t - 1);
    y.leftCols(t - 1).noalias() += w_[2] * x.rightCols(t - 1);
  }
  y.colwise() += b_;
  if (cache) cache->input = x;
  return y;
}

Mat Conv1d::backward(const Mat& grad_out, const Cache& cache) {
  const Mat& x = cache.input;
  if (grad_out.rows() != out_ch_ || grad_out.cols() != x.cols())
    throw std::invalid_argument("conv gradient has wrong shape");
  const Eigen::Index t = x.cols();

  gb_ += grad_out.rowwise().sum();
  gw_[1].noalias() += grad_out * x.transpose();
  Mat dx(in_ch_, t);
  dx.noalias() = w_[1].transpose() * grad_out;
  if (t > 1) {
    gw_[0].noalias() += grad_out.rightCols(t - 1) * x.leftCols(t - 1).transpose();
    gw_[2].noalias() += grad_out.leftCols(t - 1) * x.rightCols(t - 1).transpose();
    dx.leftCols(t - 1).noalias() += w_[0].transpose() * grad_out.rightCols(t - 1);
    dx.rightCols(t - 1).noalias() += w_[2].transpose() * grad_out.leftCols(t - 1);
  }
  return dx;
}

void Conv1d::init(std::mt19937_64& rng) {
  const int fan_in = in_ch_ * 3;
  for (auto& w : w_) init_uniform(w, fan_in, rng);
  b_.setZero();
}

void Conv1d::collect_params(std::vector<ParamRef>& out, const std::string& prefix) {
  for (int k = 0; k < 3; ++k)
    out.push_back(make_ref(prefix + ".w" + std::to_string(k), w_[k], gw_[k], {out_ch_, in_ch_}));
  out.push_back(make_ref(prefix + ".b", b_, gb_));
}

void Conv1d::zero_grads() {
  for (auto& g : gw_) g.setZero();
  gb_.setZero();
}

// ---------------------------------------------------------------------------
// Activations

Mat leaky_relu(const Mat& x, double slope) {
  return x.array().max(x.array() * slope).matrix();
}

std::vector<double> leaky_relu(const std::vector<double>& x, double slope) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] >= 0.0 ? x[i] : slope * x[i];
  return y;
}

Mat leaky_relu_backward(const Mat& grad_out, const Mat& pre_activation, double slope) {
  return (pre_activation.array() >= 0.0)
      .select(grad_out.array(), grad_out.array() * slope)
      .matrix();
}

Mat relu(const Mat& x) { return x.array().max(0.0).matrix(); }

Mat relu_backward(const Mat& grad_out, const Mat& pre_activation) {
  return (pre_activation.array() > 0.0).select(grad_out.array(), 0.0).matrix();
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(int in_dim, int out_dim) : in_dim_(in_dim), out_dim_(out_dim) {
  if (in_dim_ <= 0 || out_dim_ <= 0) throw std::invalid_argument("dimensions must be positive");
  w_ = Mat::Zero(out_dim_, in_dim_);
  gw_ = Mat::Zero(out_dim_, in_dim_);
  b_ = Vec::Zero(out_dim_);
  gb_ = Vec::Zero(out_dim_);
}

Mat Linear::forward(const Mat& x, Cache* cache) const {
  if (x.rows() != in_dim_) throw std::invalid_argument("linear input has wrong dimension");
  Mat y = w_ * x;
  y.colwise() += b_;
  if (cache) cache->input = x;
  return y;
}

Mat Linear::backward(const Mat& grad_out, const Cache& cache) {
  if (grad_out.rows() != out_dim_ || grad_out.cols() != cache.input.cols())
    throw std::invalid_argument("linear gradient has wrong shape");
  gw_.noalias() += grad_out * cache.input.transpose();
  gb_ += grad_out.rowwise().sum();
  return w_.transpose() * grad_out;
}

void Linear::init(std::mt19937_64& rng) {
  init_uniform(w_, in_dim_, rng);
  b_.setZero();
}

void Linear::collect_params(std::vector<ParamRef>& out, const std::string& prefix) {
  out.push_back(make_ref(prefix + ".w", w_, gw_, {out_dim_, in_dim_}));
  out.push_back(make_ref(prefix + ".b", b_, gb_));
}

void Linear::zero_grads() {
  gw_.setZero();
  gb_.setZero();
}

// ---------------------------------------------------------------------------
// Gru

namespace {

inline Vec sigmoid(const Vec& a) { return (1.0 / (1.0 + (-a.array()).exp())).matrix(); }

}  // namespace

Gru::Gru(int in_dim, int hidden_dim) : in_dim_(in_dim), hidden_(hidden_dim) {
  if (in_dim_ <= 0 || hidden_ <= 0) throw std::invalid_argument("dimensions must be positive");
  wz_ = wr_ = wh_ = Mat::Zero(hidden_, in_dim_);
  uz_ = ur_ = uh_ = Mat::Zero(hidden_, hidden_);
  bz_ = br_ = bh_ = Vec::Zero(hidden_);
  gwz_ = gwr_ = gwh_ = Mat::Zero(hidden_, in_dim_);
  guz_ = gur_ = guh_ = Mat::Zero(hidden_, hidden_);
  gbz_ = gbr_ = gbh_ = Vec::Zero(hidden_);
}

Mat Gru::forward(const Mat& x, Cache* cache) const {
  if (x.rows() != in_dim_) throw std::invalid_argument("gru input has wrong dimension");
  const Eigen::Index t_len = x.cols();

  // Input projections for all steps at once.
  Mat xz = wz_ * x;
  xz.colwise() += bz_;
  Mat xr = wr_ * x;
  xr.colwise() += br_;
  Mat xh = wh_ * x;
  xh.colwise() += bh_;

  Mat h = Mat::Zero(hidden_, t_len + 1);
  Mat z(hidden_, t_len), r(hidden_, t_len), c(hidden_, t_len), rh(hidden_, t_len);

  for (Eigen::Index t = 0; t < t_len; ++t) {
    const auto h_prev = h.col(t);
    const Vec zt = sigmoid(xz.col(t) + uz_ * h_prev);
    const Vec rt = sigmoid(xr.col(t) + ur_ * h_prev);
    const Vec rht = rt.cwiseProduct(h_prev);
    const Vec ct = (xh.col(t) + uh_ * rht).array().tanh().matrix();
    h.col(t + 1) = (1.0 - zt.array()) * h_prev.array() + zt.array() * ct.array();
    z.col(t) = zt;
    r.col(t) = rt;
    c.col(t) = ct;
    rh.col(t) = rht;
  }

  if (cache) {
    cache->x = x;
    cache->h = h;
    cache->z = z;
    cache->r = r;
    cache->c = c;
    cache->rh = rh;
  }
  return h.rightCols(t_len);
}

Mat Gru::backward(const Mat& grad_out, const Cache& cache) {
  const Eigen::Index t_len = cache.x.cols();
  if (grad_out.rows() != hidden_ || grad_out.cols() != t_len)
    throw std::invalid_argument("gru gradient has wrong shape");

  Mat dx(in_dim_, t_len);
  Vec dh = Vec::Zero(hidden_);

  for (Eigen::Index t = t_len - 1; t >= 0; --t) {
    dh += grad_out.col(t);
    const auto h_prev = cache.h.col(t);
    const auto z = cache.z.col(t);
    const auto r = cache.r.col(t);
    const auto c = cache.c.col(t);

    const Vec dz = dh.cwiseProduct(c - h_prev);
    const Vec dc = dh.cwiseProduct(z);
    Vec dh_prev = dh.cwiseProduct(Vec::Ones(hidden_) - z);

    const Vec dah = dc.array() * (1.0 - c.array().square());
    const Vec daz = dz.array() * z.array() * (1.0 - z.array());

    const Vec drh = uh_.transpose() * dah;
    const Vec dr = drh.cwiseProduct(h_prev);
    const Vec dar = dr.array() * r.array() * (1.0 - r.array());

    gwh_.noalias() += dah * cache.x.col(t).transpose();
    guh_.noalias() += dah * cache.rh.col(t).transpose();
    gbh_ += dah;
    gwz_.noalias() += daz * cache.x.col(t).transpose();
    guz_.noalias() += daz * h_prev.transpose();
    gbz_ += daz;
    gwr_.noalias() += dar * cache.x.col(t).transpose();
    gur_.noalias() += dar * h_prev.transpose();
    gbr_ += dar;

    dx.col(t).noalias() = wz_.transpose() * daz;
    dx.col(t).noalias() += wr_.transpose() * dar;
    dx.col(t).noalias() += wh_.transpose() * dah;

    dh_prev += drh.cwiseProduct(r);
    dh_prev.noalias() += uz_.transpose() * daz;
    dh_prev.noalias() += ur_.transpose() * dar;
    dh = dh_prev;
  }
  return dx;
}

void Gru::init(std::mt19937_64& rng) {
  init_uniform(wz_, in_dim_, rng);
  init_uniform(wr_, in_dim_, rng);
  init_uniform(wh_, in_dim_, rng);
  init_uniform(uz_, hidden_, rng);
  init_uniform(ur_, hidden_, rng);
  init_uniform(uh_, hidden_, rng);
  bz_.setZero();
  br_.setZero();
  bh_.setZero();
}

void Gru::collect_params(std::vector<ParamRef>& out, const std::string& prefix) {
  out.push_back(make_ref(prefix + ".wz", wz_, gwz_, {hidden_, in_dim_}));
  out.push_back(make_ref(prefix + ".wr", wr_, gwr_, {hidden_, in_dim_}));
  out.push_back(make_ref(prefix + ".wh", wh_, gwh_, {hidden_, in_dim_}));
  out.push_back(make_ref(prefix + ".uz", uz_, guz_, {hidden_, hidden_}));
  out.push_back(make_ref(prefix + ".ur", ur_, gur_, {hidden_, hidden_}));
  out.push_back(make_ref(prefix + ".uh", uh_, guh_, {hidden_, hidden_}));
  out.push_back(make_ref(prefix + ".bz", bz_, gbz_));
  out.push_back(make_ref(prefix + ".br", br_, gbr_));
  out.push_back(make_ref(prefix + ".bh", bh_, gbh_));
}

void Gru::zero_grads() {
  gwz_.setZero();
  gwr_.setZero();
  gwh_.setZero();
  guz_.setZero();
  gur_.setZero();
  guh_.setZero();
  gbz_.setZero();
  gbr_.setZero();
  gbh_.setZero();
}

// ---------------------------------------------------------------------------
// BidirGru

BidirGru::BidirGru(int in_dim, int hidden_dim) : fwd_(in_dim, hidden_dim), bwd_(in_dim, hidden_dim) {}

Mat BidirGru::forward(const Mat& x, Cache* cache) const {
  const Eigen::Index t = x.cols();
  const int h = fwd_.hidden_dim();
  Mat out(2 * h, t);
  out.topRows(h) = fwd_.forward(x, cache ? &cache->fwd : nullptr);
  const Mat x_rev = x.rowwise().reverse();
  const Mat hb = bwd_.forward(x_rev, cache ? &cache->bwd : nullptr);
  out.bottomRows(h) = hb.rowwise().reverse();
  return out;
}

Mat BidirGru::backward(const Mat& grad_out, const Cache& cache) {
  const int h = fwd_.hidden_dim();
  Mat dx = fwd_.backward(grad_out.topRows(h), cache.fwd);
  const Mat g_rev = grad_out.bottomRows(h).rowwise().reverse();
  dx += bwd_.backward(g_rev, cache.bwd).rowwise().reverse();
  return dx;
}

void BidirGru::init(std::mt19937_64& rng) {
  fwd_.init(rng);
  bwd_.init(rng);
}

void BidirGru::collect_params(std::vector<ParamRef>& out, const std::string& prefix) {
  fwd_.collect_params(out, prefix + ".fwd");
  bwd_.collect_params(out, prefix + ".bwd");
}

void BidirGru::zero_grads() {
  fwd_.zero_grads();
  bwd_.zero_grads();
}

// ---------------------------------------------------------------------------
// Softmax / sampling

Mat log_softmax_cols(const Mat& logits) {
  Mat out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double m = logits.col(j).maxCoeff();
    const Vec shifted = logits.col(j).array() - m;
    const double lse = std::log(shifted.array().exp().sum());
    out.col(j) = shifted.array() - lse;
  }
  return out;
}

Vec log_softmax(const Vec& logits) {
  const double m = logits.maxCoeff();
  const Vec shifted = logits.array() - m;
  const double lse = std::log(shifted.array().exp().sum());
  return shifted.array() - lse;
}

int sample_categorical(const Eigen::Ref<const Vec>& log_probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cum = 0.0;
  const int n = static_cast<int>(log_probs.size());
  for (int i = 0; i < n; ++i) {
    cum += std::exp(log_probs[i]);
    if (u < cum) return i;
  }
  return n - 1;
}

// ---------------------------------------------------------------------------
// Adam

Adam::Adam(std::vector<ParamRef> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  std::size_t total = 0;
  for (const auto& p : params_) {
    if (p.value == nullptr || p.grad == nullptr || p.size == 0)
      throw std::invalid_argument("adam parameter '" + p.name + "' is not backed by storage");
    total += p.size;
  }
  m_.assign(total, 0.0);
  v_.assign(total, 0.0);
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  std::size_t offset = 0;
  for (const auto& p : params_) {
    double* m = m_.data() + offset;
    double* v = v_.data() + offset;
    for (std::size_t i = 0; i < p.size; ++i) {
      const double g = p.grad[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    offset += p.size;
  }
}

void Adam::zero_grads() {
  for (const auto& p : params_) std::memset(p.grad, 0, p.size * sizeof(double));
}

// ---------------------------------------------------------------------------
// Gradient checking

double max_relative_grad_error(GradCheckTarget& target, double eps, int shard, int num_shards) {
  target.loss_with_grads();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(target.params.size());
  for (const auto& p : target.params) analytic.emplace_back(p.grad, p.grad + p.size);

  // A central difference is invalid when the perturbation crosses a kink of
  // a piecewise-linear activation. Kink crossings are step-size artefacts:
  // they disappear under a smaller step, while a genuine gradient mismatch
  // persists, so failing coordinates are re-measured with shrinking steps.
  auto central_diff = [&](const ParamRef& p, std::size_t i, double h) {
    const double saved = p.value[i];
    p.value[i] = saved + h;
    const double lp = target.loss();
    p.value[i] = saved - h;
    const double lm = target.loss();
    p.value[i] = saved;
    return (lp - lm) / (2.0 * h);
  };

  double worst = 0.0;
  std::size_t flat = 0;
  for (std::size_t pi = 0; pi < target.params.size(); ++pi) {
    const auto& p = target.params[pi];
    for (std::size_t i = 0; i < p.size; ++i) {
      if (static_cast<int>(flat++ % static_cast<std::size_t>(num_shards)) != shard) continue;
      const double a = analytic[pi][i];
      double rel = 0.0;
      double h = eps;
      for (int attempt = 0; attempt < 3; ++attempt, h /= 32.0) {
        const double cd = central_diff(p, i, h);
        rel = std::abs(a - cd) / std::max({std::abs(a), std::abs(cd), 1e-12});
        if (rel < 1e-4) break;
      }
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

void write_le_double(std::ofstream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_le_double(std::ifstream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const std::vector<ParamRef>& params, const std::string& bin_path,
                     const std::string& manifest_path) {
  std::ofstream manifest(manifest_path);
  if (!manifest) throw IoError(manifest_path, "cannot open checkpoint manifest for writing");
  manifest << "ipsd-params 1\n";
  std::size_t total = 0;
  for (const auto& p : params) {
    manifest << p.name;
    for (int d : p.dims) manifest << ' ' << d;
    manifest << '\n';
    total += p.size;
  }
  manifest << "total " << total << '\n';
  if (!manifest.good()) throw IoError(manifest_path, "failed writing checkpoint manifest");

  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw IoError(bin_path, "cannot open checkpoint for writing");
  for (const auto& p : params)
    for (std::size_t i = 0; i < p.size; ++i) write_le_double(bin, p.value[i]);
  if (!bin.good()) throw IoError(bin_path, "failed writing checkpoint");
}

void load_checkpoint(std::vector<ParamRef>& params, const std::string& bin_path,
                     const std::string& manifest_path) {
  std::ifstream manifest(manifest_path);
  if (!manifest) throw IoError(manifest_path, "cannot open checkpoint manifest");
  std::string line;
  if (!std::getline(manifest, line) || line != "ipsd-params 1")
    throw IoError(manifest_path, "unrecognised checkpoint manifest header");
  for (const auto& p : params) {
    if (!std::getline(manifest, line)) throw IoError(manifest_path, "manifest ended early");
    std::istringstream fields(line);
    std::string name;
    fields >> name;
    if (name != p.name)
      throw IoError(manifest_path,
                    "checkpoint tensor '" + name + "' does not match expected '" + p.name + "'");
    std::size_t n = 1;
    int d = 0;
    bool any = false;
    std::size_t prod = 1;
    while (fields >> d) {
      prod *= static_cast<std::size_t>(d);
      any = true;
    }
    n = any ? prod : 0;
    if (n != p.size)
      throw IoError(manifest_path, "checkpoint tensor '" + name + "' has unexpected shape");
  }

  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw IoError(bin_path, "cannot open checkpoint");
  for (auto& p : params) {
    for (std::size_t i = 0; i < p.size; ++i) p.value[i] = read_le_double(bin);
    if (!bin.good()) throw IoError(bin_path, "checkpoint ended early");
  }
}

}  // namespace ipsd
