#include "ipsd/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

namespace ipsd {

DenoiserNet::DenoiserNet() : c1_(1, 48), c2_(48, 48), c3_(48, 1) {}

Vec DenoiserNet::forward(const Vec& x, Trace* trace) const {
  const Eigen::Map<const Mat> row(x.data(), 1, x.size());
  Trace local;
  Trace& t = trace ? *trace : local;
  t.a1 = c1_.forward(row, trace ? &t.c1 : nullptr);
  Mat h = leaky_relu(t.a1);
  t.a2 = c2_.forward(h, trace ? &t.c2 : nullptr);
  h = leaky_relu(t.a2);
  Mat y = c3_.forward(h, trace ? &t.c3 : nullptr);
  return y.transpose().col(0);
}

void DenoiserNet::backward(const Trace& trace, const Vec& grad_out) {
  const Eigen::Map<const Mat> g(grad_out.data(), 1, grad_out.size());
  Mat dh = c3_.backward(g, trace.c3);
  dh = leaky_relu_backward(dh, trace.a2);
  dh = c2_.backward(dh, trace.c2);
  dh = leaky_relu_backward(dh, trace.a1);
  c1_.backward(dh, trace.c1);
}

void DenoiserNet::init(std::mt19937_64& rng) {
  c1_.init(rng);
  c2_.init(rng);
  c3_.init(rng);
}

void DenoiserNet::zero_grads() {
  c1_.zero_grads();
  c2_.zero_grads();
  c3_.zero_grads();
}

std::vector<ParamRef> DenoiserNet::params() {
  std::vector<ParamRef> out;
  c1_.collect_params(out, "conv1");
  c2_.collect_params(out, "conv2");
  c3_.collect_params(out, "conv3");
  return out;
}

std::size_t DenoiserNet::parameter_count() {
  return (1 * 48 * 3 + 48) + (48 * 48 * 3 + 48) + (48 * 1 * 3 + 1);
}

// ---------------------------------------------------------------------------
// Losses

namespace {

Vec to_vec(const Signal& s) {
  return Eigen::Map<const Vec>(s.samples.data(), static_cast<Eigen::Index>(s.size()));
}

Vec gather(const Vec& x, const std::vector<std::uint32_t>& idx) {
  Vec out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = x[idx[i]];
  return out;
}

}  // namespace

double n2n_loss(const DenoiserNet& net, const SubSignalPair& pair) {
  if (pair.left.size() != pair.right.size())
    throw std::invalid_argument("sub-signal halves must have equal length");
  const Vec l = to_vec(pair.left);
  const Vec r = to_vec(pair.right);
  return (net.forward(l) - r).squaredNorm() + (net.forward(r) - l).squaredNorm();
}

double consistency_loss(const DenoiserNet& net, const Signal& s, const PartitionChoice& choice,
                        const PartitionCatalog& catalog) {
  const PartitionIndexMap map = build_index_map(s.size(), choice, catalog);
  const Vec x = to_vec(s);
  const Vec fx = net.forward(x);
  const Vec xl = gather(x, map.left);
  const Vec xr = gather(x, map.right);
  return (net.forward(xl) - gather(fx, map.left)).squaredNorm() +
         (net.forward(xr) - gather(fx, map.right)).squaredNorm();
}

// ---------------------------------------------------------------------------
// Training

double unit_variance_scale(std::span<const double> samples) {
  if (samples.empty()) return 1.0;
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  var /= n;
  if (var < 1e-24) return 1.0;
  return 1.0 / std::sqrt(var);
}

namespace {

double trailing_variance(const std::vector<double>& values, int window) {
  const std::size_t w = static_cast<std::size_t>(window);
  const std::size_t n = values.size();
  double mean = 0.0;
  for (std::size_t i = n - w; i < n; ++i) mean += values[i];
  mean /= static_cast<double>(w);
  double var = 0.0;
  for (std::size_t i = n - w; i < n; ++i) var += (values[i] - mean) * (values[i] - mean);
  return var / static_cast<double>(w);
}

void add_grads(std::vector<ParamRef>& dst, const std::vector<ParamRef>& src) {
  for (std::size_t p = 0; p < dst.size(); ++p)
    for (std::size_t i = 0; i < dst[p].size; ++i) dst[p].grad[i] += src[p].grad[i];
}

void copy_values(std::vector<ParamRef>& dst, const std::vector<ParamRef>& src) {
  for (std::size_t p = 0; p < dst.size(); ++p)
    for (std::size_t i = 0; i < dst[p].size; ++i) dst[p].value[i] = src[p].value[i];
}

// Shared training loop. `full_signal`/`map` are null in pair-only mode.
TrainedDenoiser run_training(Vec left, Vec right, const Vec* full_signal,
                             const PartitionIndexMap* map, DenoiserLoss loss, bool parallel,
                             const ConvergenceCriterion& criterion, std::mt19937_64& rng,
                             double lr, double scale) {
  TrainedDenoiser result;
  result.scale = scale;
  DenoiserNet& net = result.net;
  net.init(rng);

  Adam adam(net.params(), AdamConfig{lr});
  TrainTrace& trace = result.trace;
  const double pair_len = static_cast<double>(left.size() + right.size());
  const bool with_consistency = loss == DenoiserLoss::full && full_signal != nullptr;

  // The full-signal pass always runs on a mirror network whose gradients
  // start at zero and are merged into `net` in a fixed order afterwards.
  // That keeps every accumulation identical whether or not the mirror pass
  // runs on its own thread.
  DenoiserNet aux;
  std::vector<ParamRef> net_params = net.params();
  std::vector<ParamRef> aux_params = aux.params();
  const bool split = parallel && with_consistency;

  DenoiserNet::Trace tl, tr, ts;
  for (int step = 0; step < criterion.max_steps; ++step) {
    Vec fl, fr, fs;
    if (with_consistency) {
      copy_values(aux_params, net_params);
      if (split) {
        auto task = std::async(std::launch::async, [&] { fs = aux.forward(*full_signal, &ts); });
        fl = net.forward(left, &tl);
        fr = net.forward(right, &tr);
        task.get();
      } else {
        fs = aux.forward(*full_signal, &ts);
        fl = net.forward(left, &tl);
        fr = net.forward(right, &tr);
      }
    } else {
      fl = net.forward(left, &tl);
      fr = net.forward(right, &tr);
    }

    const Vec d_pair_l = fl - right;
    const Vec d_pair_r = fr - left;
    double n2n_sum = d_pair_l.squaredNorm() + d_pair_r.squaredNorm();
    double full_sum = n2n_sum;

    Vec gl = 2.0 * d_pair_l;
    Vec gr = 2.0 * d_pair_r;
    Vec gs;
    if (with_consistency) {
      const Vec d_cons_l = fl - gather(fs, map->left);
      const Vec d_cons_r = fr - gather(fs, map->right);
      full_sum += d_cons_l.squaredNorm() + d_cons_r.squaredNorm();
      gl += 2.0 * d_cons_l;
      gr += 2.0 * d_cons_r;
      gs = Vec::Zero(fs.size());
      for (std::size_t i = 0; i < map->left.size(); ++i)
        gs[map->left[i]] = -2.0 * d_cons_l[static_cast<Eigen::Index>(i)];
      for (std::size_t i = 0; i < map->right.size(); ++i)
        gs[map->right[i]] = -2.0 * d_cons_r[static_cast<Eigen::Index>(i)];
    }

    trace.n2n.push_back(n2n_sum / pair_len);
    trace.full.push_back(full_sum / pair_len);
    trace.steps = step + 1;
    if (!std::isfinite(full_sum)) throw TrainingDiverged(trace);

    if (trace.steps >= criterion.window &&
        trailing_variance(trace.n2n, criterion.window) < criterion.variance_threshold) {
      trace.converged = true;
      break;
    }

    if (with_consistency) {
      if (split) {
        auto task = std::async(std::launch::async, [&] {
          aux.zero_grads();
          aux.backward(ts, gs);
        });
        net.zero_grads();
        net.backward(tl, gl);
        net.backward(tr, gr);
        task.get();
      } else {
        aux.zero_grads();
        aux.backward(ts, gs);
        net.zero_grads();
        net.backward(tl, gl);
        net.backward(tr, gr);
      }
      add_grads(net_params, aux_params);
    } else {
      net.zero_grads();
      net.backward(tl, gl);
      net.backward(tr, gr);
    }
    adam.step();
  }
  return result;
}

}  // namespace

TrainedDenoiser train_to_convergence(const SubSignalPair& pair,
                                     const ConvergenceCriterion& criterion, std::mt19937_64& rng,
                                     double lr) {
  if (pair.left.size() != pair.right.size())
    throw std::invalid_argument("sub-signal halves must have equal length");
  if (criterion.max_steps < criterion.window)
    throw std::invalid_argument("step cap must be at least the convergence window");

  std::vector<double> joint(pair.left.samples);
  joint.insert(joint.end(), pair.right.samples.begin(), pair.right.samples.end());
  const double scale = unit_variance_scale(joint);
  return run_training(to_vec(pair.left) * scale, to_vec(pair.right) * scale, nullptr, nullptr,
                      DenoiserLoss::n2n_only, false, criterion, rng, lr, scale);
}

TrainedDenoiser train_to_convergence(const Signal& s, const PartitionChoice& choice,
                                     const PartitionCatalog& catalog,
                                     const ConvergenceCriterion& criterion, std::mt19937_64& rng,
                                     DenoiserLoss loss, double lr, bool parallel) {
  if (criterion.max_steps < criterion.window)
    throw std::invalid_argument("step cap must be at least the convergence window");
  const PartitionIndexMap map = build_index_map(s.size(), choice, catalog);
  const double scale = unit_variance_scale(s.samples);
  const Vec x = to_vec(s) * scale;
  return run_training(gather(x, map.left), gather(x, map.right), &x, &map, loss, parallel,
                      criterion, rng, lr, scale);
}

double reward_from_trace(const TrainTrace& trace) {
  if (trace.steps < 10 || trace.n2n.size() < 10)
    throw std::invalid_argument("trace must contain at least 10 steps");
  double sum = 0.0;
  for (std::size_t i = trace.n2n.size() - 10; i < trace.n2n.size(); ++i) sum += trace.n2n[i];
  return -sum / 10.0;
}

Signal denoise(const DenoiserNet& net, const Signal& s) {
  Signal out;
  out.sample_rate_hz = s.sample_rate_hz;
  const Vec y = net.forward(to_vec(s));
  out.samples.assign(y.data(), y.data() + y.size());
  return out;
}

Signal denoise_rescaled(const TrainedDenoiser& trained, const Signal& s) {
  Signal out;
  out.sample_rate_hz = s.sample_rate_hz;
  const Vec y = trained.net.forward(to_vec(s) * trained.scale) / trained.scale;
  out.samples.assign(y.data(), y.data() + y.size());
  return out;
}

}  // namespace ipsd
