#include "realism/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace realism {

namespace {

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least input and output");
  for (int s : sizes)
    if (s < 1) throw std::invalid_argument("Mlp: layer sizes must be positive");
}

}  // namespace

size_t Mlp::num_params() const {
  size_t n = 0;
  for (int l = 0; l < num_layers(); ++l)
    n += weights[l].size() + biases[l].size();
  return n;
}

Mlp Mlp::create(const std::vector<int>& sizes, Rng& rng) {
  check_sizes(sizes);
  Mlp net;
  net.sizes = sizes;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::vector<double> w(static_cast<size_t>(fan_out) * fan_in);
    for (double& v : w) v = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(fan_out, 0.0);
  }
  return net;
}

Mlp Mlp::zeros(const std::vector<int>& sizes) {
  check_sizes(sizes);
  Mlp net;
  net.sizes = sizes;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    net.weights.emplace_back(static_cast<size_t>(sizes[l + 1]) * sizes[l], 0.0);
    net.biases.emplace_back(sizes[l + 1], 0.0);
  }
  return net;
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
  MlpGrads g;
  for (int l = 0; l < net.num_layers(); ++l) {
    g.weights.emplace_back(net.weights[l].size(), 0.0);
    g.biases.emplace_back(net.biases[l].size(), 0.0);
  }
  g.input.assign(net.input_dim(), 0.0);
  return g;
}

void MlpGrads::accumulate(const MlpGrads& other) {
  for (size_t l = 0; l < weights.size(); ++l) {
    for (size_t k = 0; k < weights[l].size(); ++k) weights[l][k] += other.weights[l][k];
    for (size_t k = 0; k < biases[l].size(); ++k) biases[l][k] += other.biases[l][k];
  }
  for (size_t k = 0; k < input.size(); ++k) input[k] += other.input[k];
}

void MlpGrads::scale(double factor) {
  for (auto& layer : weights)
    for (double& v : layer) v *= factor;
  for (auto& layer : biases)
    for (double& v : layer) v *= factor;
  for (double& v : input) v *= factor;
}

std::vector<double> mlp_forward_cached(const Mlp& net, std::span<const double> input,
                                       MlpActivations& cache) {
  if (static_cast<int>(input.size()) != net.input_dim())
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  cache.post.assign(net.num_layers(), {});
  std::vector<double> current(input.begin(), input.end());
  for (int l = 0; l < net.num_layers(); ++l) {
    const int n_in = net.sizes[l];
    const int n_out = net.sizes[l + 1];
    std::vector<double> next(n_out);
    const double* w = net.weights[l].data();
    for (int o = 0; o < n_out; ++o) {
      double z = net.biases[l][o];
      const double* row = w + static_cast<size_t>(o) * n_in;
      for (int k = 0; k < n_in; ++k) z += row[k] * current[k];
      next[o] = (l + 1 < net.num_layers()) ? std::tanh(z) : z;
    }
    cache.post[l] = next;
    current = std::move(next);
  }
  return current;
}

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input) {
  MlpActivations cache;
  return mlp_forward_cached(net, input, cache);
}

MlpGrads mlp_backward(const Mlp& net, std::span<const double> input,
                      const MlpActivations& cache, std::span<const double> out_grad) {
  if (static_cast<int>(out_grad.size()) != net.output_dim())
    throw std::invalid_argument("mlp_backward: output gradient dimension mismatch");
  MlpGrads grads = MlpGrads::zeros_like(net);
  std::vector<double> delta(out_grad.begin(), out_grad.end());  // dL/dz of layer l
  for (int l = net.num_layers() - 1; l >= 0; --l) {
    const int n_in = net.sizes[l];
    const int n_out = net.sizes[l + 1];
    const std::span<const double> below =
        (l == 0) ? input : std::span<const double>(cache.post[l - 1]);
    // hidden layers were squashed; fold in d tanh = 1 - a^2
    if (l + 1 < net.num_layers()) {
      for (int o = 0; o < n_out; ++o) {
        const double a = cache.post[l][o];
        delta[o] *= (1.0 - a * a);
      }
    }
    for (int o = 0; o < n_out; ++o) {
      grads.biases[l][o] = delta[o];
      double* wrow = grads.weights[l].data() + static_cast<size_t>(o) * n_in;
      for (int k = 0; k < n_in; ++k) wrow[k] = delta[o] * below[k];
    }
    std::vector<double> prev(n_in, 0.0);
    const double* w = net.weights[l].data();
    for (int o = 0; o < n_out; ++o) {
      const double* row = w + static_cast<size_t>(o) * n_in;
      for (int k = 0; k < n_in; ++k) prev[k] += row[k] * delta[o];
    }
    delta = std::move(prev);
  }
  grads.input = delta;
  return grads;
}

void sgd_step(Mlp& net, const MlpGrads& grads, double lr) {
  for (int l = 0; l < net.num_layers(); ++l) {
    for (size_t k = 0; k < net.weights[l].size(); ++k)
      net.weights[l][k] -= lr * grads.weights[l][k];
    for (size_t k = 0; k < net.biases[l].size(); ++k)
      net.biases[l][k] -= lr * grads.biases[l][k];
  }
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (!target.same_shape(online))
    throw std::invalid_argument("soft_update: shape mismatch");
  if (!(tau > 0.0 && tau <= 1.0))
    throw std::invalid_argument("soft_update: tau must lie in (0,1]");
  for (int l = 0; l < target.num_layers(); ++l) {
    for (size_t k = 0; k < target.weights[l].size(); ++k)
      target.weights[l][k] = tau * online.weights[l][k] + (1.0 - tau) * target.weights[l][k];
    for (size_t k = 0; k < target.biases[l].size(); ++k)
      target.biases[l][k] = tau * online.biases[l][k] + (1.0 - tau) * target.biases[l][k];
  }
}

std::vector<double> flatten_params(const Mlp& net) {
  std::vector<double> flat;
  flat.reserve(net.num_params());
  for (int l = 0; l < net.num_layers(); ++l) {
    flat.insert(flat.end(), net.weights[l].begin(), net.weights[l].end());
    flat.insert(flat.end(), net.biases[l].begin(), net.biases[l].end());
  }
  return flat;
}

void unflatten_params(Mlp& net, std::span<const double> flat) {
  if (flat.size() != net.num_params())
    throw std::invalid_argument("unflatten_params: size mismatch");
  size_t pos = 0;
  for (int l = 0; l < net.num_layers(); ++l) {
    for (double& v : net.weights[l]) v = flat[pos++];
    for (double& v : net.biases[l]) v = flat[pos++];
  }
}

}  // namespace realism
