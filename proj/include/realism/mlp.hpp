#pragma once

#include <span>
#include <vector>

#include "realism/rng.hpp"

namespace realism {

// Small fully connected network: tanh hidden layers, linear output.
// Parameters are plain vectors so snapshots, soft updates, and the
// zeroth-order perturbations stay trivial.
struct Mlp {
  std::vector<int> sizes;                    // {in, hidden..., out}
  std::vector<std::vector<double>> weights;  // per layer, row-major [out][in]
  std::vector<std::vector<double>> biases;   // per layer [out]

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  int num_layers() const { return static_cast<int>(sizes.size()) - 1; }
  size_t num_params() const;

  // Uniform init in +-1/sqrt(fan_in).
  static Mlp create(const std::vector<int>& sizes, Rng& rng);
  static Mlp zeros(const std::vector<int>& sizes);

  bool same_shape(const Mlp& other) const { return sizes == other.sizes; }
  bool operator==(const Mlp&) const = default;
};

// Layer activations captured during a forward pass, consumed by backward.
struct MlpActivations {
  std::vector<std::vector<double>> post;  // post[l] = activation after layer l
};

// Gradients of a scalar loss with respect to every parameter and the input.
struct MlpGrads {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  std::vector<double> input;

  static MlpGrads zeros_like(const Mlp& net);
  void accumulate(const MlpGrads& other);
  void scale(double factor);
};

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input);
std::vector<double> mlp_forward_cached(const Mlp& net, std::span<const double> input,
                                       MlpActivations& cache);

// Exact reverse-mode gradients for the forward map. `out_grad` is dL/doutput.
MlpGrads mlp_backward(const Mlp& net, std::span<const double> input,
                      const MlpActivations& cache, std::span<const double> out_grad);

// Gradient-descent step: p -= lr * g.
void sgd_step(Mlp& net, const MlpGrads& grads, double lr);

// target = tau * online + (1 - tau) * target, elementwise.
void soft_update(Mlp& target, const Mlp& online, double tau);

// Flat views used by the perturbation-based optimizer.
std::vector<double> flatten_params(const Mlp& net);
void unflatten_params(Mlp& net, std::span<const double> flat);

}  // namespace realism
