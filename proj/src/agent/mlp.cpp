#include "petrihh/agent/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace petrihh::agent {

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("MLP needs >= 2 layer sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) {
      throw std::invalid_argument("MLP layer sizes must be positive");
    }
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
  }
  params_.assign(total, 0.0);
}

void Mlp::init(Rng& rng, double hidden_gain, double output_gain) {
  const std::size_t layers = offsets_.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double gain = l + 1 == layers ? output_gain : hidden_gain;
    const double scale = gain / std::sqrt(static_cast<double>(in));
    double* w = params_.data() + offsets_[l];
    for (int i = 0; i < in * out; ++i) w[i] = scale * rng.normal();
    double* b = w + static_cast<std::size_t>(in) * out;
    for (int i = 0; i < out; ++i) b[i] = 0.0;
  }
}

void Mlp::forward(std::span<const double> input, Cache& cache) const {
  if (static_cast<int>(input.size()) != input_size()) {
    throw std::invalid_argument("MLP input has width " +
                                std::to_string(input.size()) + ", expected " +
                                std::to_string(input_size()));
  }
  const std::size_t layers = offsets_.size();
  cache.activations.resize(layers + 1);
  cache.activations[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = params_.data() + offsets_[l];
    const double* b = w + static_cast<std::size_t>(in) * out;
    const std::vector<double>& x = cache.activations[l];
    std::vector<double>& y = cache.activations[l + 1];
    y.resize(out);
    for (int o = 0; o < out; ++o) {
      const double* row = w + static_cast<std::size_t>(o) * in;
      double sum = b[o];
      for (int i = 0; i < in; ++i) sum += row[i] * x[i];
      y[o] = l + 1 == layers ? sum : std::tanh(sum);
    }
  }
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  Cache cache;
  forward(input, cache);
  return std::move(cache.activations.back());
}

void Mlp::backward(const Cache& cache, std::span<const double> grad_output,
                   std::span<double> grad) const {
  const std::size_t layers = offsets_.size();
  std::vector<double> delta(grad_output.begin(), grad_output.end());
  std::vector<double> next;
  for (std::size_t l = layers; l-- > 0;) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = params_.data() + offsets_[l];
    double* gw = grad.data() + offsets_[l];
    double* gb = gw + static_cast<std::size_t>(in) * out;
    const std::vector<double>& x = cache.activations[l];

    if (l + 1 != layers) {
      // Through tanh: d/dz = (1 - y^2).
      const std::vector<double>& y = cache.activations[l + 1];
      for (int o = 0; o < out; ++o) delta[o] *= 1.0 - y[o] * y[o];
    }
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      double* grow = gw + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) grow[i] += d * x[i];
      gb[o] += d;
    }
    if (l == 0) break;
    next.assign(in, 0.0);
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) next[i] += d * row[i];
    }
    delta.swap(next);
  }
}

}  // namespace petrihh::agent
