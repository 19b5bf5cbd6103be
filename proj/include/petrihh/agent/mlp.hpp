#ifndef PETRIHH_AGENT_MLP_HPP_
#define PETRIHH_AGENT_MLP_HPP_

#include <span>
#include <vector>

#include "petrihh/random.hpp"

namespace petrihh::agent {

// Fully connected network with tanh hidden layers and a linear output.
// Parameters live in one flat vector, layer by layer: the weight matrix
// (row-major, out x in) followed by the bias.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> sizes);

  // Gaussian weights with std gain/sqrt(fan_in); the output layer uses
  // `output_gain` instead. Biases start at zero.
  void init(Rng& rng, double hidden_gain, double output_gain);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  // activations[0] is the input, activations.back() the output.
  struct Cache {
    std::vector<std::vector<double>> activations;
  };

  void forward(std::span<const double> input, Cache& cache) const;
  std::vector<double> forward(std::span<const double> input) const;

  // Adds dLoss/dparams to `grad` given dLoss/doutput for a cached pass.
  void backward(const Cache& cache, std::span<const double> grad_output,
                std::span<double> grad) const;

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;  // start of each layer's weights
  std::vector<double> params_;
};

}  // namespace petrihh::agent

#endif  // PETRIHH_AGENT_MLP_HPP_
