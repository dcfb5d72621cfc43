#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace sfo {

class Tape;

// Dense multi-axis array of doubles, optionally attached to a reverse-mode
// tape. A detached tensor (tape == nullptr) acts as a constant: ops compute
// values but record nothing for it.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> v;
  Tape* tape = nullptr;
  int node = -1;

  std::size_t size() const { return v.size(); }
  bool on_tape() const { return tape != nullptr; }

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor scalar(double x);
  static Tensor from(std::vector<std::size_t> shape, std::vector<double> vals);
};

std::size_t shape_size(const std::vector<std::size_t>& shape);
std::string shape_str(const std::vector<std::size_t>& shape);

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const std::vector<double>&)>;

  // Registers a node and allocates its gradient buffer. A null backward
  // marks a leaf.
  int add_node(std::size_t out_size, BackwardFn backward);

  Tensor leaf(std::vector<std::size_t> shape, std::vector<double> values);
  Tensor leaf(const Tensor& t);

  void backward(const Tensor& loss);

  const std::vector<double>& grad(const Tensor& t) const;
  void accumulate(int node, const double* g, std::size_t len);
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::size_t size;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  std::vector<std::vector<double>> grads_;
};

// --- forward primitives -----------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor mul(const Tensor& a, const Tensor& b);

// y[o, p] = sum_i W[o, i] x[i, p] over all trailing positions p.
Tensor channel_mix(const Tensor& W, const Tensor& x);
// y[c, p] = x[c, p] + b[c]
Tensor add_channel_bias(const Tensor& b, const Tensor& x);

Tensor gelu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

// Normalization over the channel axis (axis 0) at each grid point, with
// learnable gain/bias and variance floor 1e-5.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias);

// Circular convolution of each channel of x (shape [d, spatial...]) with a
// fixed (non-learnable) filter over the spatial axes.
Tensor conv_fixed(const Tensor& x, const std::vector<double>& filter,
                  const std::vector<std::size_t>& spatial_shape);

Tensor sum(const Tensor& x);

// Relative L2 loss ||pred - target|| / ||target|| for one sample.
Tensor rel_l2_loss(const Tensor& pred, const Tensor& target);

// --- gradient checking -------------------------------------------------

// Central finite differences against analytic gradients. `build` constructs
// a scalar loss from tape leaves seeded with `inputs`. Returns the max over
// entries of |analytic - numeric| / (|analytic| + 1e-8).
double grad_check(
    const std::function<Tensor(Tape&, std::vector<Tensor>&)>& build,
    std::vector<Tensor> inputs, double step);

}  // namespace sfo
