#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rlds {

/// Fully connected network with LeakyReLU hidden layers and a linear scalar
/// output. Instantiated for float and double.
template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  struct Layer {
    Matrix weight;  ///< (out, in)
    Vector bias;
  };

  /// Zero-initialized network with layer sizes `dims` (input first).
  explicit Mlp(std::vector<int> dims, double negative_slope = 0.3);

  /// Weights i.i.d. N(0, init_std^2), biases zero.
  static Mlp random(std::vector<int> dims, std::uint64_t seed, double init_std = 0.05,
                    double negative_slope = 0.3);

  Scalar forward(const Eigen::Ref<const Vector>& x) const;
  /// One output per column of X.
  RowVector forward_batch(const Eigen::Ref<const Matrix>& x) const;

  /// Gradients of mean((forward(x_i) - y_i)^2) over the columns of X.
  /// Returns the loss at the current parameters.
  Scalar backward(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const RowVector>& y,
                  std::vector<Layer>& grads) const;

  const std::vector<int>& dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  double negative_slope() const { return slope_; }

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  /// Parameters shaped like this network, all zero.
  std::vector<Layer> zeros_like() const;
  std::size_t parameter_count() const;

  template <typename Other>
  Mlp<Other> cast() const {
    Mlp<Other> out(dims_, slope_);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      out.layers()[l].weight = layers_[l].weight.template cast<Other>();
      out.layers()[l].bias = layers_[l].bias.template cast<Other>();
    }
    return out;
  }

 private:
  std::vector<int> dims_;
  double slope_;
  std::vector<Layer> layers_;
};

template <typename Scalar>
using Gradients = std::vector<typename Mlp<Scalar>::Layer>;

inline double leaky_relu(double z, double slope = 0.3) { return z > 0.0 ? z : slope * z; }

struct AdamParams {
  double lr = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
  AdamState(const Mlp<Scalar>& net, AdamParams params = {})
      : params(params), m(net.zeros_like()), v(net.zeros_like()) {}

  AdamParams params;
  Gradients<Scalar> m;
  Gradients<Scalar> v;
  std::uint64_t t = 0;
};

/// Bias-corrected Adam update. Throws if gradient shapes do not match.
template <typename Scalar>
void adam_step(Mlp<Scalar>& net, AdamState<Scalar>& adam, const Gradients<Scalar>& grads);

template <typename Scalar>
struct Checkpoint {
  Mlp<Scalar> net;
  std::optional<AdamState<Scalar>> adam;
};

/// Binary little-endian layout: "RLDS", u32 version, u32 layer count,
/// (u32 rows, u32 cols) per layer, then f64 weights (row-major) and biases
/// layer by layer; optionally the Adam moments in the same layout followed by
/// the u64 step counter.
template <typename Scalar>
void save_checkpoint(const std::string& path, const Mlp<Scalar>& net,
                     const AdamState<Scalar>* adam = nullptr);

template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::string& path, double negative_slope = 0.3,
                                   AdamParams adam_params = {});

}  // namespace rlds
