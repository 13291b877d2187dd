#include "rlds/neural.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <stdexcept>

namespace rlds {

template <typename Scalar>
Mlp<Scalar>::Mlp(std::vector<int> dims, double negative_slope)
    : dims_(std::move(dims)), slope_(negative_slope) {
  if (dims_.size() < 2) throw std::invalid_argument("network needs at least input and output");
  for (int d : dims_)
    if (d <= 0) throw std::invalid_argument("layer sizes must be positive");
  if (!(slope_ >= 0.0 && slope_ < 1.0))
    throw std::invalid_argument("negative slope must be in [0, 1)");
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l)
    layers_.push_back({Matrix::Zero(dims_[l + 1], dims_[l]), Vector::Zero(dims_[l + 1])});
}

template <typename Scalar>
Mlp<Scalar> Mlp<Scalar>::random(std::vector<int> dims, std::uint64_t seed, double init_std,
                                double negative_slope) {
  Mlp net(std::move(dims), negative_slope);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, init_std);
  for (auto& layer : net.layers_)
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        layer.weight(r, c) = static_cast<Scalar>(normal(rng));
  return net;
}

template <typename Scalar>
Scalar Mlp<Scalar>::forward(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dims_.front())
    throw std::invalid_argument("network input has length " + std::to_string(x.size()) +
                                ", expected " + std::to_string(dims_.front()));
  const auto slope = static_cast<Scalar>(slope_);
  Vector a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Vector z = layers_[l].weight * a + layers_[l].bias;
    if (l + 1 < layers_.size())
      a = z.cwiseMax(slope * z);
    else
      a = std::move(z);
  }
  return a(0);
}

template <typename Scalar>
typename Mlp<Scalar>::RowVector Mlp<Scalar>::forward_batch(const Eigen::Ref<const Matrix>& x) const {
  if (x.rows() != dims_.front())
    throw std::invalid_argument("network input has length " + std::to_string(x.rows()) +
                                ", expected " + std::to_string(dims_.front()));
  const auto slope = static_cast<Scalar>(slope_);
  // Column blocks keep the hidden activations in cache and the scratch small.
  constexpr Eigen::Index kBlock = 256;
  RowVector out(x.cols());
  std::vector<Matrix> act(layers_.size());
  for (Eigen::Index c0 = 0; c0 < x.cols(); c0 += kBlock) {
    const Eigen::Index n = std::min(kBlock, x.cols() - c0);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Matrix& z = act[l];
      z.resize(layers_[l].weight.rows(), n);
      if (l == 0)
        z.noalias() = layers_[l].weight * x.middleCols(c0, n);
      else
        z.noalias() = layers_[l].weight * act[l - 1];
      z.colwise() += layers_[l].bias;
      if (l + 1 < layers_.size()) z = z.cwiseMax(slope * z);
    }
    out.segment(c0, n) = act.back().row(0);
  }
  return out;
}

template <typename Scalar>
Scalar Mlp<Scalar>::backward(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const RowVector>& y,
                             std::vector<Layer>& grads) const {
  const Eigen::Index batch = x.cols();
  if (batch == 0) throw std::invalid_argument("backward needs a nonempty batch");
  if (x.rows() != dims_.front() || y.size() != batch)
    throw std::invalid_argument("backward: batch shape mismatch");
  const auto slope = static_cast<Scalar>(slope_);

  // Pre-activations per layer; activations[0] is the input.
  std::vector<Matrix> pre(layers_.size());
  std::vector<Matrix> act(layers_.size() + 1);
  act[0] = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    pre[l].noalias() = layers_[l].weight * act[l];
    pre[l].colwise() += layers_[l].bias;
    if (l + 1 < layers_.size())
      act[l + 1] = pre[l].cwiseMax(slope * pre[l]);
    else
      act[l + 1] = pre[l];
  }

  const RowVector residual = act.back().row(0) - y;
  const Scalar loss = residual.squaredNorm() / static_cast<Scalar>(batch);

  grads.resize(layers_.size());
  Matrix delta = (Scalar(2) / static_cast<Scalar>(batch)) * residual;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    grads[l].weight.noalias() = delta * act[l].transpose();
    grads[l].bias = delta.rowwise().sum();
    if (l > 0) {
      Matrix back = layers_[l].weight.transpose() * delta;
      delta = back.cwiseProduct(
          pre[l - 1].unaryExpr([slope](Scalar z) { return z > Scalar(0) ? Scalar(1) : slope; }));
    }
  }
  return loss;
}

template <typename Scalar>
std::vector<typename Mlp<Scalar>::Layer> Mlp<Scalar>::zeros_like() const {
  std::vector<Layer> out;
  for (const auto& layer : layers_)
    out.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                   Vector::Zero(layer.bias.size())});
  return out;
}

template <typename Scalar>
std::size_t Mlp<Scalar>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return n;
}

template <typename Scalar>
void adam_step(Mlp<Scalar>& net, AdamState<Scalar>& adam, const Gradients<Scalar>& grads) {
  auto& layers = net.layers();
  if (grads.size() != layers.size() || adam.m.size() != layers.size())
    throw std::invalid_argument("adam_step: gradient shape mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grads[l].weight.rows() != layers[l].weight.rows() ||
        grads[l].weight.cols() != layers[l].weight.cols() ||
        grads[l].bias.size() != layers[l].bias.size())
      throw std::invalid_argument("adam_step: gradient shape mismatch in layer " + std::to_string(l));
  }

  const AdamParams& p = adam.params;
  ++adam.t;
  const double t = static_cast<double>(adam.t);
  const auto b1 = static_cast<Scalar>(p.beta1);
  const auto b2 = static_cast<Scalar>(p.beta2);
  const auto c1 = static_cast<Scalar>(1.0 / (1.0 - std::pow(p.beta1, t)));
  const auto c2 = static_cast<Scalar>(1.0 / (1.0 - std::pow(p.beta2, t)));
  const auto lr = static_cast<Scalar>(p.lr);
  const auto eps = static_cast<Scalar>(p.epsilon);

  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() * c1) / ((v.array() * c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weight, adam.m[l].weight, adam.v[l].weight, grads[l].weight);
    update(layers[l].bias, adam.m[l].bias, adam.v[l].bias, grads[l].bias);
  }
}

namespace {

constexpr std::array<char, 4> kMagic{'R', 'L', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    if (pos_ + sizeof(U) > bytes_.size()) throw std::runtime_error("checkpoint truncated");
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }
  void skip(std::size_t n) { pos_ += n; }
  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

template <typename Layer>
void put_layers(std::string& out, const std::vector<Layer>& layers) {
  for (const auto& layer : layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        put_le(out, static_cast<double>(layer.weight(r, c)));
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) put_le(out, static_cast<double>(layer.bias(i)));
  }
}

template <typename Scalar, typename Layer>
void get_layers(Reader& in, std::vector<Layer>& layers) {
  for (auto& layer : layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        layer.weight(r, c) = static_cast<Scalar>(in.get<double>());
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i)
      layer.bias(i) = static_cast<Scalar>(in.get<double>());
  }
}

}  // namespace

template <typename Scalar>
void save_checkpoint(const std::string& path, const Mlp<Scalar>& net, const AdamState<Scalar>* adam) {
  std::string out(kMagic.begin(), kMagic.end());
  put_le(out, kVersion);
  put_le(out, static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& layer : net.layers()) {
    put_le(out, static_cast<std::uint32_t>(layer.weight.rows()));
    put_le(out, static_cast<std::uint32_t>(layer.weight.cols()));
  }
  put_layers(out, net.layers());
  if (adam) {
    put_layers(out, adam->m);
    put_layers(out, adam->v);
    put_le(out, adam->t);
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write checkpoint: " + path);
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw std::runtime_error("failed writing checkpoint: " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot move checkpoint into place: " + path);
}

template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::string& path, double negative_slope,
                                   AdamParams adam_params) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open checkpoint: " + path);
  Reader in(std::string(std::istreambuf_iterator<char>(file), {}));
  if (in.remaining() < 4 || in.bytes().compare(0, 4, std::string(kMagic.begin(), kMagic.end())) != 0)
    throw std::runtime_error("not a checkpoint file (bad magic): " + path);
  in.skip(4);
  if (const auto version = in.get<std::uint32_t>(); version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  const auto count = in.get<std::uint32_t>();
  if (count == 0 || count > 64) throw std::runtime_error("checkpoint: implausible layer count");
  std::vector<int> dims;
  for (std::uint32_t l = 0; l < count; ++l) {
    const auto rows = static_cast<int>(in.get<std::uint32_t>());
    const auto cols = static_cast<int>(in.get<std::uint32_t>());
    if (l == 0) dims.push_back(cols);
    else if (cols != dims.back())
      throw std::runtime_error("checkpoint: inconsistent layer shapes");
    dims.push_back(rows);
  }
  Checkpoint<Scalar> ckpt{Mlp<Scalar>(dims, negative_slope), std::nullopt};
  get_layers<Scalar>(in, ckpt.net.layers());
  if (in.remaining() > 0) {
    AdamState<Scalar> adam(ckpt.net, adam_params);
    get_layers<Scalar>(in, adam.m);
    get_layers<Scalar>(in, adam.v);
    adam.t = in.get<std::uint64_t>();
    ckpt.adam = std::move(adam);
  }
  if (in.remaining() != 0) throw std::runtime_error("checkpoint: trailing bytes");
  return ckpt;
}

template class Mlp<float>;
template class Mlp<double>;
template void adam_step(Mlp<float>&, AdamState<float>&, const Gradients<float>&);
template void adam_step(Mlp<double>&, AdamState<double>&, const Gradients<double>&);
template void save_checkpoint(const std::string&, const Mlp<float>&, const AdamState<float>*);
template void save_checkpoint(const std::string&, const Mlp<double>&, const AdamState<double>*);
template Checkpoint<float> load_checkpoint(const std::string&, double, AdamParams);
template Checkpoint<double> load_checkpoint(const std::string&, double, AdamParams);

}  // namespace rlds
