#include "fairbound/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace fairbound {

void NetworkSpec::validate() const {
  if (widths.size() < 2) throw FairboundError("network needs at least 1 layer");
  for (long w : widths) {
    if (w <= 0) throw FairboundError("network widths must be positive");
  }
}

NetworkSpec desk_spec(long input_dim, long output_dim) {
  return NetworkSpec{{input_dim, 64, 64, 64, output_dim}, false};
}

NetworkSpec seven_net_spec(long input_dim, long output_dim) {
  const long w = 8 * input_dim;
  NetworkSpec spec;
  spec.widths = {input_dim, w, w, w, w, w, w, output_dim};
  spec.skip_every_2 = true;
  return spec;
}

void NetworkParams::validate(const NetworkSpec& spec) const {
  spec.validate();
  if (static_cast<long>(W.size()) != spec.layers() || W.size() != b.size()) {
    throw FairboundError("parameter count does not match network spec");
  }
  for (long l = 0; l < spec.layers(); ++l) {
    if (W[l].rows() != spec.widths[l + 1] || W[l].cols() != spec.widths[l] ||
        b[l].size() != spec.widths[l + 1]) {
      throw FairboundError("parameter shapes do not match network spec");
    }
    if (!W[l].allFinite() || !b[l].allFinite()) {
      throw NumericalFailure("non-finite network parameters");
    }
  }
}

NetworkParams init_params(const NetworkSpec& spec, std::mt19937& rng) {
  spec.validate();
  NetworkParams params;
  for (long l = 0; l < spec.layers(); ++l) {
    const long fan_in = spec.widths[l], fan_out = spec.widths[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Eigen::MatrixXd W(fan_out, fan_in);
    for (long i = 0; i < fan_out; ++i)
      for (long j = 0; j < fan_in; ++j) W(i, j) = dist(rng);
    params.W.push_back(std::move(W));
    params.b.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return params;
}

namespace {

bool has_skip(const NetworkSpec& spec, long layer) {
  return spec.skip_every_2 && layer >= 2 && layer % 2 == 0 &&
         spec.widths[layer + 1] == spec.widths[layer - 1];
}

}  // namespace

Activations forward(const NetworkSpec& spec, const NetworkParams& params,
                    const Eigen::MatrixXd& X) {
  params.validate(spec);
  if (X.cols() != spec.widths.front()) {
    throw FairboundError("input dimension does not match network spec");
  }
  Activations acts;
  acts.h.reserve(spec.layers() + 1);
  acts.h.push_back(X);
  for (long l = 0; l < spec.layers(); ++l) {
    Eigen::MatrixXd z =
        (acts.h[l] * params.W[l].transpose()).rowwise() +
        params.b[l].transpose();
    if (has_skip(spec, l)) z += acts.h[l - 1];
    if (l < spec.layers() - 1) z = z.cwiseMax(0.0);  // ReLU; output identity
    acts.h.push_back(std::move(z));
  }
  return acts;
}

void Gradients::add_scaled(const Gradients& other, double scale) {
  for (size_t l = 0; l < dW.size(); ++l) {
    dW[l] += scale * other.dW[l];
    db[l] += scale * other.db[l];
  }
  if (dX.size() > 0 && other.dX.size() > 0) dX += scale * other.dX;
}

Gradients backward(const NetworkSpec& spec, const NetworkParams& params,
                   const Activations& acts, const Eigen::MatrixXd& d_output) {
  const long L = spec.layers();
  Gradients g;
  g.dW.resize(L);
  g.db.resize(L);
  std::vector<Eigen::MatrixXd> dh(L + 1);
  for (long l = 0; l <= L; ++l) {
    dh[l] = Eigen::MatrixXd::Zero(acts.h[l].rows(), acts.h[l].cols());
  }
  dh[L] = d_output;
  for (long l = L - 1; l >= 0; --l) {
    Eigen::MatrixXd dz = dh[l + 1];
    if (l < L - 1) {
      // ReLU mask recovered from the stored post-activation
      dz = dz.cwiseProduct(
          (acts.h[l + 1].array() > 0.0).cast<double>().matrix());
    }
    g.dW[l] = dz.transpose() * acts.h[l];
    g.db[l] = dz.colwise().sum().transpose();
    dh[l] += dz * params.W[l];
    if (has_skip(spec, l)) dh[l - 1] += dz;
  }
  g.dX = std::move(dh[0]);
  return g;
}

std::pair<double, Eigen::MatrixXd> mse_loss(const Eigen::MatrixXd& pred,
                                            const Eigen::MatrixXd& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw FairboundError("mse_loss shape mismatch");
  }
  const double n = static_cast<double>(pred.size());
  const Eigen::MatrixXd diff = pred - target;
  return {diff.squaredNorm() / n, 2.0 * diff / n};
}

std::pair<double, Eigen::MatrixXd> balanced_bce_loss(
    const Eigen::MatrixXd& logits, const std::vector<int>& labels,
    double weight0, double weight1) {
  if (logits.cols() != 1 ||
      logits.rows() != static_cast<long>(labels.size())) {
    throw FairboundError("balanced_bce_loss expects one logit per label");
  }
  double total_w = 0.0;
  for (int y : labels) total_w += y == 1 ? weight1 : weight0;
  if (total_w <= 0) throw FairboundError("nonpositive class weights");

  double loss = 0.0;
  Eigen::MatrixXd grad(logits.rows(), 1);
  for (long i = 0; i < logits.rows(); ++i) {
    const double z = logits(i, 0);
    const int y = labels[static_cast<size_t>(i)];
    const double w = y == 1 ? weight1 : weight0;
    // -y*log(sigmoid(z)) - (1-y)*log(1-sigmoid(z)), stable form
    loss += w * (std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z))));
    const double p = 1.0 / (1.0 + std::exp(-z));
    grad(i, 0) = w * (p - y);
  }
  return {loss / total_w, grad / total_w};
}

CompositeResult composite_loss_grad(const NetworkSpec& enc_spec,
                                    const NetworkParams& enc_params,
                                    const NetworkSpec& dec_spec,
                                    const NetworkParams& dec_params,
                                    const Eigen::MatrixXd& X,
                                    const std::vector<int>& sensitive,
                                    double lambda, const KernelSpec& kernel) {
  if (X.rows() != static_cast<long>(sensitive.size())) {
    throw FairboundError("sensitive labels do not match batch size");
  }
  CompositeResult out;
  const Activations enc_acts = forward(enc_spec, enc_params, X);
  const Eigen::MatrixXd& Z = enc_acts.output();
  const Activations dec_acts = forward(dec_spec, dec_params, Z);

  auto [pretext, d_recon] = mse_loss(dec_acts.output(), X);
  out.pretext = pretext;
  out.dec_grads = backward(dec_spec, dec_params, dec_acts, d_recon);
  Eigen::MatrixXd dZ = out.dec_grads.dX;

  std::vector<long> rows0, rows1;
  for (long i = 0; i < X.rows(); ++i) {
    (sensitive[static_cast<size_t>(i)] == 1 ? rows1 : rows0).push_back(i);
  }
  if (lambda != 0.0) {
    if (rows0.size() < 2 || rows1.size() < 2) {
      throw TooFewSamples("MMD term needs 2 samples per sensitive group");
    }
    Eigen::MatrixXd Z0(rows0.size(), Z.cols()), Z1(rows1.size(), Z.cols());
    for (size_t i = 0; i < rows0.size(); ++i) Z0.row(i) = Z.row(rows0[i]);
    for (size_t i = 0; i < rows1.size(); ++i) Z1.row(i) = Z.row(rows1[i]);
    const Mmd2WithGrad mmd = mmd2_unbiased_grad(Z0, Z1, kernel);
    out.mmd2 = mmd.value;
    for (size_t i = 0; i < rows0.size(); ++i) {
      dZ.row(rows0[i]) += lambda * mmd.grad_X.row(i);
    }
    for (size_t i = 0; i < rows1.size(); ++i) {
      dZ.row(rows1[i]) += lambda * mmd.grad_Y.row(i);
    }
  }
  out.enc_grads = backward(enc_spec, enc_params, enc_acts, dZ);
  out.total = out.pretext + lambda * out.mmd2;
  return out;
}

void sgd_step(NetworkParams& params, const Gradients& grads, double lr) {
  if (params.W.size() != grads.dW.size()) {
    throw FairboundError("gradient set does not match parameters");
  }
  for (size_t l = 0; l < params.W.size(); ++l) {
    params.W[l] -= lr * grads.dW[l];
    params.b[l] -= lr * grads.db[l];
  }
}

double LrSchedule::at(long epoch) const {
  double lr = base;
  for (long e : decay_epochs) {
    if (epoch >= e) lr /= 10.0;
  }
  return lr;
}

namespace {

constexpr char kMagic[4] = {'F', 'B', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void save_params(const std::string& path, const NetworkSpec& spec,
                 const NetworkParams& params) {
  params.validate(spec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FairboundError("cannot open checkpoint for writing: " + path);
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint8_t>(spec.skip_every_2 ? 1 : 0));
  write_pod(out, static_cast<std::uint32_t>(spec.widths.size()));
  for (long w : spec.widths) write_pod(out, static_cast<std::int64_t>(w));
  for (long l = 0; l < spec.layers(); ++l) {
    // row-major, 64-bit little-endian
    for (long i = 0; i < params.W[l].rows(); ++i)
      for (long j = 0; j < params.W[l].cols(); ++j)
        write_pod(out, params.W[l](i, j));
    for (long i = 0; i < params.b[l].size(); ++i) write_pod(out, params.b[l](i));
  }
  if (!out) throw FairboundError("failed writing checkpoint: " + path);
}

std::pair<NetworkSpec, NetworkParams> load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FairboundError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  std::uint32_t version = 0;
  read_pod(in, version);
  if (!in || std::memcmp(magic, kMagic, 4) != 0 || version != kVersion) {
    throw MalformedData("not a recognized checkpoint: " + path);
  }
  std::uint8_t skip = 0;
  std::uint32_t nwidths = 0;
  read_pod(in, skip);
  read_pod(in, nwidths);
  if (!in || nwidths < 2 || nwidths > 1024) {
    throw MalformedData("corrupt checkpoint header: " + path);
  }
  NetworkSpec spec;
  spec.skip_every_2 = skip != 0;
  for (std::uint32_t i = 0; i < nwidths; ++i) {
    std::int64_t w = 0;
    read_pod(in, w);
    spec.widths.push_back(static_cast<long>(w));
  }
  spec.validate();
  NetworkParams params;
  for (long l = 0; l < spec.layers(); ++l) {
    Eigen::MatrixXd W(spec.widths[l + 1], spec.widths[l]);
    for (long i = 0; i < W.rows(); ++i)
      for (long j = 0; j < W.cols(); ++j) read_pod(in, W(i, j));
    Eigen::VectorXd b(spec.widths[l + 1]);
    for (long i = 0; i < b.size(); ++i) read_pod(in, b(i));
    params.W.push_back(std::move(W));
    params.b.push_back(std::move(b));
  }
  if (!in) throw MalformedData("truncated checkpoint: " + path);
  params.validate(spec);
  return {spec, params};
}

}  // namespace fairbound
