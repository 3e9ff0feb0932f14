#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fairbound/errors.hpp"
#include "fairbound/mmd.hpp"

namespace fairbound {

// Fully-connected network: ReLU hidden layers, identity output. With
// `skip_every_2`, layer l >= 2 with l even adds the activation from layer
// l-2 to its pre-activation when the widths match (identity skip).
struct NetworkSpec {
  std::vector<long> widths;  // input, hidden..., output
  bool skip_every_2 = false;

  long layers() const { return static_cast<long>(widths.size()) - 1; }
  void validate() const;
};

// Desk-scale default: 3 hidden layers of width 64.
NetworkSpec desk_spec(long input_dim, long output_dim);
// 7 layers at 8x the input width, with identity skips.
NetworkSpec seven_net_spec(long input_dim, long output_dim);

struct NetworkParams {
  std::vector<Eigen::MatrixXd> W;  // W[l]: widths[l+1] x widths[l]
  std::vector<Eigen::VectorXd> b;

  void validate(const NetworkSpec& spec) const;
};

NetworkParams init_params(const NetworkSpec& spec, std::mt19937& rng);

// Per-layer activations; h[0] is the input batch (rows = samples),
// h[layers()] the output.
struct Activations {
  std::vector<Eigen::MatrixXd> h;
  const Eigen::MatrixXd& output() const { return h.back(); }
};

Activations forward(const NetworkSpec& spec, const NetworkParams& params,
                    const Eigen::MatrixXd& X);

struct Gradients {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;
  Eigen::MatrixXd dX;  // gradient w.r.t. the input batch

  void add_scaled(const Gradients& other, double scale);
};

// Backpropagates d(loss)/d(output) through the recorded activations.
Gradients backward(const NetworkSpec& spec, const NetworkParams& params,
                   const Activations& acts, const Eigen::MatrixXd& d_output);

// Mean squared error over all coordinates, with gradient w.r.t. pred.
std::pair<double, Eigen::MatrixXd> mse_loss(const Eigen::MatrixXd& pred,
                                            const Eigen::MatrixXd& target);

// Sigmoid cross-entropy on 1-d logits with per-class weights (pass 1,1 for
// the plain loss; class-balanced weights make the empirical risk estimate
// balanced accuracy).
std::pair<double, Eigen::MatrixXd> balanced_bce_loss(
    const Eigen::MatrixXd& logits, const std::vector<int>& labels,
    double weight0, double weight1);

// Composite objective of the regularized learner on one batch:
// reconstruction MSE + lambda * unbiased MMD^2 between the encodings of the
// two sensitive groups. Returns both components and gradients for encoder
// and decoder.
struct CompositeResult {
  double pretext = 0.0;
  double mmd2 = 0.0;
  double total = 0.0;
  Gradients enc_grads;
  Gradients dec_grads;
};
CompositeResult composite_loss_grad(const NetworkSpec& enc_spec,
                                    const NetworkParams& enc_params,
                                    const NetworkSpec& dec_spec,
                                    const NetworkParams& dec_params,
                                    const Eigen::MatrixXd& X,
                                    const std::vector<int>& sensitive,
                                    double lambda, const KernelSpec& kernel);

void sgd_step(NetworkParams& params, const Gradients& grads, double lr);

// Step-decay schedule: lr divided by 10 at each listed epoch.
struct LrSchedule {
  double base = 0.01;
  std::vector<long> decay_epochs;

  double at(long epoch) const;
};

void save_params(const std::string& path, const NetworkSpec& spec,
                 const NetworkParams& params);
std::pair<NetworkSpec, NetworkParams> load_params(const std::string& path);

}  // namespace fairbound
