#include "fairbound/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace fairbound {

void TrainConfig::validate() const {
  if (rep_dim <= 0 || rounds <= 0 || epochs_per_round <= 0 || batch_size < 4) {
    throw FairboundError("train config sizes must be positive (batch >= 4)");
  }
  if (epsilon < -1.0) throw FairboundError("epsilon must be >= -1");
  if (!(lambda_min > 0) || !(lambda_max >= lambda_min)) {
    throw FairboundError("lambda clamp range invalid");
  }
  kernel.validate();
}

double regulator_update(double lambda, double mmd2_value, double epsilon,
                        RegulatorState& state, double lambda_min,
                        double lambda_max) {
  // Tie counts as satisfied so epsilon = 0 works with the signed estimator.
  const int sign = mmd2_value > epsilon ? 1 : -1;
  if (state.prev_sign != 0 && sign != state.prev_sign) {
    state.factor = std::max(std::sqrt(state.factor), 1.1);
  }
  state.prev_sign = sign;
  const double next = sign > 0 ? lambda * state.factor : lambda / state.factor;
  return std::clamp(next, lambda_min, lambda_max);
}

namespace {

// Proportional group-stratified batch assignment: shuffles each group and
// deals its members across the batches round-robin.
std::vector<std::vector<long>> stratified_batches(
    const std::vector<long>& idx0, const std::vector<long>& idx1,
    long batch_size, std::mt19937& rng) {
  const long n = static_cast<long>(idx0.size() + idx1.size());
  const long num_batches = std::max<long>(1, n / batch_size);
  std::vector<std::vector<long>> batches(num_batches);
  auto deal = [&](std::vector<long> idx) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (size_t i = 0; i < idx.size(); ++i) {
      batches[i % num_batches].push_back(idx[i]);
    }
  };
  deal(idx0);
  deal(idx1);
  return batches;
}

// The regulator can push lambda through several orders of magnitude before
// the constraint flips sign; without a step-size cap the amplified MMD
// gradient blows SGD up. Global-norm clipping keeps every update bounded
// without changing the descent direction.
void clip_gradients(Gradients& g, double max_norm) {
  double sq = 0.0;
  for (const auto& m : g.dW) sq += m.squaredNorm();
  for (const auto& v : g.db) sq += v.squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& m : g.dW) m *= scale;
    for (auto& v : g.db) v *= scale;
  }
}

void split_by_group(const Eigen::MatrixXd& Z, const std::vector<int>& s,
                    Eigen::MatrixXd& Z0, Eigen::MatrixXd& Z1) {
  long n0 = 0, n1 = 0;
  for (int v : s) (v == 1 ? n1 : n0)++;
  Z0.resize(n0, Z.cols());
  Z1.resize(n1, Z.cols());
  long i0 = 0, i1 = 0;
  for (long i = 0; i < Z.rows(); ++i) {
    if (s[static_cast<size_t>(i)] == 1) Z1.row(i1++) = Z.row(i);
    else Z0.row(i0++) = Z.row(i);
  }
}

}  // namespace

EncoderModel train_fair_encoder(const Dataset& dataset,
                                const TrainConfig& config) {
  config.validate();
  validate_dataset(dataset);
  const Eigen::MatrixXd& X = dataset.features;
  const std::vector<int>& s = dataset.sensitive;
  const long d = X.cols();

  std::vector<long> idx0, idx1;
  for (long i = 0; i < X.rows(); ++i) {
    (s[static_cast<size_t>(i)] == 1 ? idx1 : idx0).push_back(i);
  }
  if (idx0.size() < 2 || idx1.size() < 2) {
    throw TooFewSamples("need at least 2 rows per sensitive group");
  }

  EncoderModel model;
  model.enc_spec = config.seven_net ? seven_net_spec(d, config.rep_dim)
                                    : desk_spec(d, config.rep_dim);
  model.dec_spec = config.seven_net ? seven_net_spec(config.rep_dim, d)
                                    : desk_spec(config.rep_dim, d);
  std::mt19937 rng(config.seed);
  model.enc = init_params(model.enc_spec, rng);
  model.dec = init_params(model.dec_spec, rng);

  double lambda = std::clamp(config.lambda_init, config.lambda_min,
                             config.lambda_max);
  RegulatorState reg;
  long global_epoch = 0;

  for (long round = 1; round <= config.rounds; ++round) {
    for (long epoch = 0; epoch < config.epochs_per_round; ++epoch) {
      const double lr = config.lr.at(global_epoch++);
      for (const auto& batch :
           stratified_batches(idx0, idx1, config.batch_size, rng)) {
        Eigen::MatrixXd Xb(batch.size(), d);
        std::vector<int> sb(batch.size());
        for (size_t i = 0; i < batch.size(); ++i) {
          Xb.row(i) = X.row(batch[i]);
          sb[i] = s[static_cast<size_t>(batch[i])];
        }
        CompositeResult res =
            composite_loss_grad(model.enc_spec, model.enc, model.dec_spec,
                                model.dec, Xb, sb, lambda, config.kernel);
        clip_gradients(res.enc_grads, 5.0);
        clip_gradients(res.dec_grads, 5.0);
        sgd_step(model.enc, res.enc_grads, lr);
        sgd_step(model.dec, res.dec_grads, lr);
      }
    }
    // Regulator reads the full-dataset constraint value, not a minibatch.
    const Eigen::MatrixXd Z = encode(model, X);
    Eigen::MatrixXd Z0, Z1;
    split_by_group(Z, s, Z0, Z1);
    const double mmd2 = mmd2_unbiased(Z0, Z1, config.kernel);
    const Activations recon =
        forward(model.dec_spec, model.dec, Z);
    const double pretext = mse_loss(recon.output(), X).first;
    model.history.push_back({round, pretext, mmd2, lambda});
    lambda = regulator_update(lambda, mmd2, config.epsilon, reg,
                              config.lambda_min, config.lambda_max);
  }
  return model;
}

Eigen::MatrixXd encode(const EncoderModel& model, const Eigen::MatrixXd& X) {
  return forward(model.enc_spec, model.enc, X).output();
}

void write_history_csv(const std::string& path,
                       const std::vector<RoundStats>& history) {
  std::ofstream out(path);
  if (!out) throw FairboundError("cannot open history file: " + path);
  out << "round,pretext_loss,mmd2,lambda\n";
  for (const auto& row : history) {
    out << row.round << ',' << row.pretext_loss << ',' << row.mmd2 << ','
        << row.lambda << '\n';
  }
}

ProbeResult train_probe(const Eigen::MatrixXd& reps,
                        const std::vector<int>& labels,
                        const ProbeConfig& probe) {
  const long n = reps.rows();
  if (n != static_cast<long>(labels.size())) {
    throw FairboundError("label count does not match representation rows");
  }
  std::vector<long> idx0, idx1;
  for (long i = 0; i < n; ++i) {
    const int y = labels[static_cast<size_t>(i)];
    if (y != 0 && y != 1) throw MalformedData("probe labels must be binary", i);
    (y == 1 ? idx1 : idx0).push_back(i);
  }
  if (idx0.size() < 4 || idx1.size() < 4) {
    throw EmptyGroup("probe needs at least 4 rows per class");
  }

  // Seeded stratified 50/50 split.
  std::mt19937 rng(probe.seed);
  std::shuffle(idx0.begin(), idx0.end(), rng);
  std::shuffle(idx1.begin(), idx1.end(), rng);
  ProbeResult out;
  out.in_test.assign(static_cast<size_t>(n), 0);
  std::vector<long> train_idx;
  for (const auto* idx : {&idx0, &idx1}) {
    const size_t half = idx->size() / 2;
    for (size_t i = 0; i < idx->size(); ++i) {
      if (i < half) train_idx.push_back((*idx)[i]);
      else out.in_test[static_cast<size_t>((*idx)[i])] = 1;
    }
  }

  Eigen::MatrixXd Xtr(train_idx.size(), reps.cols());
  std::vector<int> ytr(train_idx.size());
  long tr1 = 0;
  for (size_t i = 0; i < train_idx.size(); ++i) {
    Xtr.row(i) = reps.row(train_idx[i]);
    ytr[i] = labels[static_cast<size_t>(train_idx[i])];
    tr1 += ytr[i];
  }
  const double w1 = 0.5 / static_cast<double>(tr1);
  const double w0 = 0.5 / static_cast<double>(train_idx.size() - tr1);

  const NetworkSpec spec = desk_spec(reps.cols(), 1);
  NetworkParams params = init_params(spec, rng);
  std::vector<long> order(train_idx.size());
  std::iota(order.begin(), order.end(), 0);
  for (long epoch = 0; epoch < probe.epochs; ++epoch) {
    const double lr = probe.lr.at(epoch);
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(probe.batch_size)) {
      const size_t end =
          std::min(order.size(), start + static_cast<size_t>(probe.batch_size));
      Eigen::MatrixXd Xb(end - start, reps.cols());
      std::vector<int> yb(end - start);
      for (size_t i = start; i < end; ++i) {
        Xb.row(i - start) = Xtr.row(order[i]);
        yb[i - start] = ytr[static_cast<size_t>(order[i])];
      }
      const Activations acts = forward(spec, params, Xb);
      auto [loss, d_logits] = balanced_bce_loss(acts.output(), yb, w0, w1);
      const Gradients grads = backward(spec, params, acts, d_logits);
      sgd_step(params, grads, lr);
    }
  }

  const Activations all = forward(spec, params, reps);
  out.hard.resize(static_cast<size_t>(n));
  out.scores.resize(static_cast<size_t>(n));
  long correct[2] = {0, 0}, total[2] = {0, 0};
  for (long i = 0; i < n; ++i) {
    const double z = all.output()(i, 0);
    out.scores[static_cast<size_t>(i)] = 1.0 / (1.0 + std::exp(-z));
    const int pred = z > 0.0 ? 1 : 0;
    out.hard[static_cast<size_t>(i)] = pred;
    if (out.in_test[static_cast<size_t>(i)]) {
      const int y = labels[static_cast<size_t>(i)];
      ++total[y];
      if (pred == y) ++correct[y];
    }
  }
  out.test_ba = 0.5 * (static_cast<double>(correct[0]) / total[0] +
                       static_cast<double>(correct[1]) / total[1]);
  return out;
}

CoefficientEstimate estimate_alpha(const Eigen::MatrixXd& representations,
                                   const std::vector<int>& sensitive,
                                   const ProbeConfig& probe) {
  const ProbeResult res = train_probe(representations, sensitive, probe);
  return {std::clamp(2.0 * res.test_ba - 1.0, 0.0, 1.0), res.test_ba};
}

CoefficientEstimate estimate_beta(const Eigen::MatrixXd& representations,
                                  const std::vector<int>& labels,
                                  const ProbeConfig& probe) {
  const ProbeResult res = train_probe(representations, labels, probe);
  return {std::clamp(2.0 * (1.0 - res.test_ba), 0.0, 1.0), res.test_ba};
}

}  // namespace fairbound
