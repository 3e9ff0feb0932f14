#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "fairbound/bounds.hpp"
#include "fairbound/data.hpp"
#include "fairbound/learn.hpp"
#include "fairbound/metrics.hpp"
#include "fairbound/report.hpp"

namespace {

using nlohmann::json;

void emit(const json& doc, const std::string& output) {
  if (output.empty()) {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream out(output);
  if (!out) throw fairbound::FairboundError("cannot write output: " + output);
  out << doc.dump(2) << '\n';
}

void emit_text(const std::string& text, const std::string& output) {
  if (output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(output);
  if (!out) throw fairbound::FairboundError("cannot write output: " + output);
  out << text;
}

fairbound::FairnessNotion parse_notion(const std::string& name) {
  using N = fairbound::FairnessNotion;
  if (name == "sp") return N::SP;
  if (name == "dopp") return N::DOpp;
  if (name == "dr") return N::DR;
  if (name == "dodds") return N::DOdds;
  if (name == "dpc") return N::DPC;
  if (name == "dnc") return N::DNC;
  if (name == "dc") return N::DC;
  throw fairbound::FairboundError("unknown fairness notion: " + name);
}

// Schema file: one `column=role` line per column, '#' comments.
fairbound::ColumnSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fairbound::FairboundError("cannot open schema file: " + path);
  fairbound::ColumnSchema schema;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    // split on the LAST '=': column names may themselves contain '='
    // (one-hot columns like "job=clerk")
    const auto eq = line.rfind('=');
    if (eq == std::string::npos) {
      throw fairbound::MalformedData("schema line is not column=role", line_no);
    }
    fairbound::ColumnSpec col;
    col.name = strip(line.substr(0, eq));
    col.role = fairbound::parse_column_role(strip(line.substr(eq + 1)));
    for (const auto& existing : schema.columns) {
      if (existing.name == col.name) {
        throw fairbound::FairboundError("duplicate schema column: " + col.name);
      }
    }
    schema.columns.push_back(std::move(col));
  }
  schema.validate();
  return schema;
}

// The encoder must never see target information; a feature column that
// reproduces a target label column exactly is treated as leakage.
void check_target_leakage(const fairbound::Dataset& d) {
  for (const auto& [name, labels] : d.targets) {
    for (long j = 0; j < d.features.cols(); ++j) {
      bool identical = true;
      for (long i = 0; i < d.rows(); ++i) {
        if (d.features(i, j) !=
            static_cast<double>(labels[static_cast<size_t>(i)])) {
          identical = false;
          break;
        }
      }
      if (identical) {
        throw fairbound::FairboundError(
            "target column '" + name + "' leaks into feature column '" +
            (j < static_cast<long>(d.feature_names.size())
                 ? d.feature_names[static_cast<size_t>(j)]
                 : std::to_string(j)) +
            "'");
      }
    }
  }
}

struct MetricsArgs {
  std::string input, output;
  int bins = 101;
  bool distinct = false;
  unsigned seed = 0;
};

int cmd_metrics(const MetricsArgs& args) {
  const auto records = fairbound::load_predictions_csv(args.input);
  fairbound::ScoreBinning binning;
  binning.mode = args.distinct ? fairbound::ScoreBinning::Mode::DistinctValues
                               : fairbound::ScoreBinning::Mode::UniformGrid;
  binning.grid_size = args.bins;
  const auto rep = fairbound::fairness_report(records, binning);
  json doc = fairbound::report_skeleton("metrics", args.seed);
  doc["rates"] = fairbound::rates_json(fairbound::base_rates(records));
  doc["metrics"] = fairbound::metrics_json(rep);
  emit(doc, args.output);
  return 0;
}

struct BoundArgs {
  double r = 0.5, a = 0.5, b = 0.5, alpha = 0.0, beta = 0.0;
  int grid = 0;
  std::string notion = "dodds";
  std::string output;
  unsigned seed = 0;
};

int cmd_bound(const BoundArgs& args) {
  const fairbound::BaseRates rates =
      fairbound::clamp_rates({args.r, args.a, args.b});
  if (args.grid > 0) {
    std::vector<std::pair<double, double>> grid;
    for (int i = 0; i < args.grid; ++i) {
      for (int j = 0; j < args.grid; ++j) {
        grid.emplace_back(i / double(args.grid - 1 > 0 ? args.grid - 1 : 1),
                          j / double(args.grid - 1 > 0 ? args.grid - 1 : 1));
      }
    }
    const auto curve =
        fairbound::bound_curve(parse_notion(args.notion), rates, grid);
    std::ostringstream csv;
    csv << "alpha,beta,value\n" << std::setprecision(10);
    for (const auto& row : curve.rows) {
      csv << row.alpha << ',' << row.beta << ',' << row.value << '\n';
    }
    csv << "# slope_estimate=" << curve.slope_estimate << '\n';
    emit_text(csv.str(), args.output);
    return 0;
  }
  const auto rep = fairbound::guarantee_report(rates, args.alpha, args.beta);
  json doc = fairbound::report_skeleton("bound", args.seed);
  doc["rates"] = fairbound::rates_json(rates);
  doc["guarantees"] = fairbound::guarantees_json(rep);
  emit(doc, args.output);
  return 0;
}

struct TrainArgs {
  std::string input, schema, output;
  std::string checkpoint = "model.bin";
  std::string history = "history.csv";
  fairbound::TrainConfig cfg;
  std::string kernel_family = "rq";
  long probe_epochs = 60;
};

int cmd_train(const TrainArgs& args_in) {
  TrainArgs args = args_in;
  args.cfg.kernel.family =
      args.kernel_family == "gaussian"
          ? fairbound::KernelSpec::Family::Gaussian
          : fairbound::KernelSpec::Family::RationalQuadratic;
  const auto schema = load_schema(args.schema);
  const auto loaded = fairbound::load_csv(args.input, schema);
  const fairbound::Dataset& d = loaded.dataset;
  check_target_leakage(d);

  const auto model = fairbound::train_fair_encoder(d, args.cfg);
  fairbound::save_params(args.checkpoint, model.enc_spec, model.enc);
  fairbound::save_params(args.checkpoint + ".dec", model.dec_spec, model.dec);
  fairbound::write_history_csv(args.history, model.history);

  const Eigen::MatrixXd reps = fairbound::encode(model, d.features);
  fairbound::ProbeConfig probe;
  probe.epochs = args.probe_epochs;
  probe.seed = args.cfg.seed;
  const auto adv = fairbound::estimate_alpha(reps, d.sensitive, probe);

  json doc = fairbound::report_skeleton("train", args.cfg.seed);
  doc["estimates"] = {{"alpha_hat", fairbound::sig6(adv.coefficient)},
                      {"adversary_ba", fairbound::sig6(adv.ba)},
                      {"targets", json::object()}};
  for (const auto& [name, labels] : d.targets) {
    const auto res = fairbound::train_probe(reps, labels, probe);
    const double beta_hat = std::clamp(2.0 * (1.0 - res.test_ba), 0.0, 1.0);
    doc["estimates"]["targets"][name] = {
        {"beta_hat", fairbound::sig6(beta_hat)},
        {"task_ba", fairbound::sig6(res.test_ba)}};

    std::vector<fairbound::PredictionRecord> records;
    records.reserve(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) {
      records.push_back({d.sensitive[i], labels[i], res.scores[i],
                         res.hard[i]});
    }
    const auto rates = fairbound::base_rates(records);
    doc["rates"][name] = fairbound::rates_json(rates);
    doc["metrics"][name] =
        fairbound::metrics_json(fairbound::fairness_report(records, {}));
    doc["guarantees"][name] = fairbound::guarantees_json(
        fairbound::guarantee_report(rates, adv.coefficient, beta_hat));
  }
  emit(doc, args.output);
  return 0;
}

struct SynthArgs {
  std::string generator, output;
  long n = 10000;
  double delta = 0.01;
  double p1 = 0.5, p2 = 0.5, r = 0.5, rate = 0.5;
  unsigned seed = 0;
};

int cmd_synth(const SynthArgs& args) {
  if (args.output.empty()) {
    throw fairbound::FairboundError("synth requires --output");
  }
  std::ostringstream csv;
  csv << std::setprecision(10);
  json sidecar = {{"generator", args.generator},
                  {"n", args.n},
                  {"seed", args.seed}};
  if (args.generator == "muc") {
    const auto out =
        fairbound::synth_muc_counterexample(args.n, args.delta, args.seed);
    csv << "z,s,y,score\n";
    for (long i = 0; i < args.n; ++i) {
      const auto& rec = out.records[static_cast<size_t>(i)];
      csv << out.representation(i) << ',' << rec.s << ',' << rec.y << ','
          << rec.score << '\n';
    }
    sidecar["delta"] = args.delta;
    sidecar["population"] = {{"alpha", 0.0}, {"muc", 1.0}};
  } else if (args.generator == "correlated") {
    const auto d =
        fairbound::synth_correlated(args.n, args.p1, args.p2, args.r, args.seed);
    for (const auto& name : d.feature_names) csv << name << ',';
    csv << "s,t1,t2,t3\n";
    for (long i = 0; i < d.rows(); ++i) {
      for (long j = 0; j < d.features.cols(); ++j) csv << d.features(i, j) << ',';
      csv << d.sensitive[static_cast<size_t>(i)];
      for (const auto& [name, labels] : d.targets) {
        csv << ',' << labels[static_cast<size_t>(i)];
      }
      csv << '\n';
    }
    sidecar["r"] = args.r;
    sidecar["p1"] = args.p1;
    sidecar["p2"] = args.p2;
  } else if (args.generator == "exact") {
    const auto out = fairbound::synth_exact(args.n, args.r, args.rate, args.seed);
    const fairbound::Dataset& d = out.dataset;
    for (const auto& name : d.feature_names) csv << name << ',';
    csv << "s,y\n";
    for (long i = 0; i < d.rows(); ++i) {
      for (long j = 0; j < d.features.cols(); ++j) csv << d.features(i, j) << ',';
      csv << d.sensitive[static_cast<size_t>(i)] << ','
          << d.target("y")[static_cast<size_t>(i)] << '\n';
    }
    sidecar["r"] = args.r;
    sidecar["common_rate"] = args.rate;
  } else {
    throw fairbound::FairboundError("unknown generator: " + args.generator);
  }
  emit_text(csv.str(), args.output);
  std::ofstream side(args.output + ".json");
  if (!side) {
    throw fairbound::FairboundError("cannot write sidecar: " + args.output +
                                    ".json");
  }
  side << sidecar.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fair-representation metrics, guarantees and training"};
  app.require_subcommand(1);

  MetricsArgs margs;
  auto* metrics = app.add_subcommand("metrics", "fairness metrics from a predictions CSV");
  metrics->set_config("--config");
  metrics->add_option("--input", margs.input, "predictions CSV (s,y,score[,yhat])")
      ->required();
  metrics->add_option("--bins", margs.bins, "uniform score-grid size")
      ->check(CLI::Range(2, 1000000));
  metrics->add_flag("--distinct", margs.distinct, "bin on distinct score values");
  metrics->add_option("--output", margs.output, "output file (default stdout)");
  metrics->add_option("--seed", margs.seed)->envname("FAIRBOUND_SEED");

  BoundArgs bargs;
  auto* bound = app.add_subcommand("bound", "fairness guarantees from (r,a,b,alpha,beta)");
  bound->set_config("--config");
  bound->add_option("--r", bargs.r)->required()->check(CLI::Range(1e-12, 1.0 - 1e-12));
  bound->add_option("--a", bargs.a)->required()->check(CLI::Range(1e-12, 1.0 - 1e-12));
  bound->add_option("--b", bargs.b)->required()->check(CLI::Range(1e-12, 1.0 - 1e-12));
  bound->add_option("--alpha", bargs.alpha)->check(CLI::Range(0.0, 1.0));
  bound->add_option("--beta", bargs.beta)->check(CLI::Range(0.0, 1.0));
  bound->add_option("--grid", bargs.grid, "emit an NxN bound-curve CSV instead")
      ->check(CLI::Range(2, 1000));
  bound->add_option("--notion", bargs.notion)
      ->check(CLI::IsMember({"sp", "dopp", "dr", "dodds", "dpc", "dnc", "dc"}));
  bound->add_option("--output", bargs.output);
  bound->add_option("--seed", bargs.seed)->envname("FAIRBOUND_SEED");

  TrainArgs targs;
  auto* train = app.add_subcommand("train", "train a fair encoder and evaluate it");
  train->set_config("--config");
  train->add_option("--input", targs.input, "dataset CSV")->required();
  train->add_option("--schema", targs.schema, "column=role schema file")->required();
  train->add_option("--rep-dim", targs.cfg.rep_dim)->check(CLI::PositiveNumber);
  train->add_option("--rounds", targs.cfg.rounds)->check(CLI::PositiveNumber);
  train->add_option("--epochs-per-round", targs.cfg.epochs_per_round)
      ->check(CLI::PositiveNumber);
  train->add_option("--batch", targs.cfg.batch_size)->check(CLI::Range(4, 1 << 20));
  train->add_option("--lr", targs.cfg.lr.base)->check(CLI::PositiveNumber);
  train->add_option("--lr-decay-epochs", targs.cfg.lr.decay_epochs,
                    "epochs at which lr is divided by 10");
  train->add_option("--lambda-init", targs.cfg.lambda_init);
  train->add_option("--epsilon", targs.cfg.epsilon);
  train->add_option("--kernel", targs.kernel_family)
      ->check(CLI::IsMember({"rq", "gaussian"}));
  train->add_option("--lengthscale", targs.cfg.kernel.lengthscale)
      ->check(CLI::PositiveNumber);
  train->add_option("--shape", targs.cfg.kernel.shape)->check(CLI::PositiveNumber);
  train->add_flag("--seven-net", targs.cfg.seven_net, "7-layer 8x-width profile");
  train->add_option("--probe-epochs", targs.probe_epochs)->check(CLI::PositiveNumber);
  train->add_option("--checkpoint", targs.checkpoint);
  train->add_option("--history", targs.history);
  train->add_option("--output", targs.output);
  train->add_option("--seed", targs.cfg.seed)->envname("FAIRBOUND_SEED");

  SynthArgs sargs;
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset CSV + sidecar");
  synth->set_config("--config");
  synth->add_option("--generator", sargs.generator)
      ->required()
      ->check(CLI::IsMember({"muc", "correlated", "exact"}));
  synth->add_option("--n", sargs.n)->check(CLI::Range(1L, 100000000L));
  synth->add_option("--delta", sargs.delta)->check(CLI::Range(1e-9, 0.1));
  synth->add_option("--p1", sargs.p1)->check(CLI::Range(1e-12, 1.0 - 1e-12));
  synth->add_option("--p2", sargs.p2)->check(CLI::Range(1e-12, 1.0 - 1e-12));
  synth->add_option("--r", sargs.r)->check(CLI::Range(1e-12, 1.0 - 1e-12));
  synth->add_option("--rate", sargs.rate)->check(CLI::Range(1e-12, 1.0 - 1e-12));
  synth->add_option("--output", sargs.output)->required();
  synth->add_option("--seed", sargs.seed)->envname("FAIRBOUND_SEED");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (metrics->parsed()) return cmd_metrics(margs);
    if (bound->parsed()) return cmd_bound(bargs);
    if (train->parsed()) return cmd_train(targs);
    if (synth->parsed()) return cmd_synth(sargs);
  } catch (const fairbound::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const fairbound::FairboundError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
