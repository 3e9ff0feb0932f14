#include "fairbound/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace fairbound {

namespace {

void check_inputs(const BaseRates& rates, double alpha, double beta) {
  for (double v : {rates.r, rates.a, rates.b}) {
    if (!(v > 0.0 && v < 1.0)) throw FairboundError("base rates must lie in (0,1)");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0)) {
    throw FairboundError("alpha and beta must lie in [0,1]");
  }
}

// Class-conditional mixture weights: P(S=1 | Y=y).
double class_weight_y1(const BaseRates& rt) {
  return rt.b * rt.r / (rt.a * (1 - rt.r) + rt.b * rt.r);
}
double class_weight_y0(const BaseRates& rt) {
  return (1 - rt.b) * rt.r /
         ((1 - rt.a) * (1 - rt.r) + (1 - rt.b) * rt.r);
}

// Variable layout: distribution d in {z00, z01, z10, z11} = {0,1,2,3},
// flat index = d * atoms + atom.
constexpr int kZ00 = 0, kZ01 = 1, kZ10 = 2, kZ11 = 3;

struct RowBuilder {
  long atoms;
  Eigen::RowVectorXd row;
  explicit RowBuilder(long atoms_) : atoms(atoms_), row(4 * atoms_) {
    row.setZero();
  }
  void add(int dist, long atom, double coeff) {
    row(dist * atoms + atom) += coeff;
  }
  // Adds coeff * (Z_1 - Z_0)(atom): the group marginals mixed over y.
  void add_group_diff(const BaseRates& rt, long atom, double coeff) {
    add(kZ11, atom, coeff * rt.b);
    add(kZ10, atom, coeff * (1 - rt.b));
    add(kZ01, atom, -coeff * rt.a);
    add(kZ00, atom, -coeff * (1 - rt.a));
  }
  // Adds coeff * (Z^1 - Z^0)(atom): the class marginals mixed over s.
  void add_class_diff(const BaseRates& rt, long atom, double coeff) {
    const double w1 = class_weight_y1(rt);
    const double w0 = class_weight_y0(rt);
    add(kZ11, atom, coeff * w1);
    add(kZ01, atom, coeff * (1 - w1));
    add(kZ10, atom, -coeff * w0);
    add(kZ00, atom, -coeff * (1 - w0));
  }
};

double sign_bit(long atom, int bit_from_left, int bits) {
  const int shift = bits - 1 - bit_from_left;
  return ((atom >> shift) & 1) ? 1.0 : -1.0;
}

// Sum-to-one equality block shared by both reduced programs.
void add_equalities(LinearProgram& lp, long atoms) {
  lp.A_eq = Eigen::MatrixXd::Zero(4, 4 * atoms);
  lp.b_eq = Eigen::VectorXd::Ones(4);
  for (int d = 0; d < 4; ++d) {
    for (long t = 0; t < atoms; ++t) lp.A_eq(d, d * atoms + t) = 1.0;
  }
}

}  // namespace

void SubpopQuad::validate() const {
  const long n = z00.size();
  if (z01.size() != n || z10.size() != n || z11.size() != n || n == 0) {
    throw FairboundError("subpopulation vectors must share a nonempty atom set");
  }
  for (const auto* z : {&z00, &z01, &z10, &z11}) {
    if (z->minCoeff() < 0 || std::abs(z->sum() - 1.0) > 1e-12) {
      throw FairboundError("subpopulation vector is not a probability mass");
    }
  }
}

double GuaranteeReport::bound(FairnessNotion notion) const {
  switch (notion) {
    case FairnessNotion::SP: return sp;
    case FairnessNotion::DOpp: return dopp;
    case FairnessNotion::DR: return dr;
    case FairnessNotion::DOdds: return dodds;
    case FairnessNotion::DPC: return dpc;
    case FairnessNotion::DNC: return dnc;
    case FairnessNotion::DC: return dc;
  }
  return 0.0;
}

double sp_guarantee(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw FairboundError("alpha must lie in [0,1]");
  }
  return alpha;
}

std::vector<LinearProgram> build_rp1(FairnessNotion obj, const BaseRates& rates,
                                     double alpha, double beta) {
  check_inputs(rates, alpha, beta);
  if (obj != FairnessNotion::DOpp && obj != FairnessNotion::DR &&
      obj != FairnessNotion::DOdds) {
    throw FairboundError("RP1 covers DOpp, DR and DOdds only");
  }
  const long atoms = 8;  // (i,j,k): i = predictor output, j/k = sign bits
  const long n = 4 * atoms;

  LinearProgram base;
  base.c = Eigen::VectorXd::Zero(n);
  add_equalities(base, atoms);

  // 8 + 8 positivity rows, then fairness and discriminativeness.
  base.A_ub = Eigen::MatrixXd::Zero(2 * atoms + 2, n);
  base.b_ub = Eigen::VectorXd::Zero(2 * atoms + 2);
  RowBuilder fair(atoms), disc(atoms);
  for (long t = 0; t < atoms; ++t) {
    const double sj = sign_bit(t, 1, 3);
    const double sk = sign_bit(t, 2, 3);
    RowBuilder pos_j(atoms), pos_k(atoms);
    pos_j.add_group_diff(rates, t, -sj);  // sj*(Z1-Z0) >= 0
    pos_k.add_class_diff(rates, t, -sk);  // sk*(Z^1-Z^0) >= 0
    base.A_ub.row(t) = pos_j.row;
    base.A_ub.row(atoms + t) = pos_k.row;
    fair.add_group_diff(rates, t, 0.5 * sj);
    disc.add_class_diff(rates, t, -0.5 * sk);
  }
  base.A_ub.row(2 * atoms) = fair.row;
  base.b_ub(2 * atoms) = alpha;
  base.A_ub.row(2 * atoms + 1) = disc.row;
  base.b_ub(2 * atoms + 1) = -(1.0 - beta);

  // Objective terms: disparity of P(h=1 | y, s) over atoms with i=1.
  auto term = [&](int dist_pos, int dist_neg) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (long t = 0; t < atoms; ++t) {
      if (sign_bit(t, 0, 3) > 0) {
        c(dist_pos * atoms + t) += 1.0;
        c(dist_neg * atoms + t) -= 1.0;
      }
    }
    return c;
  };
  const Eigen::VectorXd opp = term(kZ11, kZ01);
  const Eigen::VectorXd reg = term(kZ10, kZ00);

  std::vector<LinearProgram> out;
  if (obj == FairnessNotion::DOpp || obj == FairnessNotion::DR) {
    const Eigen::VectorXd& v = obj == FairnessNotion::DOpp ? opp : reg;
    for (double s : {1.0, -1.0}) {
      LinearProgram lp = base;
      lp.c = s * v;
      out.push_back(std::move(lp));
    }
  } else {
    for (double s1 : {1.0, -1.0}) {
      for (double s2 : {1.0, -1.0}) {
        LinearProgram lp = base;
        lp.c = 0.5 * (s1 * opp + s2 * reg);
        out.push_back(std::move(lp));
      }
    }
  }
  return out;
}

LinearProgram build_rp2(FairnessNotion obj, const BaseRates& rates,
                        double alpha, double beta) {
  check_inputs(rates, alpha, beta);
  if (obj != FairnessNotion::DPC && obj != FairnessNotion::DNC &&
      obj != FairnessNotion::DC) {
    throw FairboundError("RP2 covers DPC, DNC and DC only");
  }
  const long atoms = 16;  // (i,j,k,l) sign bits
  const long n = 4 * atoms;

  LinearProgram lp;
  lp.c = Eigen::VectorXd::Zero(n);
  add_equalities(lp, atoms);
  lp.A_ub = Eigen::MatrixXd::Zero(4 * atoms + 2, n);
  lp.b_ub = Eigen::VectorXd::Zero(4 * atoms + 2);

  RowBuilder fair(atoms), disc(atoms);
  for (long t = 0; t < atoms; ++t) {
    const double si = sign_bit(t, 0, 4);
    const double sj = sign_bit(t, 1, 4);
    const double sk = sign_bit(t, 2, 4);
    const double sl = sign_bit(t, 3, 4);

    RowBuilder pos_i(atoms), pos_j(atoms), pos_k(atoms), pos_l(atoms);
    pos_i.add_group_diff(rates, t, -si);
    pos_j.add_class_diff(rates, t, -sj);
    // sk * ((1-b) Z_1^0 - (1-a) Z_0^0) >= 0
    pos_k.add(kZ10, t, -sk * (1 - rates.b));
    pos_k.add(kZ00, t, sk * (1 - rates.a));
    // sl * (b Z_1^1 - a Z_0^1) >= 0
    pos_l.add(kZ11, t, -sl * rates.b);
    pos_l.add(kZ01, t, sl * rates.a);
    lp.A_ub.row(t) = pos_i.row;
    lp.A_ub.row(atoms + t) = pos_j.row;
    lp.A_ub.row(2 * atoms + t) = pos_k.row;
    lp.A_ub.row(3 * atoms + t) = pos_l.row;

    fair.add_group_diff(rates, t, 0.5 * si);
    disc.add_class_diff(rates, t, -0.5 * sj);

    const double dpc_w = obj == FairnessNotion::DNC ? 0.0
                         : obj == FairnessNotion::DC ? 0.25
                                                     : 0.5;
    const double dnc_w = obj == FairnessNotion::DPC ? 0.0
                         : obj == FairnessNotion::DC ? 0.25
                                                     : 0.5;
    lp.c(kZ11 * atoms + t) += dpc_w * sl * rates.b;
    lp.c(kZ01 * atoms + t) -= dpc_w * sl * rates.a;
    lp.c(kZ10 * atoms + t) += dnc_w * sk * (1 - rates.b);
    lp.c(kZ00 * atoms + t) -= dnc_w * sk * (1 - rates.a);
  }
  lp.A_ub.row(4 * atoms) = fair.row;
  lp.b_ub(4 * atoms) = alpha;
  lp.A_ub.row(4 * atoms + 1) = disc.row;
  lp.b_ub(4 * atoms + 1) = -(1.0 - beta);
  return lp;
}

double guarantee(FairnessNotion obj, const BaseRates& rates, double alpha,
                 double beta, const SimplexOptions& opts) {
  if (obj == FairnessNotion::SP) return sp_guarantee(alpha);

  std::vector<LinearProgram> programs;
  if (obj == FairnessNotion::DOpp || obj == FairnessNotion::DR ||
      obj == FairnessNotion::DOdds) {
    programs = build_rp1(obj, rates, alpha, beta);
  } else {
    programs.push_back(build_rp2(obj, rates, alpha, beta));
  }

  bool any_feasible = false;
  double best = 0.0;
  for (const auto& lp : programs) {
    const LpSolution sol = solve(lp, opts);
    if (sol.status == LpStatus::Unbounded) {
      throw NumericalFailure("reduced program reported unbounded");
    }
    if (sol.status == LpStatus::Infeasible) continue;
    best = any_feasible ? std::max(best, sol.objective) : sol.objective;
    any_feasible = true;
  }
  // The calibration disparities can never drop below half the base-rate gap,
  // so that floor is a valid (and monotone) value even where the programs
  // are infeasible.
  const bool calibration_notion = obj == FairnessNotion::DPC ||
                                  obj == FairnessNotion::DNC ||
                                  obj == FairnessNotion::DC;
  const double floor =
      calibration_notion ? calibration_lower_bound(rates) : 0.0;
  // No representation attains (alpha, beta) at these rates (the trade-off
  // region); the bound holds vacuously.
  if (!any_feasible) return floor;

  if (best < -1e-6 || best > 1.0 + 1e-6) {
    throw NumericalFailure("guarantee outside [0,1] beyond tolerance");
  }
  return std::max(std::clamp(best, 0.0, 1.0), floor);
}

OracleResult oracle_objective(FairnessNotion obj, const SubpopQuad& quad) {
  quad.validate();
  const BaseRates& rt = quad.rates;
  const Eigen::VectorXd g1 = rt.b * quad.z11 + (1 - rt.b) * quad.z10;
  const Eigen::VectorXd g0 = rt.a * quad.z01 + (1 - rt.a) * quad.z00;
  const double w1 = class_weight_y1(rt);
  const double w0 = class_weight_y0(rt);
  const Eigen::VectorXd c1 = w1 * quad.z11 + (1 - w1) * quad.z01;
  const Eigen::VectorXd c0 = w0 * quad.z10 + (1 - w0) * quad.z00;

  OracleResult out;
  out.alpha_prime = 0.5 * (g1 - g0).lpNorm<1>();
  out.beta_prime = 1.0 - 0.5 * (c1 - c0).lpNorm<1>();

  const Eigen::VectorXd d1 = quad.z11 - quad.z01;
  const Eigen::VectorXd d0 = quad.z10 - quad.z00;
  auto pos_mass = [](const Eigen::VectorXd& v) {
    return v.cwiseMax(0.0).sum();
  };
  switch (obj) {
    case FairnessNotion::SP:
      out.value = out.alpha_prime;
      break;
    case FairnessNotion::DOpp:
      out.value = std::max(pos_mass(d1), pos_mass(-d1));
      break;
    case FairnessNotion::DR:
      out.value = std::max(pos_mass(d0), pos_mass(-d0));
      break;
    case FairnessNotion::DOdds: {
      double best = 0.0;
      for (double s1 : {1.0, -1.0}) {
        for (double s2 : {1.0, -1.0}) {
          best = std::max(best, 0.5 * pos_mass(s1 * d1 + s2 * d0));
        }
      }
      out.value = best;
      break;
    }
    case FairnessNotion::DPC:
      out.value = 0.5 * (rt.b * quad.z11 - rt.a * quad.z01).lpNorm<1>();
      break;
    case FairnessNotion::DNC:
      out.value =
          0.5 * ((1 - rt.b) * quad.z10 - (1 - rt.a) * quad.z00).lpNorm<1>();
      break;
    case FairnessNotion::DC:
      out.value =
          0.25 * ((rt.b * quad.z11 - rt.a * quad.z01).lpNorm<1>() +
                  ((1 - rt.b) * quad.z10 - (1 - rt.a) * quad.z00).lpNorm<1>());
      break;
  }
  return out;
}

double calibration_lower_bound(const BaseRates& rates) {
  return 0.5 * std::abs(rates.a - rates.b);
}

double tradeoff_beta_lower_bound(const BaseRates& rates, double alpha) {
  check_inputs(rates, alpha, 0.0);
  const double r = rates.r, a = rates.a, b = rates.b;
  const double gap = std::abs(a - b);
  const double denom = r * (1 - r) * (a / r + b / (1 - r)) *
                       ((1 - a) / r + (1 - b) / (1 - r));
  return std::max(0.0, (gap * gap - gap * alpha) / denom);
}

GuaranteeReport guarantee_report(const BaseRates& rates, double alpha,
                                 double beta) {
  check_inputs(rates, alpha, beta);
  GuaranteeReport rep;
  rep.alpha = alpha;
  rep.beta = beta;
  rep.rates = rates;
  rep.sp = sp_guarantee(alpha);
  rep.dopp = guarantee(FairnessNotion::DOpp, rates, alpha, beta);
  rep.dr = guarantee(FairnessNotion::DR, rates, alpha, beta);
  rep.dodds = guarantee(FairnessNotion::DOdds, rates, alpha, beta);
  rep.dpc = guarantee(FairnessNotion::DPC, rates, alpha, beta);
  rep.dnc = guarantee(FairnessNotion::DNC, rates, alpha, beta);
  rep.dc = guarantee(FairnessNotion::DC, rates, alpha, beta);
  rep.calibration_lower = calibration_lower_bound(rates);
  rep.tradeoff_beta_lower = tradeoff_beta_lower_bound(rates, alpha);

  const double a2 = std::min(1.0, alpha + 0.01);
  const double b2 = std::min(1.0, beta + 0.01);
  for (FairnessNotion notion :
       {FairnessNotion::SP, FairnessNotion::DOpp, FairnessNotion::DR,
        FairnessNotion::DOdds, FairnessNotion::DPC, FairnessNotion::DNC,
        FairnessNotion::DC}) {
    const double relaxed = guarantee(notion, rates, a2, b2);
    if (relaxed < rep.bound(notion) - 1e-9) {
      rep.monotone_ok = false;
      break;
    }
  }
  return rep;
}

BoundCurve bound_curve(FairnessNotion obj, const BaseRates& rates,
                       const std::vector<std::pair<double, double>>& grid) {
  BoundCurve curve;
  for (const auto& [alpha, beta] : grid) {
    const double v = guarantee(obj, rates, alpha, beta);
    curve.rows.push_back({alpha, beta, v});
    if (alpha == beta && alpha > 0) {
      curve.slope_estimate = std::max(curve.slope_estimate, v / alpha);
    }
  }
  return curve;
}

}  // namespace fairbound
