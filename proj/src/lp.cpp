#include "fairbound/lp.hpp"

#include <cmath>
#include <vector>

namespace fairbound {

void LinearProgram::validate() const {
  const long n = c.size();
  if (n == 0) throw FairboundError("linear program has no variables");
  if (A_eq.rows() != b_eq.size() || (A_eq.rows() > 0 && A_eq.cols() != n)) {
    throw FairboundError("equality block dimensions inconsistent");
  }
  if (A_ub.rows() != b_ub.size() || (A_ub.rows() > 0 && A_ub.cols() != n)) {
    throw FairboundError("inequality block dimensions inconsistent");
  }
  auto finite = [](const auto& m) { return m.allFinite(); };
  if (!finite(c) || (A_eq.size() > 0 && !finite(A_eq)) || !finite(b_eq) ||
      (A_ub.size() > 0 && !finite(A_ub)) || !finite(b_ub)) {
    throw FairboundError("linear program has non-finite entries");
  }
}

namespace {

// Full-tableau simplex over a fixed basis. Columns [0,n) are structural,
// [n, n+mu) slacks, [n+mu, n+mu+na) artificials.
struct Tableau {
  Eigen::MatrixXd A;  // m x total
  Eigen::VectorXd b;  // m
  std::vector<long> basis;
  std::vector<long> artificial_rows;
  std::vector<double> artificial_signs;  // -1 where the row was negated
  long total = 0;
  long artificial_begin = 0;

  void pivot(long row, long col) {
    const double p = A(row, col);
    A.row(row) /= p;
    b(row) /= p;
    for (long i = 0; i < A.rows(); ++i) {
      if (i == row) continue;
      const double f = A(i, col);
      if (f != 0.0) {
        A.row(i) -= f * A.row(row);
        b(i) -= f * b(row);
      }
    }
    basis[static_cast<size_t>(row)] = col;
  }
};

// Maximizes cost'x over the tableau with Bland's rule. `allowed_end` caps
// which columns may enter (used to lock artificials out in phase 2).
enum class RunStatus { Optimal, Unbounded };

RunStatus run_simplex(Tableau& t, const Eigen::VectorXd& cost,
                      long allowed_end, const SimplexOptions& opts,
                      long* iterations) {
  const long m = t.A.rows();
  // Reduced costs maintained from scratch each iteration; programs here are
  // tiny (<= ~70 variables) so the O(m * total) recompute is irrelevant.
  for (;; ++(*iterations)) {
    if (*iterations > opts.max_iterations) {
      throw NumericalFailure("simplex iteration cap exceeded");
    }
    Eigen::VectorXd cb(m);
    for (long i = 0; i < m; ++i) cb(i) = cost(t.basis[static_cast<size_t>(i)]);
    long entering = -1;
    for (long j = 0; j < allowed_end; ++j) {
      const double reduced = cost(j) - cb.dot(t.A.col(j));
      if (reduced > opts.pivot_tol) {  // Bland: first improving index
        entering = j;
        break;
      }
    }
    if (entering < 0) return RunStatus::Optimal;

    long leaving = -1;
    double best_ratio = 0.0;
    for (long i = 0; i < m; ++i) {
      const double aij = t.A(i, entering);
      if (aij > opts.pivot_tol) {
        const double ratio = t.b(i) / aij;
        if (leaving < 0 || ratio < best_ratio - opts.pivot_tol ||
            (std::abs(ratio - best_ratio) <= opts.pivot_tol &&
             t.basis[static_cast<size_t>(i)] <
                 t.basis[static_cast<size_t>(leaving)])) {
          leaving = i;
          best_ratio = ratio;
        }
      }
    }
    if (leaving < 0) return RunStatus::Unbounded;
    t.pivot(leaving, entering);
  }
}

}  // namespace

LpSolution solve(const LinearProgram& lp, const SimplexOptions& opts) {
  lp.validate();
  const long n = lp.num_vars();
  const long me = lp.A_eq.rows();
  const long mu = lp.A_ub.rows();
  const long m = me + mu;

  Tableau t;
  t.total = n + mu + m;  // worst case: one artificial per row
  t.A = Eigen::MatrixXd::Zero(m, t.total);
  t.b = Eigen::VectorXd::Zero(m);
  if (me > 0) {
    t.A.block(0, 0, me, n) = lp.A_eq;
    t.b.head(me) = lp.b_eq;
  }
  if (mu > 0) {
    t.A.block(me, 0, mu, n) = lp.A_ub;
    t.b.tail(mu) = lp.b_ub;
    for (long i = 0; i < mu; ++i) t.A(me + i, n + i) = 1.0;
  }
  std::vector<double> row_sign(static_cast<size_t>(m), 1.0);
  for (long i = 0; i < m; ++i) {
    if (t.b(i) < 0) {
      t.A.row(i) = -t.A.row(i);
      t.b(i) = -t.b(i);
      row_sign[static_cast<size_t>(i)] = -1.0;
    }
  }

  // Rows whose slack survived the sign flip start basic on it; all others
  // get an artificial.
  t.artificial_begin = n + mu;
  long na = 0;
  t.basis.assign(static_cast<size_t>(m), -1);
  for (long i = 0; i < m; ++i) {
    if (i >= me && t.A(i, n + (i - me)) == 1.0) {
      t.basis[static_cast<size_t>(i)] = n + (i - me);
    } else {
      const long art = t.artificial_begin + na++;
      t.A(i, art) = 1.0;
      t.basis[static_cast<size_t>(i)] = art;
      t.artificial_rows.push_back(i);
      t.artificial_signs.push_back(row_sign[static_cast<size_t>(i)]);
    }
  }
  t.A.conservativeResize(m, t.artificial_begin + na);
  t.total = t.artificial_begin + na;

  long iterations = 0;
  LpSolution sol;

  if (na > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(t.total);
    for (long j = t.artificial_begin; j < t.total; ++j) phase1(j) = -1.0;
    run_simplex(t, phase1, t.total, opts, &iterations);
    double infeas = 0.0;
    for (long i = 0; i < m; ++i) {
      if (t.basis[static_cast<size_t>(i)] >= t.artificial_begin)
        infeas += t.b(i);
    }
    if (infeas > opts.feasibility_tol) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    // Pivot degenerate artificials out where possible; a row with no
    // eligible pivot is redundant and its zero-valued artificial is locked
    // out of phase 2 by the allowed_end cap below.
    for (long i = 0; i < m; ++i) {
      if (t.basis[static_cast<size_t>(i)] < t.artificial_begin) continue;
      for (long j = 0; j < t.artificial_begin; ++j) {
        if (std::abs(t.A(i, j)) > opts.pivot_tol) {
          t.pivot(i, j);
          break;
        }
      }
    }
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(t.total);
  phase2.head(n) = lp.c;
  const RunStatus status =
      run_simplex(t, phase2, t.artificial_begin, opts, &iterations);
  if (status == RunStatus::Unbounded) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }

  // Re-solve the final basis against the original (unflipped) data so the
  // reported point is not polluted by accumulated tableau roundoff.
  Eigen::MatrixXd basis_cols(m, m);
  for (long i = 0; i < m; ++i) {
    const long j = t.basis[static_cast<size_t>(i)];
    Eigen::VectorXd col = Eigen::VectorXd::Zero(m);
    if (j < n) {
      if (me > 0) col.head(me) = lp.A_eq.col(j);
      if (mu > 0) col.tail(mu) = lp.A_ub.col(j);
    } else if (j < n + mu) {
      col(me + (j - n)) = 1.0;
    } else {
      // Residual zero-valued artificial on a redundant row; its column is
      // +/- e_row depending on the sign flip applied above.
      col(t.artificial_rows[static_cast<size_t>(j - t.artificial_begin)]) =
          t.artificial_signs[static_cast<size_t>(j - t.artificial_begin)];
    }
    basis_cols.col(i) = col;
  }
  Eigen::VectorXd rhs(m);
  if (me > 0) rhs.head(me) = lp.b_eq;
  if (mu > 0) rhs.tail(mu) = lp.b_ub;
  const Eigen::VectorXd xb = basis_cols.partialPivLu().solve(rhs);

  sol.x = Eigen::VectorXd::Zero(n);
  for (long i = 0; i < m; ++i) {
    const long j = t.basis[static_cast<size_t>(i)];
    if (j < n) sol.x(j) = xb(i);
  }
  for (long j = 0; j < n; ++j) {
    if (std::abs(sol.x(j)) < 1e-12) sol.x(j) = 0.0;
  }
  sol.objective = lp.c.dot(sol.x);
  sol.status = LpStatus::Optimal;

  // Independent feasibility recheck against the original data.
  const double tol = opts.feasibility_tol;
  if (me > 0 && (lp.A_eq * sol.x - lp.b_eq).cwiseAbs().maxCoeff() > tol) {
    throw NumericalFailure("simplex solution violates equality constraints");
  }
  if (mu > 0 && (lp.A_ub * sol.x - lp.b_ub).maxCoeff() > tol) {
    throw NumericalFailure("simplex solution violates inequality constraints");
  }
  if (sol.x.minCoeff() < -1e-12) {
    throw NumericalFailure("simplex solution violates nonnegativity");
  }
  return sol;
}

}  // namespace fairbound
