#include "csmix/param_sampler.hpp"

#include "csmix/logit.hpp"
#include "csmix/parallel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <vector>

namespace csmix {

bool mh_accept(double log_ratio, Rng& rng) {
  if (log_ratio == kNegInf || std::isnan(log_ratio)) return false;
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform()) < log_ratio;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// log L(beta) with optional gradient and Hessian of the likelihood part.
double beta_ll_grad_hess(const VectorXd& beta, const ResponseParams& params,
                         const ConsiderationState& C, const PanelDataset& data,
                         VectorXd* grad, MatrixXd* hess) {
  const int d = static_cast<int>(beta.size());
  double ll = 0.0;
  if (grad) grad->setZero(d);
  if (hess) hess->setZero(d, d);
  VectorXd xbar(d);
  MatrixXd xxp(d, d);
  for (int i = 0; i < data.n; ++i) {
    const auto& sub = data.subjects[i];
    const CsRow& row = C.rows[i];
    for (int t = 0; t < sub.T(); ++t) {
      double m = kNegInf;
      for (int j = 0; j < data.J; ++j) {
        if (!row[j]) continue;
        double v = params.delta[j];
        const double* x = data.x_at(i, t, j);
        for (int k = 0; k < d; ++k) v += x[k] * beta[k];
        const double* z = data.z_at(i, t, j);
        for (int k = 0; k < data.d_z; ++k) v += z[k] * params.b[i][k];
        m = std::max(m, v);
      }
      double denom = 0.0;
      double vy = 0.0;
      xbar.setZero();
      xxp.setZero();
      for (int j = 0; j < data.J; ++j) {
        if (!row[j]) continue;
        double v = params.delta[j];
        const double* x = data.x_at(i, t, j);
        for (int k = 0; k < d; ++k) v += x[k] * beta[k];
        const double* z = data.z_at(i, t, j);
        for (int k = 0; k < data.d_z; ++k) v += z[k] * params.b[i][k];
        const double e = std::exp(v - m);
        denom += e;
        if (j == sub.y[t]) vy = v;
        if (grad) {
          for (int k = 0; k < d; ++k) xbar[k] += e * x[k];
        }
        if (hess) {
          for (int k = 0; k < d; ++k)
            for (int l = 0; l <= k; ++l) xxp(k, l) += e * x[k] * x[l];
        }
      }
      ll += (vy - m) - std::log(denom);
      if (grad) {
        const double* xy = data.x_at(i, t, sub.y[t]);
        for (int k = 0; k < d; ++k) (*grad)[k] += xy[k] - xbar[k] / denom;
      }
      if (hess) {
        for (int k = 0; k < d; ++k)
          for (int l = 0; l <= k; ++l) {
            const double hkl = xxp(k, l) / denom - (xbar[k] / denom) * (xbar[l] / denom);
            (*hess)(k, l) -= hkl;
            if (l != k) (*hess)(l, k) -= hkl;
          }
      }
    }
  }
  return ll;
}

}  // namespace

double beta_conditional_loglik(const VectorXd& beta, const ResponseParams& params,
                               const ConsiderationState& C, const PanelDataset& data) {
  return beta_ll_grad_hess(beta, params, C, data, nullptr, nullptr);
}

TailoredProposal tailor_beta(const ResponseParams& params, const ConsiderationState& C,
                             const PanelDataset& data, const Hyperparams& hyper) {
  const int d = static_cast<int>(params.beta.size());
  TailoredProposal prop;
  prop.scale = hyper.proposal_scale;
  VectorXd beta = params.beta;
  VectorXd grad(d);
  MatrixXd hess(d, d);
  const double prior_prec = 1.0 / hyper.v_beta;

  auto target = [&](const VectorXd& x) {
    return beta_ll_grad_hess(x, params, C, data, nullptr, nullptr) - 0.5 * prior_prec * x.squaredNorm();
  };

  double cur = target(beta);
  for (int it = 1; it <= hyper.newton_max_iter; ++it) {
    prop.iterations = it;
    beta_ll_grad_hess(beta, params, C, data, &grad, &hess);
    grad -= prior_prec * beta;
    hess.diagonal().array() -= prior_prec;
    if (grad.lpNorm<Eigen::Infinity>() < hyper.newton_tol) break;
    Eigen::LLT<MatrixXd> llt(-hess);
    if (llt.info() != Eigen::Success) break;
    VectorXd step = llt.solve(grad);
    // in the quadratic regime the value improvement sinks below rounding
    // noise; take the plain Newton step there instead of line searching
    if (grad.dot(step) < 1e-6) {
      beta += step;
      cur = target(beta);
      continue;
    }
    double lam = 1.0;
    VectorXd cand = beta + step;
    double cand_val = target(cand);
    int halvings = 0;
    while (cand_val < cur && halvings < 40) {
      lam *= 0.5;
      cand = beta + lam * step;
      cand_val = target(cand);
      ++halvings;
    }
    beta = cand;
    cur = cand_val;
  }
  // gradient and curvature at the final point
  beta_ll_grad_hess(beta, params, C, data, &grad, &hess);
  grad -= prior_prec * beta;
  hess.diagonal().array() -= prior_prec;
  prop.converged = grad.lpNorm<Eigen::Infinity>() < hyper.newton_tol;
  prop.mode = beta;
  Eigen::LLT<MatrixXd> llt(-hess);
  if (llt.info() != Eigen::Success) {
    prop.converged = false;
    prop.cov = hyper.v_beta * MatrixXd::Identity(d, d);
  } else {
    prop.cov = llt.solve(MatrixXd::Identity(d, d));
  }
  prop.cov *= prop.scale;
  return prop;
}

namespace {

double mvn_logpdf(const VectorXd& x, const VectorXd& mean, const Eigen::LLT<MatrixXd>& cov_llt) {
  const VectorXd r = x - mean;
  const VectorXd half = cov_llt.matrixL().solve(r);
  double logdet = 0.0;
  for (int k = 0; k < x.size(); ++k) logdet += std::log(cov_llt.matrixL()(k, k));
  return -0.5 * half.squaredNorm() - logdet - 0.5 * x.size() * kLog2Pi;
}

VectorXd mvn_draw(const VectorXd& mean, const Eigen::LLT<MatrixXd>& cov_llt, Rng& rng) {
  VectorXd z(mean.size());
  for (int k = 0; k < mean.size(); ++k) z[k] = rng.normal();
  return mean + cov_llt.matrixL() * z;
}

}  // namespace

BlockResult sample_beta(ResponseParams& params, const ConsiderationState& C, const PanelDataset& data,
                        const Hyperparams& hyper, Rng& rng) {
  BlockResult res;
  const int d = static_cast<int>(params.beta.size());
  if (d == 0) return res;
  const double prior_prec = 1.0 / hyper.v_beta;
  const double cur_ll = beta_conditional_loglik(params.beta, params, C, data);
  const double cur_target = cur_ll - 0.5 * prior_prec * params.beta.squaredNorm();

  TailoredProposal prop = tailor_beta(params, C, data, hyper);
  ++res.proposals;

  VectorXd cand;
  double log_ratio = kNegInf;
  double cand_ll = kNegInf;
  if (prop.converged) {
    Eigen::LLT<MatrixXd> llt(prop.cov);
    if (llt.info() != Eigen::Success) {
      prop.converged = false;
    } else {
      cand = mvn_draw(prop.mode, llt, rng);
      cand_ll = beta_conditional_loglik(cand, params, C, data);
      const double cand_target = cand_ll - 0.5 * prior_prec * cand.squaredNorm();
      // tailored ratio: the proposal is centered at the mode, not at the
      // current point, so its density does not cancel
      log_ratio = (cand_target - cur_target) + mvn_logpdf(params.beta, prop.mode, llt) -
                  mvn_logpdf(cand, prop.mode, llt);
    }
  }
  if (!prop.converged) {
    ++res.fallbacks;
    std::cerr << "[csmix] warning: beta Newton step failed to converge; random-walk fallback\n";
    MatrixXd cov = hyper.v_beta * MatrixXd::Identity(d, d);
    Eigen::LLT<MatrixXd> llt(cov);
    cand = mvn_draw(params.beta, llt, rng);
    cand_ll = beta_conditional_loglik(cand, params, C, data);
    const double cand_target = cand_ll - 0.5 * prior_prec * cand.squaredNorm();
    log_ratio = cand_target - cur_target;
  }

  if (mh_accept(log_ratio, rng)) {
    params.beta = cand;
    res.delta_loglik = cand_ll - cur_ll;
    ++res.accepted;
  }
  return res;
}

namespace {

// Contributions to the delta_k conditional: occasions of subjects with
// k in C_i and at least one other considered category. logr is the shifted
// log-denominator excluding k; logw0 the shifted utility of k minus delta_k.
struct DeltaContext {
  std::vector<double> logr;
  std::vector<double> logw0;
  std::vector<std::uint8_t> is_y;
};

DeltaContext build_delta_context(int k, const ResponseParams& params, const ConsiderationState& C,
                                 const PanelDataset& data) {
  DeltaContext ctx;
  for (int i = 0; i < data.n; ++i) {
    const CsRow& row = C.rows[i];
    if (!row[k] || cs_size(row) < 2) continue;
    const auto& sub = data.subjects[i];
    for (int t = 0; t < sub.T(); ++t) {
      const VectorXd V = utilities(params, data, i, t);
      double m = kNegInf;
      for (int j = 0; j < data.J; ++j)
        if (row[j]) m = std::max(m, V[j]);
      double r = 0.0;
      for (int j = 0; j < data.J; ++j)
        if (row[j] && j != k) r += std::exp(V[j] - m);
      ctx.logr.push_back(std::log(r));
      ctx.logw0.push_back(V[k] - params.delta[k] - m);
      ctx.is_y.push_back(sub.y[t] == k ? 1 : 0);
    }
  }
  return ctx;
}

// Log target (up to a constant), gradient and curvature of delta_k.
void delta_target_parts(const DeltaContext& ctx, double v_delta, double delta,
                        double* val, double* grad, double* hess) {
  double f = -0.5 * delta * delta / v_delta;
  double g = -delta / v_delta;
  double h = -1.0 / v_delta;
  for (std::size_t m = 0; m < ctx.logr.size(); ++m) {
    const double lw = ctx.logw0[m] + delta;
    const double lr = ctx.logr[m];
    const double hi = std::max(lw, lr);
    const double lse = hi + std::log(std::exp(lw - hi) + std::exp(lr - hi));
    const double p = std::exp(lw - lse);
    if (val) f += (ctx.is_y[m] ? delta : 0.0) - lse;
    g += (ctx.is_y[m] ? 1.0 : 0.0) - p;
    h -= p * (1.0 - p);
  }
  if (val) *val = f;
  if (grad) *grad = g;
  if (hess) *hess = h;
}

Tailored1D tailor_delta_ctx(const DeltaContext& ctx, double start, const Hyperparams& hyper) {
  Tailored1D prop;
  prop.scale = hyper.proposal_scale;
  double x = start;
  double f, g, h;
  delta_target_parts(ctx, hyper.v_delta, x, &f, &g, &h);
  for (int it = 1; it <= hyper.newton_max_iter; ++it) {
    prop.iterations = it;
    if (std::abs(g) < hyper.newton_tol) {
      prop.converged = true;
      break;
    }
    const double step = -g / h;  // h <= -1/v_delta < 0
    if (g * step < 1e-6) {  // quadratic regime: plain Newton step
      x += step;
      delta_target_parts(ctx, hyper.v_delta, x, &f, &g, &h);
      continue;
    }
    double lam = 1.0;
    double xc = x + step;
    double fc;
    delta_target_parts(ctx, hyper.v_delta, xc, &fc, nullptr, nullptr);
    int halvings = 0;
    while (fc < f && halvings < 40) {
      lam *= 0.5;
      xc = x + lam * step;
      delta_target_parts(ctx, hyper.v_delta, xc, &fc, nullptr, nullptr);
      ++halvings;
    }
    x = xc;
    delta_target_parts(ctx, hyper.v_delta, x, &f, &g, &h);
  }
  if (!prop.converged) prop.converged = std::abs(g) < hyper.newton_tol;
  prop.mode = x;
  prop.var = prop.scale * (-1.0 / h);
  return prop;
}

}  // namespace

double delta_conditional_logtarget(int k, double value, const ResponseParams& params,
                                   const ConsiderationState& C, const PanelDataset& data,
                                   const Hyperparams& hyper) {
  const DeltaContext ctx = build_delta_context(k, params, C, data);
  double f;
  delta_target_parts(ctx, hyper.v_delta, value, &f, nullptr, nullptr);
  return f;
}

Tailored1D tailor_delta(int k, const ResponseParams& params, const ConsiderationState& C,
                        const PanelDataset& data, const Hyperparams& hyper) {
  const DeltaContext ctx = build_delta_context(k, params, C, data);
  return tailor_delta_ctx(ctx, params.delta[k], hyper);
}

BlockResult sample_delta(ResponseParams& params, const ConsiderationState& C, const PanelDataset& data,
                         const Hyperparams& hyper, Rng& rng) {
  BlockResult res;
  const int J = data.J;
  if (J < 2) return res;
  const std::vector<int> order = rng.permutation(J - 1);  // delta_J pinned at 0
  for (int k : order) {
    const DeltaContext ctx = build_delta_context(k, params, C, data);
    const double cur = params.delta[k];
    double cur_f;
    delta_target_parts(ctx, hyper.v_delta, cur, &cur_f, nullptr, nullptr);

    Tailored1D prop = tailor_delta_ctx(ctx, cur, hyper);
    ++res.proposals;
    double cand, log_ratio, cand_f;
    if (prop.converged && prop.var > 0.0 && std::isfinite(prop.var)) {
      const double sd = std::sqrt(prop.var);
      cand = prop.mode + sd * rng.normal();
      delta_target_parts(ctx, hyper.v_delta, cand, &cand_f, nullptr, nullptr);
      const double lq_cur = -0.5 * (cur - prop.mode) * (cur - prop.mode) / prop.var;
      const double lq_cand = -0.5 * (cand - prop.mode) * (cand - prop.mode) / prop.var;
      log_ratio = (cand_f - cur_f) + lq_cur - lq_cand;
    } else {
      ++res.fallbacks;
      std::cerr << "[csmix] warning: delta_" << (k + 1) << " Newton step failed; random-walk fallback\n";
      cand = cur + std::sqrt(hyper.v_delta) * rng.normal();
      delta_target_parts(ctx, hyper.v_delta, cand, &cand_f, nullptr, nullptr);
      log_ratio = cand_f - cur_f;
    }

    if (mh_accept(log_ratio, rng)) {
      params.delta[k] = cand;
      // likelihood-only change: strip the prior difference from the target change
      const double dprior = -0.5 * (cand * cand - cur * cur) / hyper.v_delta;
      res.delta_loglik += (cand_f - cur_f) - dprior;
      ++res.accepted;
    }
  }
  return res;
}

namespace {

double subject_ll_with_b(const ResponseParams& params, const PanelDataset& data, const CsRow& row,
                         int i, const VectorXd& b) {
  const auto& sub = data.subjects[i];
  double ll = 0.0;
  for (int t = 0; t < sub.T(); ++t) {
    double m = kNegInf;
    double vy = 0.0;
    // first pass for the shift
    for (int j = 0; j < data.J; ++j) {
      if (!row[j]) continue;
      double v = params.delta[j];
      const double* x = data.x_at(i, t, j);
      for (int k = 0; k < data.d_x; ++k) v += x[k] * params.beta[k];
      const double* z = data.z_at(i, t, j);
      for (int k = 0; k < data.d_z; ++k) v += z[k] * b[k];
      m = std::max(m, v);
      if (j == sub.y[t]) vy = v;
    }
    double denom = 0.0;
    for (int j = 0; j < data.J; ++j) {
      if (!row[j]) continue;
      double v = params.delta[j];
      const double* x = data.x_at(i, t, j);
      for (int k = 0; k < data.d_x; ++k) v += x[k] * params.beta[k];
      const double* z = data.z_at(i, t, j);
      for (int k = 0; k < data.d_z; ++k) v += z[k] * b[k];
      denom += std::exp(v - m);
    }
    ll += (vy - m) - std::log(denom);
  }
  return ll;
}

}  // namespace

BlockResult sample_b(ResponseParams& params, const ConsiderationState& C, const PanelDataset& data,
                     const Hyperparams& hyper, std::uint64_t seed, std::uint64_t iter, int threads) {
  (void)hyper;
  BlockResult res;
  const int d = static_cast<int>(params.D.rows());
  if (d == 0) return res;
  Eigen::LLT<MatrixXd> dllt(params.D);
  if (dllt.info() != Eigen::Success) throw std::runtime_error("sample_b: D is not SPD");

  std::vector<char> acc(data.n, 0);
  std::vector<double> dll(data.n, 0.0);
  parallel_for(data.n, threads, [&](int i) {
    Rng rng = Rng::derive(seed, {iter, stream::kRandomEffects, static_cast<std::uint64_t>(i)});
    const VectorXd& cur = params.b[i];
    VectorXd z(d);
    for (int k = 0; k < d; ++k) z[k] = rng.normal();
    const VectorXd cand = cur + dllt.matrixL() * z;

    const double cur_ll = subject_ll_with_b(params, data, C.rows[i], i, cur);
    const double cand_ll = subject_ll_with_b(params, data, C.rows[i], i, cand);
    const double cur_prior = -0.5 * cur.dot(dllt.solve(cur));
    const double cand_prior = -0.5 * cand.dot(dllt.solve(cand));
    const double log_ratio = (cand_ll + cand_prior) - (cur_ll + cur_prior);
    if (mh_accept(log_ratio, rng)) {
      params.b[i] = cand;
      acc[i] = 1;
      dll[i] = cand_ll - cur_ll;
    }
  });
  for (int i = 0; i < data.n; ++i) {
    ++res.proposals;
    if (acc[i]) {
      ++res.accepted;
      res.delta_loglik += dll[i];
    }
  }
  return res;
}

MatrixXd wishart_draw(double df, const MatrixXd& scale, Rng& rng) {
  const int d = static_cast<int>(scale.rows());
  if (df < d) throw std::invalid_argument("wishart_draw: df < dimension");
  Eigen::LLT<MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success) throw std::runtime_error("wishart_draw: scale matrix not SPD");
  MatrixXd A = MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    A(i, i) = std::sqrt(rng.chisq(df - i));
    for (int j = 0; j < i; ++j) A(i, j) = rng.normal();
  }
  const MatrixXd M = llt.matrixL() * A;
  return M * M.transpose();
}

void sample_D(ResponseParams& params, const Hyperparams& hyper, Rng& rng) {
  const int d = static_cast<int>(params.D.rows());
  const int n = static_cast<int>(params.b.size());
  MatrixXd S = hyper.wishart_R.inverse();
  for (const auto& bi : params.b) S += bi * bi.transpose();
  Eigen::LLT<MatrixXd> sllt(S);
  if (sllt.info() != Eigen::Success) throw std::runtime_error("sample_D: scale matrix not SPD");
  const MatrixXd scale = sllt.solve(MatrixXd::Identity(d, d));
  const MatrixXd W = wishart_draw(hyper.wishart_v + n, scale, rng);
  Eigen::LLT<MatrixXd> wllt(W);
  if (wllt.info() != Eigen::Success) throw std::runtime_error("sample_D: Wishart draw not SPD");
  params.D = wllt.solve(MatrixXd::Identity(d, d));
  // symmetrize against roundoff
  params.D = 0.5 * (params.D + params.D.transpose()).eval();
}

DerivCheck check_beta_derivatives(const VectorXd& at, const ResponseParams& params,
                                  const ConsiderationState& C, const PanelDataset& data,
                                  const Hyperparams& hyper) {
  const int d = static_cast<int>(at.size());
  const double prior_prec = 1.0 / hyper.v_beta;
  VectorXd grad(d);
  MatrixXd hess(d, d);
  beta_ll_grad_hess(at, params, C, data, &grad, &hess);
  grad -= prior_prec * at;
  hess.diagonal().array() -= prior_prec;

  auto target = [&](const VectorXd& x) {
    return beta_ll_grad_hess(x, params, C, data, nullptr, nullptr) - 0.5 * prior_prec * x.squaredNorm();
  };
  auto agrad = [&](const VectorXd& x) {
    VectorXd g(d);
    beta_ll_grad_hess(x, params, C, data, &g, nullptr);
    g -= prior_prec * x;
    return g;
  };

  DerivCheck out;
  for (int k = 0; k < d; ++k) {
    const double h = 1e-5 * std::max(1.0, std::abs(at[k]));
    VectorXd hi = at, lo = at;
    hi[k] += h;
    lo[k] -= h;
    const double fd = (target(hi) - target(lo)) / (2.0 * h);
    out.max_rel_grad = std::max(out.max_rel_grad, std::abs(fd - grad[k]) / std::max(1.0, std::abs(grad[k])));
    const VectorXd gd = (agrad(hi) - agrad(lo)) / (2.0 * h);
    for (int l = 0; l < d; ++l)
      out.max_rel_hess =
          std::max(out.max_rel_hess, std::abs(gd[l] - hess(l, k)) / std::max(1.0, std::abs(hess(l, k))));
  }
  return out;
}

DerivCheck check_delta_derivatives(int k, double at, const ResponseParams& params,
                                   const ConsiderationState& C, const PanelDataset& data,
                                   const Hyperparams& hyper) {
  const DeltaContext ctx = build_delta_context(k, params, C, data);
  double f, g, hcurv;
  delta_target_parts(ctx, hyper.v_delta, at, &f, &g, &hcurv);
  const double h = 1e-5 * std::max(1.0, std::abs(at));
  double fhi, flo, ghi, glo;
  delta_target_parts(ctx, hyper.v_delta, at + h, &fhi, &ghi, nullptr);
  delta_target_parts(ctx, hyper.v_delta, at - h, &flo, &glo, nullptr);
  DerivCheck out;
  out.max_rel_grad = std::abs((fhi - flo) / (2.0 * h) - g) / std::max(1.0, std::abs(g));
  out.max_rel_hess = std::abs((ghi - glo) / (2.0 * h) - hcurv) / std::max(1.0, std::abs(hcurv));
  return out;
}

}  // namespace csmix
