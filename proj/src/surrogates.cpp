// SPDX-License-Identifier: Apache-2.0
#include "risgee/surrogates.hpp"

#include <cmath>
#include <string>

namespace risgee::surrogates {

double log_bound(double x, double y, double xbar, double ybar) {
  if (!(xbar > 0.0) || !(ybar > 0.0)) {
    throw InvalidInput("log_bound: expansion point must satisfy xbar > 0 and ybar > 0");
  }
  if (x < 0.0 || y <= 0.0) throw InvalidInput("log_bound: requires x >= 0 and y > 0");
  const double ratio = xbar / ybar;
  const double correction = 2.0 * std::sqrt(x / xbar) - (x + y) / (xbar + ybar) - 1.0;
  return std::log2(1.0 + ratio) + ratio * correction / kLn2;
}

namespace {

// |c^H A_k gamma| below this, relative to ||c|| ||A_k gamma_bar||-scale, is degenerate.
constexpr double kDegenerateSignal = 1e-12;

bool signal_degenerate(const CVec& c, const CMat& ak, const CVec& gamma_bar) {
  const double s = std::abs(c.dot(ak * gamma_bar));
  const double scale = c.norm() * ak.norm() * std::max(gamma_bar.norm(), 1.0);
  return !(s > kDegenerateSignal * scale);
}

}  // namespace

CVec perturb_expansion_point(const CVec& gamma_bar, const RVec& p,
                             const std::vector<CVec>& filters, const ChannelSet& ch) {
  for (int k = 0; k < ch.users(); ++k) {
    if (p(k) > 0.0 && signal_degenerate(filters[k], ch.a[k], gamma_bar)) {
      CVec out = gamma_bar;
      out(0) += 1e-9;
      return out;
    }
  }
  return gamma_bar;
}

SurrogateCoeffs build_gamma_coeffs(const CVec& gamma_bar, const RVec& p,
                                   const std::vector<CVec>& filters, const ChannelSet& ch,
                                   const ScenarioConfig& cfg) {
  const int users = ch.users();
  if (static_cast<int>(filters.size()) != users || p.size() != users ||
      gamma_bar.size() != ch.elements()) {
    throw InvalidInput("build_gamma_coeffs: dimension mismatch");
  }
  SurrogateCoeffs co;
  co.l_bar.resize(users);
  co.a_bar.resize(users);
  co.b_bar.resize(users);
  co.d_bar.resize(users);
  co.e_bar.resize(users);
  co.f_bar.resize(users);
  co.signal_bar.resize(users);
  co.u_tilde.resize(users);
  co.v.assign(users, std::vector<CVec>(users));
  co.gamma_bar = gamma_bar;
  co.p = p;
  co.sigma2_ris = cfg.sigma2_ris_w;

  for (int k = 0; k < users; ++k) {
    const CVec& c = filters[k];
    co.u_tilde[k] = (ch.g.adjoint() * c).cwiseAbs2();
    for (int m = 0; m < users; ++m) co.v[k][m] = ch.a[m].adjoint() * c;
    const Complex s = co.v[k][k].dot(gamma_bar);
    co.signal_bar(k) = s;

    const double cn2 = c.squaredNorm();
    double l = cfg.sigma2_w * cn2 + cfg.sigma2_ris_w * co.u_tilde[k].dot(gamma_bar.cwiseAbs2());
    for (int m = 0; m < users; ++m) {
      if (m != k) l += p(m) * std::norm(co.v[k][m].dot(gamma_bar));
    }
    const double sig = p(k) * std::norm(s);
    co.l_bar(k) = l;
    co.a_bar(k) = std::log2(1.0 + sig / l);
    co.b_bar(k) = sig / l;
    co.e_bar(k) = 1.0 / (l + sig);
    co.f_bar(k) = co.e_bar(k) * cfg.sigma2_w * cn2 + 1.0;
    if (p(k) == 0.0) {
      // The user carries no rate; its surrogate is the constant 0.
      co.d_bar(k) = 0.0;
    } else {
      if (signal_degenerate(c, ch.a[k], gamma_bar)) {
        throw SurrogateDegenerate("build_gamma_coeffs: |c_k^H A_k gamma_bar| vanishes for user " +
                                  std::to_string(k));
      }
      co.d_bar(k) = 2.0 / std::abs(s);
    }
  }
  return co;
}

RVec gamma_rate_surrogate(const CVec& gamma, const SurrogateCoeffs& co) {
  const int users = static_cast<int>(co.a_bar.size());
  RVec out(users);
  const RVec g2 = gamma.cwiseAbs2();
  for (int k = 0; k < users; ++k) {
    if (co.b_bar(k) == 0.0) {
      out(k) = co.a_bar(k);
      continue;
    }
    const Complex s = co.signal_bar(k);
    const double linear = co.d_bar(k) * (std::conj(s) * co.v[k][k].dot(gamma)).real() / std::abs(s);
    double quad = co.sigma2_ris * co.u_tilde[k].dot(g2);
    for (int m = 0; m < users; ++m) quad += co.p(m) * std::norm(co.v[k][m].dot(gamma));
    out(k) = co.a_bar(k) + co.b_bar(k) / kLn2 * (linear - co.e_bar(k) * quad - co.f_bar(k));
  }
  return out;
}

double ConcaveQuadratic::value(const CVec& x) const {
  return c0 + b.dot(x).real() - x.dot(q * x).real();
}

CVec ConcaveQuadratic::gradient(const CVec& x) const { return b - 2.0 * (q * x); }

ConcaveQuadratic gamma_sum_surrogate(const SurrogateCoeffs& co) {
  const int users = static_cast<int>(co.a_bar.size());
  const Eigen::Index n = co.gamma_bar.size();
  ConcaveQuadratic out;
  out.b = CVec::Zero(n);
  out.q = CMat::Zero(n, n);
  for (int k = 0; k < users; ++k) {
    out.c0 += co.a_bar(k);
    if (co.b_bar(k) == 0.0) continue;
    const double w = co.b_bar(k) / kLn2;
    out.c0 -= w * co.f_bar(k);
    const Complex s = co.signal_bar(k);
    out.b += (w * co.d_bar(k) / std::abs(s)) * s * co.v[k][k];
    const double we = w * co.e_bar(k);
    out.q.diagonal() += (we * co.sigma2_ris * co.u_tilde[k]).cast<Complex>();
    for (int m = 0; m < users; ++m) {
      out.q.noalias() += (we * co.p(m)) * co.v[k][m] * co.v[k][m].adjoint();
    }
  }
  out.q = 0.5 * (out.q + out.q.adjoint());
  return out;
}

double linearized_active_constraint(const CVec& gamma, const CVec& gamma_bar,
                                    const RVec& r_diag) {
  const CVec rg = r_diag.cast<Complex>().cwiseProduct(gamma_bar);
  const double base = gamma_bar.dot(rg).real();
  return base + 2.0 * rg.dot(gamma - gamma_bar).real();
}

PowerSurrogateCoeffs build_power_coeffs(const CVec& gamma, const std::vector<CVec>& filters,
                                        const ChannelSet& ch, const ScenarioConfig& cfg) {
  const int users = ch.users();
  PowerSurrogateCoeffs co;
  co.a.resize(users, users);
  co.d.resize(users);
  co.slope.resize(users);
  co.rf_slope.resize(users);
  const CMat w = model::noise_covariance(gamma, ch, cfg);
  std::vector<CVec> sig(users);
  for (int m = 0; m < users; ++m) sig[m] = ch.a[m] * gamma;
  const RVec g2 = gamma.cwiseAbs2();
  for (int k = 0; k < users; ++k) {
    const CVec& c = filters[k];
    for (int m = 0; m < users; ++m) co.a(k, m) = std::norm(c.dot(sig[m]));
    co.d(k) = c.dot(w * c).real();
    const RVec hk2 = ch.h[k].cwiseAbs2();
    co.rf_slope(k) = hk2.dot(g2) - hk2.sum();
    co.slope(k) = cfg.mu(k) + co.rf_slope(k);
  }
  co.rf_offset = cfg.sigma2_ris_w * (g2.sum() - static_cast<double>(ch.elements()));
  co.offset = co.rf_offset + cfg.static_power_w();
  return co;
}

double power_sum_rate(const RVec& p, const PowerSurrogateCoeffs& co) {
  double rate = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double total = co.d(k) + co.a.row(k).dot(p);
    const double interference = total - p(k) * co.a(k, k);
    rate += std::log2(total / interference);
  }
  return rate;
}

double power_gee(const RVec& p, const PowerSurrogateCoeffs& co) {
  return power_sum_rate(p, co) / (co.slope.dot(p) + co.offset);
}

namespace {

// sum_k log2(d_k + sum_{m != k} p_m a_km) and its gradient.
double g2_power(const RVec& p, const PowerSurrogateCoeffs& co, RVec* grad) {
  const Eigen::Index users = p.size();
  double value = 0.0;
  if (grad) grad->setZero(users);
  for (Eigen::Index k = 0; k < users; ++k) {
    const double interference = co.d(k) + co.a.row(k).dot(p) - p(k) * co.a(k, k);
    value += std::log2(interference);
    if (grad) {
      for (Eigen::Index i = 0; i < users; ++i) {
        if (i != k) (*grad)(i) += co.a(k, i) / (interference * kLn2);
      }
    }
  }
  return value;
}

}  // namespace

double power_dc_numerator(const RVec& p, const RVec& pbar, const PowerSurrogateCoeffs& co) {
  double concave = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    concave += std::log2(co.d(k) + co.a.row(k).dot(p));
  }
  RVec g2_grad;
  const double g2_bar = g2_power(pbar, co, &g2_grad);
  return concave - g2_bar - g2_grad.dot(p - pbar);
}

RVec power_dc_numerator_gradient(const RVec& p, const RVec& pbar,
                                 const PowerSurrogateCoeffs& co) {
  const Eigen::Index users = p.size();
  RVec grad = RVec::Zero(users);
  for (Eigen::Index k = 0; k < users; ++k) {
    const double total = co.d(k) + co.a.row(k).dot(p);
    grad += co.a.row(k).transpose() / (total * kLn2);
  }
  RVec g2_grad;
  g2_power(pbar, co, &g2_grad);
  return grad - g2_grad;
}

double power_dc_surrogate(const RVec& p, const RVec& pbar, const PowerSurrogateCoeffs& co) {
  return power_dc_numerator(p, pbar, co) / (co.slope.dot(p) + co.offset);
}

// ---- lifted domain ----

void require_hermitian(const CMat& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw InvalidInput(std::string(what) + ": matrix is not square");
  }
  const double scale = std::max(1.0, m.norm());
  if ((m - m.adjoint()).norm() > 1e-9 * scale) {
    throw InvalidInput(std::string(what) + ": matrix is not Hermitian");
  }
}

namespace {

// sigma^2 I + sigma_RIS^2 G diag(X) G^H.
CMat base_covariance(const CMat& x, const ChannelSet& ch, const ScenarioConfig& cfg) {
  const RVec dx = x.diagonal().real();
  CMat t = cfg.sigma2_ris_w * (ch.g * dx.asDiagonal() * ch.g.adjoint());
  t.diagonal().array() += cfg.sigma2_w;
  return t;
}

std::vector<CMat> user_terms(const CMat& x, const RVec& p, const ChannelSet& ch) {
  std::vector<CMat> out(ch.users());
  for (int m = 0; m < ch.users(); ++m) out[m] = p(m) * (ch.a[m] * x * ch.a[m].adjoint());
  return out;
}

CMat hermitian_inverse(const CMat& t) {
  Eigen::LLT<CMat> llt(t);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  CMat inv = llt.solve(CMat::Identity(t.rows(), t.cols()));
  return 0.5 * (inv + inv.adjoint());
}

CMat hermitian(const CMat& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

double g1_x(const CMat& x, const RVec& p, const ChannelSet& ch, const ScenarioConfig& cfg) {
  CMat t = base_covariance(x, ch, cfg);
  for (const auto& term : user_terms(x, p, ch)) t += term;
  return ch.users() * model::log2_det(hermitian(t));
}

double g2_x(const CMat& x, const RVec& p, const ChannelSet& ch, const ScenarioConfig& cfg) {
  const CMat base = base_covariance(x, ch, cfg);
  const auto terms = user_terms(x, p, ch);
  CMat total = base;
  for (const auto& term : terms) total += term;
  double value = 0.0;
  for (int k = 0; k < ch.users(); ++k) value += model::log2_det(hermitian(total - terms[k]));
  return value;
}

double sum_rate_mmse_x(const CMat& x, const RVec& p, const ChannelSet& ch,
                       const ScenarioConfig& cfg) {
  return g1_x(x, p, ch, cfg) - g2_x(x, p, ch, cfg);
}

namespace {

// sigma_RIS^2 diag(G^H T^{-1} G) + sum over `active` users of p_m A_m^H T^{-1} A_m.
CMat logdet_gradient(const CMat& t_inv, const RVec& p, const ChannelSet& ch,
                     const ScenarioConfig& cfg, int skip) {
  const Eigen::Index n = ch.elements();
  CMat grad = CMat::Zero(n, n);
  if (cfg.sigma2_ris_w > 0.0) {
    const CMat tg = t_inv * ch.g;
    for (Eigen::Index j = 0; j < n; ++j) {
      grad(j, j) = cfg.sigma2_ris_w * ch.g.col(j).dot(tg.col(j)).real();
    }
  }
  for (int m = 0; m < ch.users(); ++m) {
    if (m == skip || p(m) == 0.0) continue;
    grad.noalias() += p(m) * (ch.a[m].adjoint() * (t_inv * ch.a[m]));
  }
  return grad;
}

}  // namespace

CMat grad_g1(const CMat& x, const RVec& p, const ChannelSet& ch, const ScenarioConfig& cfg) {
  CMat t = base_covariance(x, ch, cfg);
  for (const auto& term : user_terms(x, p, ch)) t += term;
  const CMat grad = logdet_gradient(hermitian_inverse(hermitian(t)), p, ch, cfg, -1);
  return hermitian(grad) * (ch.users() / kLn2);
}

CMat grad_g2(const CMat& x, const RVec& p, const ChannelSet& ch, const ScenarioConfig& cfg) {
  const auto terms = user_terms(x, p, ch);
  CMat total = base_covariance(x, ch, cfg);
  for (const auto& term : terms) total += term;
  const Eigen::Index n = ch.elements();
  CMat grad = CMat::Zero(n, n);
  for (int k = 0; k < ch.users(); ++k) {
    const CMat tk_inv = hermitian_inverse(hermitian(total - terms[k]));
    grad += logdet_gradient(tk_inv, p, ch, cfg, k);
  }
  return hermitian(grad) / kLn2;
}

G2Linearization linearize_g2(const CMat& xbar, const RVec& p, const ChannelSet& ch,
                             const ScenarioConfig& cfg) {
  require_hermitian(xbar, "linearize_g2");
  return {xbar, g2_x(xbar, p, ch, cfg), grad_g2(xbar, p, ch, cfg)};
}

double sr_mmse_surrogate_x(const CMat& x, const G2Linearization& lin, const RVec& p,
                           const ChannelSet& ch, const ScenarioConfig& cfg) {
  require_hermitian(x, "sr_mmse_surrogate_x");
  return g1_x(x, p, ch, cfg) - lin.value - inner_real(lin.gradient, x - lin.xbar);
}

double sr_mmse_surrogate_x(const CMat& x, const CMat& xbar, const RVec& p,
                           const ChannelSet& ch, const ScenarioConfig& cfg) {
  return sr_mmse_surrogate_x(x, linearize_g2(xbar, p, ch, cfg), p, ch, cfg);
}

// ---- power domain ----

namespace {

struct PowerTerms {
  CMat w;
  std::vector<CVec> sig;
};

PowerTerms power_terms(const CVec& gamma, const ChannelSet& ch, const ScenarioConfig& cfg) {
  PowerTerms out{model::noise_covariance(gamma, ch, cfg), {}};
  out.sig.reserve(ch.users());
  for (int m = 0; m < ch.users(); ++m) out.sig.push_back(ch.a[m] * gamma);
  return out;
}

CMat interference_covariance(const PowerTerms& t, const RVec& p, int skip) {
  CMat m = t.w;
  for (std::size_t i = 0; i < t.sig.size(); ++i) {
    if (static_cast<int>(i) == skip) continue;
    m.noalias() += p(i) * t.sig[i] * t.sig[i].adjoint();
  }
  return hermitian(m);
}

}  // namespace

double f_power(const RVec& p, const CVec& gamma, const ChannelSet& ch, const ScenarioConfig& cfg) {
  const PowerTerms t = power_terms(gamma, ch, cfg);
  double value = 0.0;
  for (int k = 0; k < ch.users(); ++k) value += model::log2_det(interference_covariance(t, p, k));
  return value;
}

RVec grad_f_power(const RVec& p, const CVec& gamma, const ChannelSet& ch,
                  const ScenarioConfig& cfg) {
  const PowerTerms t = power_terms(gamma, ch, cfg);
  const int users = ch.users();
  RVec grad = RVec::Zero(users);
  for (int k = 0; k < users; ++k) {
    Eigen::LLT<CMat> llt(interference_covariance(t, p, k));
    if (llt.info() != Eigen::Success) throw NumericalError("grad_f_power: singular T_k");
    for (int i = 0; i < users; ++i) {
      if (i == k) continue;
      grad(i) += t.sig[i].dot(llt.solve(t.sig[i])).real();
    }
  }
  return grad / kLn2;
}

double h_power(const RVec& p, const CVec& gamma, const ChannelSet& ch, const ScenarioConfig& cfg) {
  const PowerTerms t = power_terms(gamma, ch, cfg);
  return ch.users() * model::log2_det(interference_covariance(t, p, -1));
}

RVec grad_h_power(const RVec& p, const CVec& gamma, const ChannelSet& ch,
                  const ScenarioConfig& cfg) {
  const PowerTerms t = power_terms(gamma, ch, cfg);
  Eigen::LLT<CMat> llt(interference_covariance(t, p, -1));
  if (llt.info() != Eigen::Success) throw NumericalError("grad_h_power: singular covariance");
  RVec grad(ch.users());
  for (int i = 0; i < ch.users(); ++i) grad(i) = t.sig[i].dot(llt.solve(t.sig[i])).real();
  return grad * (ch.users() / kLn2);
}

}  // namespace risgee::surrogates
