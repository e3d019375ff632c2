// SPDX-License-Identifier: Apache-2.0
#include "risgee/model.hpp"

#include <cmath>
#include <string>

namespace risgee {

ChannelSet ChannelSet::from(std::vector<CVec> h, CMat g) {
  ChannelSet ch;
  ch.a.reserve(h.size());
  for (const auto& hk : h) {
    if (hk.size() != g.cols()) {
      throw InvalidInput("channel: h_k length " + std::to_string(hk.size()) +
                         " does not match G columns " + std::to_string(g.cols()));
    }
    ch.a.push_back(g * hk.asDiagonal());
  }
  ch.h = std::move(h);
  ch.g = std::move(g);
  return ch;
}

void ChannelSet::check(const ScenarioConfig& cfg) const {
  if (users() != cfg.users || elements() != cfg.ris_elements ||
      antennas() != cfg.bs_antennas || a.size() != h.size()) {
    throw InvalidInput("channel set dimensions (K=" + std::to_string(users()) +
                       ", N=" + std::to_string(elements()) + ", N_R=" +
                       std::to_string(antennas()) + ") do not match the configuration");
  }
}

namespace model {
namespace {

void check_gamma(const CVec& gamma, const ChannelSet& ch) {
  if (gamma.size() != ch.elements()) {
    throw InvalidInput("gamma has length " + std::to_string(gamma.size()) + ", expected " +
                       std::to_string(ch.elements()));
  }
}

void check_power(const RVec& p, const ChannelSet& ch) {
  if (p.size() != ch.users()) {
    throw InvalidInput("power vector has length " + std::to_string(p.size()) +
                       ", expected " + std::to_string(ch.users()));
  }
}

}  // namespace

CMat noise_covariance(const CVec& gamma, const ChannelSet& ch, const ScenarioConfig& cfg) {
  check_gamma(gamma, ch);
  const RVec gain = gamma.cwiseAbs2();
  CMat w = ch.g * gain.asDiagonal() * ch.g.adjoint();
  w *= cfg.sigma2_ris_w;
  w.diagonal().array() += cfg.sigma2_w;
  // Enforce exact Hermitian symmetry; downstream Cholesky relies on it.
  return 0.5 * (w + w.adjoint());
}

double sinr(int k, const Allocation& alloc, const ChannelSet& ch, const ScenarioConfig& cfg) {
  check_gamma(alloc.gamma, ch);
  check_power(alloc.p, ch);
  if (k < 0 || k >= ch.users() || static_cast<int>(alloc.filters.size()) != ch.users()) {
    throw InvalidInput("sinr: user index or filter count out of range");
  }
  const CVec& c = alloc.filters[k];
  if (c.size() != ch.antennas() || c.squaredNorm() == 0.0) {
    throw InvalidInput("sinr: receive filter of user " + std::to_string(k) +
                       " is zero or has the wrong size");
  }
  const CMat w = noise_covariance(alloc.gamma, ch, cfg);
  double interference = c.dot(w * c).real();
  double signal = 0.0;
  for (int m = 0; m < ch.users(); ++m) {
    const double gain = std::norm(c.dot(ch.a[m] * alloc.gamma));
    if (m == k) {
      signal = alloc.p(m) * gain;
    } else {
      interference += alloc.p(m) * gain;
    }
  }
  return signal / interference;
}

RVec sinr_all(const Allocation& alloc, const ChannelSet& ch, const ScenarioConfig& cfg) {
  RVec out(ch.users());
  for (int k = 0; k < ch.users(); ++k) out(k) = sinr(k, alloc, ch, cfg);
  return out;
}

RVec matrix_r(const RVec& p, const ChannelSet& ch, const ScenarioConfig& cfg) {
  check_power(p, ch);
  RVec r = RVec::Constant(ch.elements(), cfg.sigma2_ris_w);
  for (int k = 0; k < ch.users(); ++k) r += p(k) * ch.h[k].cwiseAbs2();
  return r;
}

double weighted_norm2(const CVec& gamma, const RVec& r_diag) {
  if (gamma.size() != r_diag.size()) throw InvalidInput("weighted_norm2: size mismatch");
  return r_diag.dot(gamma.cwiseAbs2());
}

double rf_power(const CVec& gamma, const RVec& r_diag) {
  return weighted_norm2(gamma, r_diag) - r_diag.sum();
}

double total_power(const CVec& gamma, const RVec& p, const ChannelSet& ch,
                   const ScenarioConfig& cfg) {
  check_gamma(gamma, ch);
  const RVec r = matrix_r(p, ch, cfg);
  double total = weighted_norm2(gamma, r) - cfg.sigma2_ris_w * ch.elements() + cfg.static_power_w();
  for (int k = 0; k < ch.users(); ++k) {
    total += p(k) * (cfg.mu(k) - ch.h[k].squaredNorm());
  }
  return total;
}

double total_power(const Allocation& alloc, const ChannelSet& ch, const ScenarioConfig& cfg) {
  return total_power(alloc.gamma, alloc.p, ch, cfg);
}

GeeBreakdown gee(const Allocation& alloc, const ChannelSet& ch, const ScenarioConfig& cfg) {
  GeeBreakdown out;
  out.sinr = sinr_all(alloc, ch, cfg);
  double rate = 0.0;
  for (int k = 0; k < ch.users(); ++k) rate += std::log2(1.0 + out.sinr(k));
  out.sum_rate_bps = cfg.bandwidth_hz * rate;
  out.total_power_w = total_power(alloc, ch, cfg);
  if (!(out.total_power_w > 0.0)) {
    throw DegenerateConfig("gee: total power " + std::to_string(out.total_power_w) +
                           " W is not positive");
  }
  out.gee_bits_per_joule = out.sum_rate_bps / out.total_power_w;
  return out;
}

std::vector<CVec> mmse_filters(const CVec& gamma, const RVec& p, const ChannelSet& ch,
                               const ScenarioConfig& cfg) {
  check_power(p, ch);
  const CMat w = noise_covariance(gamma, ch, cfg);
  const int users = ch.users();
  std::vector<CVec> signature(users);
  CMat total = w;
  for (int m = 0; m < users; ++m) {
    signature[m] = ch.a[m] * gamma;
    total.noalias() += p(m) * signature[m] * signature[m].adjoint();
  }
  std::vector<CVec> filters(users);
  for (int k = 0; k < users; ++k) {
    CMat mk = total - p(k) * signature[k] * signature[k].adjoint();
    mk = 0.5 * (mk + mk.adjoint());
    Eigen::LLT<CMat> llt(mk);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("mmse_filters: interference-plus-noise matrix is singular");
    }
    CVec c = llt.solve(signature[k]);
    if (p(k) > 0.0) c *= std::sqrt(p(k));
    if (c.squaredNorm() == 0.0) {
      // A_k gamma = 0: any nonzero filter is MMSE-optimal (SINR is zero).
      c = CVec::Zero(ch.antennas());
      c(0) = 1.0;
    }
    filters[k] = std::move(c);
  }
  return filters;
}

double log2_det(const CMat& m) {
  Eigen::LLT<CMat> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("log2_det: matrix is not positive definite");
  }
  const CMat& l = llt.matrixLLT();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i).real());
  return 2.0 * acc / kLn2;
}

double sum_rate_mmse(const CVec& gamma, const RVec& p, const ChannelSet& ch,
                     const ScenarioConfig& cfg) {
  check_power(p, ch);
  const CMat w = noise_covariance(gamma, ch, cfg);
  const int users = ch.users();
  std::vector<CMat> outer(users);
  CMat total = w;
  for (int m = 0; m < users; ++m) {
    const CVec s = ch.a[m] * gamma;
    outer[m] = p(m) * s * s.adjoint();
    total += outer[m];
  }
  const double full = log2_det(total);
  double rate = 0.0;
  for (int k = 0; k < users; ++k) {
    rate += full - log2_det(total - outer[k]);
  }
  return std::max(rate, 0.0);
}

GeeBreakdown gee_mmse(const CVec& gamma, const RVec& p, const ChannelSet& ch,
                      const ScenarioConfig& cfg) {
  Allocation alloc{gamma, p, mmse_filters(gamma, p, ch, cfg)};
  return gee(alloc, ch, cfg);
}

}  // namespace model
}  // namespace risgee
