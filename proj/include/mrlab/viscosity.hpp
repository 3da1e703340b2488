#pragma once

#include <cmath>
#include <stdexcept>

namespace mrlab {

/// Shear-dependent viscosity mu(s) = mu_inf + eta*(1+s)^alpha, evaluated at
/// s = |D(v)|^2.  mu_inf > 0 is the Newtonian floor; eta >= 0 scales the
/// shear-dependent part; alpha defaults to (d-2)/2, which in two dimensions
/// degenerates to the constant law mu_inf + eta.  rho is the fluid density.
struct ViscosityLaw {
  double mu_inf = 1.0;
  double eta = 0.0;
  double alpha = 0.5;
  double rho = 1.0;

  static ViscosityLaw for_dim(int dim, double mu_inf, double eta, double rho = 1.0) {
    ViscosityLaw law;
    law.mu_inf = mu_inf;
    law.eta = eta;
    law.alpha = 0.5 * (dim - 2);
    law.rho = rho;
    law.validate();
    return law;
  }

  void validate() const {
    if (!(mu_inf > 0.0)) throw std::invalid_argument("ViscosityLaw: mu_inf must be > 0");
    if (!(eta >= 0.0)) throw std::invalid_argument("ViscosityLaw: eta must be >= 0");
    if (!(rho > 0.0)) throw std::invalid_argument("ViscosityLaw: rho must be > 0");
    if (!std::isfinite(alpha)) throw std::invalid_argument("ViscosityLaw: alpha must be finite");
  }

  double mu(double s) const {
    if (s < 0.0) throw std::domain_error("viscosity: shear magnitude must be >= 0");
    return mu_inf + eta * std::pow(1.0 + s, alpha);
  }
  /// d mu / d s.  Exactly zero whenever eta = 0 or alpha = 0.
  double mu_prime(double s) const {
    if (s < 0.0) throw std::domain_error("viscosity: shear magnitude must be >= 0");
    return eta * alpha * std::pow(1.0 + s, alpha - 1.0);
  }
};

struct Viscosity {
  double mu = 0.0;
  double mu_prime = 0.0;
};

inline Viscosity viscosity(const ViscosityLaw& law, double s) {
  return {law.mu(s), law.mu_prime(s)};
}

/// Pointwise ellipticity certificate for a viscosity law: minima of mu(s) and
/// of the monotonicity combination mu(s) + 2 s mu'(s) over s = 0 plus
/// log-spaced samples up to s_max.  Both minima must stay positive for the
/// operator to be uniformly elliptic on the sampled shear range.
struct EllipticityReport {
  double min_mu = 0.0;
  double min_combination = 0.0;
  double s_max = 0.0;
  int samples = 0;
  bool uniformly_elliptic = false;
};

inline EllipticityReport ellipticity_scan(const ViscosityLaw& law, double s_max = 1e4,
                                          int samples = 10000) {
  law.validate();
  if (samples < 2 || !(s_max > 0.0)) throw std::invalid_argument("ellipticity_scan: bad sampling");
  EllipticityReport rep;
  rep.s_max = s_max;
  rep.samples = samples;
  const double s_min = 1e-8;
  const double step = std::log(s_max / s_min) / (samples - 1);
  auto probe = [&](double s) {
    const Viscosity v = viscosity(law, s);
    const double comb = v.mu + 2.0 * s * v.mu_prime;
    rep.min_mu = std::min(rep.min_mu, v.mu);
    rep.min_combination = std::min(rep.min_combination, comb);
  };
  rep.min_mu = law.mu(0.0);
  rep.min_combination = rep.min_mu;
  for (int i = 0; i < samples; ++i) probe(s_min * std::exp(step * i));
  rep.uniformly_elliptic = rep.min_mu > 0.0 && rep.min_combination > 0.0;
  return rep;
}

}  // namespace mrlab
