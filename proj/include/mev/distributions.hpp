#pragma once

// Closed-form probability functions for Weibull-tailed parents and their
// block maxima: the stretched-exponential tail, exact and penultimate
// n-sample maximum CDFs, and the GEV family.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>
#include <algorithm>

#include <Eigen/Core>

#include "mev/errors.hpp"
#include "mev/random.hpp"

namespace mev {

template <typename Scalar = double>
struct WeibullTail {
  Scalar scale;          // C, mm
  Scalar shape;          // w
  Scalar threshold = 0;  // h0, lower bound of the fitting domain, mm

  WeibullTail(Scalar scale_c, Scalar shape_w, Scalar threshold_h0 = Scalar(0))
      : scale(scale_c), shape(shape_w), threshold(threshold_h0) {
    if (!(scale > 0) || !std::isfinite(scale)) throw DomainError("WeibullTail: scale must be > 0");
    if (!(shape > 0) || !std::isfinite(shape)) throw DomainError("WeibullTail: shape must be > 0");
    if (!(threshold >= 0)) throw DomainError("WeibullTail: threshold must be >= 0");
  }

  // C' = C^w, the scale of the exponential variable z = x^w.
  [[nodiscard]] Scalar preconditioned_scale() const { return std::pow(scale, shape); }

  friend bool operator==(const WeibullTail&, const WeibullTail&) = default;
};

template <typename Scalar = double>
struct GevParams {
  Scalar location;  // mu, mm
  Scalar scale;     // sigma, mm
  Scalar shape;     // k; 0 is Gumbel, > 0 Frechet-type, < 0 upper-bounded

  GevParams(Scalar mu, Scalar sigma, Scalar k) : location(mu), scale(sigma), shape(k) {
    if (!(scale > 0) || !std::isfinite(scale)) throw DomainError("GevParams: scale must be > 0");
    if (!std::isfinite(location) || !std::isfinite(shape)) throw DomainError("GevParams: non-finite parameter");
  }

  // mu - sigma/k; lower end of the support for k > 0, upper end for k < 0.
  // The Gumbel case is unbounded and reports -inf.
  [[nodiscard]] Scalar support_boundary() const {
    if (shape == 0) return -std::numeric_limits<Scalar>::infinity();
    return location - scale / shape;
  }
  // alpha = 1/|k| of the Frechet / reversed-Weibull limit laws.
  [[nodiscard]] Scalar tail_index() const { return Scalar(1) / std::abs(shape); }
  // Renormalization constants: b_n is the location, a_n the scale.
  [[nodiscard]] Scalar b_n() const { return location; }
  [[nodiscard]] Scalar a_n() const { return scale; }

  friend bool operator==(const GevParams&, const GevParams&) = default;
};

// |k| below this uses the Gumbel limit formula.
inline constexpr double kGumbelSwitch = 1e-8;
// Clamp applied to probabilities before a double-log transform.
inline constexpr double kProbabilityFloor = 1e-300;
inline constexpr double kProbabilityCeiling = 1.0 - 1e-16;

namespace detail {
inline void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}
}  // namespace detail

/// Psi(h) = exp(-(h/C)^w).
template <typename Scalar>
Scalar weibull_exceedance(std::type_identity_t<Scalar> h, const WeibullTail<Scalar>& tail) {
  detail::require(h >= 0, "weibull_exceedance: h must be >= 0");
  return std::exp(-std::pow(h / tail.scale, tail.shape));
}

/// Level exceeded with probability p: C (-ln p)^(1/w).
template <typename Scalar>
Scalar weibull_quantile(std::type_identity_t<Scalar> p, const WeibullTail<Scalar>& tail) {
  detail::require(p > 0 && p < 1, "weibull_quantile: p must lie in (0, 1)");
  return tail.scale * std::pow(-std::log(p), Scalar(1) / tail.shape);
}

/// Density of h conditional on h > h0 (h0 = tail.threshold):
/// (w/C)(h/C)^(w-1) exp(-[(h/C)^w - (h0/C)^w]); zero below h0.
template <typename Scalar>
Scalar weibull_truncated_density(std::type_identity_t<Scalar> h, const WeibullTail<Scalar>& tail) {
  if (h < tail.threshold) return Scalar(0);
  const Scalar x = h / tail.scale;
  const Scalar x0 = tail.threshold / tail.scale;
  return tail.shape / tail.scale * std::pow(x, tail.shape - 1) *
         std::exp(-(std::pow(x, tail.shape) - std::pow(x0, tail.shape)));
}

/// i.i.d. draws by inversion of uniform variates.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> weibull_sample(RandomStream& rng, const WeibullTail<Scalar>& tail,
                                                       Eigen::Index count) {
  detail::require(count >= 1, "weibull_sample: count must be >= 1");
  Eigen::Array<Scalar, Eigen::Dynamic, 1> out(count);
  const Scalar inv_shape = Scalar(1) / tail.shape;
  for (Eigen::Index i = 0; i < count; ++i)
    out(i) = tail.scale * std::pow(-std::log(static_cast<Scalar>(rng.uniform())), inv_shape);
  return out;
}

/// U_n = C (ln n)^(1/w): the level exceeded with probability 1/n. Real n allowed.
template <typename Scalar>
Scalar mode_u_n(std::type_identity_t<Scalar> n, const WeibullTail<Scalar>& tail) {
  detail::require(n >= 1, "mode_u_n: n must be >= 1");
  return tail.scale * std::pow(std::log(n), Scalar(1) / tail.shape);
}

/// [1 - Psi(y)]^n, the exact CDF of the maximum of n independent draws.
template <typename Scalar>
Scalar exact_block_cdf(std::type_identity_t<Scalar> y, std::int64_t n, const WeibullTail<Scalar>& tail) {
  detail::require(y >= 0, "exact_block_cdf: y must be >= 0");
  detail::require(n >= 1, "exact_block_cdf: n must be >= 1");
  const Scalar psi = weibull_exceedance(y, tail);
  if (psi >= 1) return Scalar(0);
  return std::exp(static_cast<Scalar>(n) * std::log1p(-psi));
}

/// exp(-n Psi(y)) = exp(-exp(-[(y/C)^w - ln n])), the preconditioned
/// penultimate CDF. Real-valued n is accepted for mean cardinalities.
template <typename Scalar>
Scalar penultimate_cdf(std::type_identity_t<Scalar> y, std::type_identity_t<Scalar> n, const WeibullTail<Scalar>& tail) {
  detail::require(y >= 0, "penultimate_cdf: y must be >= 0");
  detail::require(n >= 1, "penultimate_cdf: n must be >= 1");
  return std::exp(-n * std::exp(-std::pow(y / tail.scale, tail.shape)));
}

/// 1 - penultimate_cdf, accurate in the far tail.
template <typename Scalar>
Scalar penultimate_survival(std::type_identity_t<Scalar> y, std::type_identity_t<Scalar> n, const WeibullTail<Scalar>& tail) {
  detail::require(y >= 0, "penultimate_survival: y must be >= 0");
  detail::require(n >= 1, "penultimate_survival: n must be >= 1");
  return -std::expm1(-n * std::exp(-std::pow(y / tail.scale, tail.shape)));
}

/// Relative error of the penultimate form at the mode U_n:
/// |e^-1 - (1 - 1/n)^n| / (1 - 1/n)^n.
template <typename Scalar = double>
Scalar cauchy_rel_error(std::int64_t n) {
  detail::require(n >= 2, "cauchy_rel_error: n must be >= 2");
  const Scalar nn = static_cast<Scalar>(n);
  const Scalar exact = std::exp(nn * std::log1p(-Scalar(1) / nn));
  return std::abs(std::exp(Scalar(-1)) - exact) / exact;
}

/// exp{-(1 + k (s - mu)/sigma)_+^(-1/k)}, with the Gumbel limit for |k| < 1e-8.
template <typename Scalar>
Scalar gev_cdf(std::type_identity_t<Scalar> s, const GevParams<Scalar>& p) {
  const Scalar z = (s - p.location) / p.scale;
  if (std::abs(p.shape) < kGumbelSwitch) return std::exp(-std::exp(-z));
  const Scalar t = 1 + p.shape * z;
  if (t <= 0) return p.shape > 0 ? Scalar(0) : Scalar(1);
  return std::exp(-std::exp(-std::log1p(p.shape * z) / p.shape));
}

template <typename Scalar>
Scalar gev_quantile(std::type_identity_t<Scalar> prob, const GevParams<Scalar>& p) {
  detail::require(prob > 0 && prob < 1, "gev_quantile: p must lie in (0, 1)");
  const Scalar reduced = -std::log(-std::log(prob));
  if (std::abs(p.shape) < kGumbelSwitch) return p.location + p.scale * reduced;
  return p.location + p.scale * std::expm1(p.shape * reduced) / p.shape;
}

template <typename Scalar>
Scalar gumbel_cdf(Scalar s, Scalar location, Scalar scale) {
  return std::exp(-std::exp(-(s - location) / scale));
}

template <typename Scalar>
Scalar clamp_probability(Scalar p) {
  return std::min(std::max(p, static_cast<Scalar>(kProbabilityFloor)), static_cast<Scalar>(kProbabilityCeiling));
}

/// Gumbel-plot coordinate -ln(-ln p) of a clamped probability.
template <typename Scalar>
Scalar reduced_variate(Scalar p) {
  return -std::log(-std::log(clamp_probability(p)));
}

// Coefficient-wise forms for dense arrays of levels.
template <typename Derived>
auto penultimate_cdf(const Eigen::ArrayBase<Derived>& y, typename Derived::Scalar n,
                     const WeibullTail<typename Derived::Scalar>& tail) {
  using Scalar = typename Derived::Scalar;
  return y.unaryExpr([n, tail](Scalar v) { return penultimate_cdf(v, n, tail); });
}

template <typename Derived>
auto gev_cdf(const Eigen::ArrayBase<Derived>& s, const GevParams<typename Derived::Scalar>& p) {
  using Scalar = typename Derived::Scalar;
  return s.unaryExpr([p](Scalar v) { return gev_cdf(v, p); });
}

}  // namespace mev
