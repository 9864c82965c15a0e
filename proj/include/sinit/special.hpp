#pragma once

namespace sinit {

/// Standard normal density.
double normal_pdf(double x) noexcept;

/// Standard normal CDF Φ(x).
double normal_cdf(double x);

/// Φ⁻¹(p) for 0 < p < 1. Throws Errc::domain outside the open interval.
///
/// Acklam's rational approximation (relative error ~1.15e-9) followed by
/// one Halley step against normal_cdf, which brings |Φ(Φ⁻¹(p)) − p| down to
/// rounding level.
double normal_quantile(double p);

}  // namespace sinit
