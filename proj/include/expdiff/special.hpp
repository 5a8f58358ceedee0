#pragma once

// Log-gamma and digamma for x > 0, needed by every conjugate log-partition
// function and its gradient.

namespace expdiff {

// Lanczos approximation (g = 7, 9 coefficients) with reflection below 0.5.
// Relative accuracy ~1e-14 over [1e-3, 1e6].
double lgamma_pos(double x);

// Recurrence up to x >= 10 plus the asymptotic Bernoulli series.
// Absolute accuracy better than 1e-12 for x >= 1e-2.
double digamma_pos(double x);

// log(1 + e^x) without overflow.
double softplus(double x);

// d/dx softplus = logistic sigmoid, computed in the stable branch form.
double logistic(double x);

}  // namespace expdiff
