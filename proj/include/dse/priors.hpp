#pragma once

#include <cstddef>
#include <vector>

#include "dse/design_space.hpp"
#include "dse/random.hpp"

namespace dse {

/// Beta(alpha, beta) density. Returns +infinity at an endpoint where the
/// corresponding exponent is negative. Throws DomainError for x outside
/// [0, 1] or non-positive shape parameters.
double beta_pdf(double x, double alpha, double beta);

/// Gamma(shape, 1) variate (Marsaglia-Tsang; shape < 1 via the
/// U^(1/shape) boost).
double sample_gamma(double shape, Rng& rng);

/// Beta variate as X / (X + Y) with X ~ Gamma(alpha), Y ~ Gamma(beta).
double sample_beta(double alpha, double beta, Rng& rng);

/// Maps a unit draw onto a parameter domain: affine rescale onto
/// [lower, upper], then integers round half to even and ordinals snap to the
/// nearest listed value (ties to the lower one). Categorical parameters pick
/// the level whose cumulative prior probability first exceeds u.
Value value_from_unit(const Parameter& param, double u);

/// One draw from the parameter's prior.
Value sample_parameter(const Parameter& param, Rng& rng);
/// One draw, uniform over the parameter's domain, ignoring the prior.
Value sample_uniform_value(const Parameter& param, Rng& rng);

Configuration sample_configuration(const DesignSpace& space, Rng& rng);
Configuration sample_uniform_configuration(const DesignSpace& space, Rng& rng);

/// min(n, cardinality) distinct prior draws. Finite spaces with
/// n >= cardinality return the full enumeration. Rejection stops after
/// 100 * n attempts; finite spaces then top up from the unsampled remainder.
std::vector<Configuration> warmup_sample(const DesignSpace& space, std::size_t n, Rng& rng);

}  // namespace dse
