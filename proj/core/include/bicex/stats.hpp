#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace bicex {

double normal_pdf(double z);
double normal_cdf(double z);

/// Inverse standard normal CDF, p in (0, 1).
double normal_quantile(double p);

/// Two-sided z value for a central confidence level, e.g. 0.95 -> 1.959964.
double z_for_confidence(double level);

/// Wilson score interval bounds for a binomial proportion.
double wilson_lower(std::int64_t successes, std::int64_t trials, double z);
double wilson_upper(std::int64_t successes, std::int64_t trials, double z);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

/// Survival function of the chi-square distribution with dof degrees.
double chi_square_sf(double stat, int dof);

double mean_of(std::span<const double> xs);
double sample_sd(std::span<const double> xs);

/// Mean of max(Y, 0) for Y ~ Normal(mean, sd^2), in closed form.
double truncated_gaussian_positive_mean(double mean, double sd);

/// Shortest round-trip decimal rendering of a double; locale independent.
std::string format_double(double v);

}  // namespace bicex
