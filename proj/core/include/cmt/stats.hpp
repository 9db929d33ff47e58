#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cmt {

// Band width multiplier used by every estimator in the library.
inline constexpr double kBandSigmas = 4.0;

// Binomial frequency with half-width 4 sqrt(f(1-f)/n).
struct FrequencyEstimate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;

  double frequency() const noexcept;
  double half_width() const noexcept;
  bool band_contains(double target) const noexcept;
};

// Sample mean with half-width 4 s / sqrt(n).
struct MeanEstimate {
  std::uint64_t count = 0;
  double mean = 0.0;
  double half_width = 0.0;

  bool band_contains(double target) const noexcept;
};

// Kahan-Babuska compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> xs) noexcept;
MeanEstimate mean_estimate(std::span<const double> xs);
// Sample coefficient of variation s / |mean| (0 for fewer than 2 values).
double coefficient_of_variation(std::span<const double> xs);
// Pearson correlation of paired samples.
double correlation(std::span<const double> xs, std::span<const double> ys);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t degrees_of_freedom = 0;
  double p_value = 1.0;
};
// Goodness of fit of `observed` counts against cell probabilities `expected`.
ChiSquareResult chi_square_test(std::span<const std::uint64_t> observed, std::span<const double> expected);

}  // namespace cmt
