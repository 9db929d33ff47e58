#include "cmt/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "cmt/error.hpp"

namespace cmt {

double FrequencyEstimate::frequency() const noexcept {
  return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
}

double FrequencyEstimate::half_width() const noexcept {
  if (trials == 0) return 1.0;
  const double f = frequency();
  return kBandSigmas * std::sqrt(f * (1.0 - f) / static_cast<double>(trials));
}

bool FrequencyEstimate::band_contains(double target) const noexcept {
  return std::abs(frequency() - target) <= half_width();
}

bool MeanEstimate::band_contains(double target) const noexcept { return std::abs(mean - target) <= half_width; }

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

MeanEstimate mean_estimate(std::span<const double> xs) {
  MeanEstimate m;
  m.count = xs.size();
  if (xs.empty()) return m;
  const double n = static_cast<double>(xs.size());
  m.mean = compensated_sum(xs) / n;
  if (xs.size() < 2) return m;
  CompensatedSum ss;
  for (double x : xs) ss.add((x - m.mean) * (x - m.mean));
  m.half_width = kBandSigmas * std::sqrt(ss.value() / (n - 1.0) / n);
  return m;
}

double coefficient_of_variation(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double n = static_cast<double>(xs.size());
  const double mean = compensated_sum(xs) / n;
  CompensatedSum ss;
  for (double x : xs) ss.add((x - mean) * (x - mean));
  const double sd = std::sqrt(ss.value() / (n - 1.0));
  return mean == 0.0 ? 0.0 : sd / std::abs(mean);
}

double correlation(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size() && xs.size() >= 2, ErrorCode::InvalidArgument, "need paired samples");
  const double n = static_cast<double>(xs.size());
  const double mx = compensated_sum(xs) / n;
  const double my = compensated_sum(ys) / n;
  CompensatedSum sxy, sxx, syy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy.add((xs[i] - mx) * (ys[i] - my));
    sxx.add((xs[i] - mx) * (xs[i] - mx));
    syy.add((ys[i] - my) * (ys[i] - my));
  }
  const double den = std::sqrt(sxx.value() * syy.value());
  return den == 0.0 ? 0.0 : sxy.value() / den;
}

ChiSquareResult chi_square_test(std::span<const std::uint64_t> observed, std::span<const double> expected) {
  require(observed.size() == expected.size() && observed.size() >= 2, ErrorCode::InvalidArgument,
          "chi-square needs matching cells");
  std::uint64_t total = 0;
  for (auto o : observed) total += o;
  require(total > 0, ErrorCode::InvalidArgument, "chi-square needs observations");
  ChiSquareResult r;
  CompensatedSum stat;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    require(expected[i] > 0.0, ErrorCode::InvalidArgument, "expected cell probability must be positive");
    const double e = expected[i] * static_cast<double>(total);
    const double diff = static_cast<double>(observed[i]) - e;
    stat.add(diff * diff / e);
  }
  r.statistic = stat.value();
  r.degrees_of_freedom = observed.size() - 1;
  r.p_value = boost::math::gamma_q(0.5 * static_cast<double>(r.degrees_of_freedom), 0.5 * r.statistic);
  return r;
}

}  // namespace cmt
