#pragma once

#include <span>
#include <vector>

namespace pixplore {

double mean(std::span<const double> v);
double median(std::vector<double> v);

// Average ranks (1-based), ties share the mean rank.
std::vector<double> ranks(std::span<const double> v);

double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);

struct WilcoxonResult {
  double statistic = 0.0;  // W+ (sum of positive-difference ranks)
  double p_value = 1.0;    // two-sided
  std::size_t n = 0;       // non-zero differences
  bool exact = false;
};

// Paired signed-rank test on x - y. Exact null distribution when there are
// no tied magnitudes and n <= 50, normal approximation otherwise.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

// Pearson chi-square goodness of fit against equal expected counts.
struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;
};
ChiSquareResult chi_square_uniform(std::span<const long> counts);

}  // namespace pixplore
