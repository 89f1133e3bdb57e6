#include "pixplore/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "pixplore/error.hpp"

namespace pixplore {

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw Error(ErrorCode::kInvalidArgument, "pearson needs paired samples");
  const double ma = mean(a), mb = mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  return pearson(ra, rb);
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kInvalidArgument, "wilcoxon needs paired samples");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != y[i]) diffs.push_back(x[i] - y[i]);
  }
  WilcoxonResult res;
  res.n = diffs.size();
  if (diffs.empty()) return res;

  std::vector<double> mags(diffs.size());
  std::transform(diffs.begin(), diffs.end(), mags.begin(), [](double d) { return std::fabs(d); });
  const auto r = ranks(mags);
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    if (diffs[i] > 0) res.statistic += r[i];
  }
  bool ties = false;
  for (double v : r) ties = ties || v != std::floor(v);
  std::vector<double> sorted = mags;
  std::sort(sorted.begin(), sorted.end());
  ties = ties || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();

  const std::size_t n = diffs.size();
  if (!ties && n <= 50) {
    // Count subsets of {1..n} by rank sum.
    const std::size_t max_sum = n * (n + 1) / 2;
    std::vector<double> ways(max_sum + 1, 0.0);
    ways[0] = 1.0;
    for (std::size_t k = 1; k <= n; ++k) {
      for (std::size_t s = max_sum; s >= k; --s) ways[s] += ways[s - k];
    }
    const double total = std::ldexp(1.0, static_cast<int>(n));
    const auto w = static_cast<std::size_t>(std::llround(res.statistic));
    const std::size_t lower = std::min(w, max_sum - w);
    double tail = 0.0;
    for (std::size_t s = 0; s <= lower; ++s) tail += ways[s];
    res.p_value = std::min(1.0, 2.0 * tail / total);
    res.exact = true;
    return res;
  }

  const double nn = static_cast<double>(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double mu = nn * (nn + 1) / 4.0;
  const double sigma = std::sqrt(nn * (nn + 1) * (2 * nn + 1) / 24.0 - tie_term / 48.0);
  if (sigma == 0.0) return res;
  const double z = (std::fabs(res.statistic - mu) - 0.5) / sigma;
  boost::math::normal_distribution<> norm;
  res.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(norm, std::max(0.0, z))));
  return res;
}

ChiSquareResult chi_square_uniform(std::span<const long> counts) {
  if (counts.size() < 2) throw Error(ErrorCode::kInvalidArgument, "chi-square needs at least two categories");
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), 0L));
  const double expected = total / static_cast<double>(counts.size());
  ChiSquareResult res;
  for (long c : counts) res.statistic += (c - expected) * (c - expected) / expected;
  res.dof = static_cast<int>(counts.size()) - 1;
  boost::math::chi_squared_distribution<> dist(res.dof);
  res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
  return res;
}

}  // namespace pixplore
