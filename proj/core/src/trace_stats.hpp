#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace magnonfit::detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

/// Centred moving average over `width` samples, shrinking at the edges.
inline std::vector<double> boxcar(std::span<const double> x, std::size_t width) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  if (width <= 1) {
    std::copy(x.begin(), x.end(), out.begin());
    return out;
  }
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  const std::size_t half = width / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

/// Per-sample white-noise σ from the median absolute first difference; robust
/// against the resonance itself.
inline double noise_sigma(std::span<const double> x) {
  if (x.size() < 3) return 0.0;
  std::vector<double> d(x.size() - 1);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) d[i] = std::abs(x[i + 1] - x[i]);
  // MAD of a zero-mean normal difference: 0.6745·σ·sqrt(2).
  return median(std::move(d)) / (0.6744897501960817 * std::sqrt(2.0));
}

}  // namespace magnonfit::detail
