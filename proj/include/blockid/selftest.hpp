#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace blockid::selftest {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Two-sided one-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Asymptotic critical value sqrt(-ln(alpha/2)/2) / sqrt(n).
double ks_critical(std::size_t n, double alpha);

/// Largest relative error |a - f| / max(|a|, |f|, 1e-5 max(1, |L|)) between backprop and
/// central differences (step 1e-5) over random small encoders; coordinates
/// whose step crosses a LeakyReLU kink are skipped.
CheckResult check_gradients(std::size_t configs = 100, std::uint64_t seed = 0);
CheckResult check_mixing_round_trip(std::size_t networks = 5, std::size_t points = 10'000,
                                    std::uint64_t seed = 0);
CheckResult check_darmois_uniformity(std::size_t n = 100'000, std::uint64_t seed = 0);
CheckResult check_krr_dual(std::size_t instances = 20, std::uint64_t seed = 0);
CheckResult check_content_invariance(std::size_t pairs = 100'000, std::uint64_t seed = 0);
CheckResult check_samplers(std::size_t n = 100'000, std::uint64_t seed = 0);

using Reporter = std::function<void(const CheckResult&)>;

/// Every suite above with its default size.
std::vector<CheckResult> run_all(std::uint64_t seed = 0, const Reporter& report = {});

}  // namespace blockid::selftest
