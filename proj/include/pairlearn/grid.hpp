#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pairlearn/common.hpp"

namespace pairlearn::cli {

/// Hyperparameter ladder for grid search. Default is the 14 decade values
/// 1e-7 ... 1e6. `joint` controls whether two-step search covers the full
/// lambda_d x lambda_t product grid.
struct GridSpec {
  std::vector<double> lambda_values;
  bool joint = true;

  static GridSpec defaults() {
    GridSpec g;
    for (int e = -7; e <= 6; ++e) g.lambda_values.push_back(std::pow(10.0, e));
    return g;
  }
};

/// Parse "START:END:decade", e.g. "1e-7:1e6:decade".
inline GridSpec parse_grid(const std::string& text) {
  if (text.empty()) return GridSpec::defaults();
  const auto first = text.find(':');
  const auto second = text.find(':', first == std::string::npos ? first : first + 1);
  require(first != std::string::npos && second != std::string::npos, ErrorCode::InvalidArgument,
          "grid spec must look like '1e-7:1e6:decade', got '" + text + "'");
  const std::string lo_s = text.substr(0, first);
  const std::string hi_s = text.substr(first + 1, second - first - 1);
  const std::string step = text.substr(second + 1);
  require(step == "decade", ErrorCode::InvalidArgument,
          "only 'decade' grid steps are supported, got '" + step + "'");
  double lo = 0, hi = 0;
  try {
    lo = std::stod(lo_s);
    hi = std::stod(hi_s);
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "cannot parse grid bounds in '" + text + "'");
  }
  require(lo > 0.0 && hi >= lo, ErrorCode::InvalidArgument,
          "grid bounds must satisfy 0 < start <= end");
  GridSpec g;
  const int e_lo = static_cast<int>(std::lround(std::log10(lo)));
  const int e_hi = static_cast<int>(std::lround(std::log10(hi)));
  require(std::abs(std::pow(10.0, e_lo) - lo) <= 1e-9 * lo &&
              std::abs(std::pow(10.0, e_hi) - hi) <= 1e-9 * hi,
          ErrorCode::InvalidArgument, "decade grid bounds must be powers of ten");
  for (int e = e_lo; e <= e_hi; ++e) g.lambda_values.push_back(std::pow(10.0, e));
  return g;
}

}  // namespace pairlearn::cli
