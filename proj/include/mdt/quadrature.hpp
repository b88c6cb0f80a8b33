#pragma once

#include <cstddef>
#include <functional>

namespace mdt::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  std::size_t panels = 0;
  bool converged = false;
};

inline constexpr std::size_t kMaxPanels = std::size_t{1} << 16;

/// Globally adaptive 21-point Gauss-Kronrod on [a, b]: the panel with the
/// largest error estimate is bisected until the summed estimate drops below
/// max(abs_tol, rel_tol * |value|) or max_panels is reached.
Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double abs_tol = 0.0, std::size_t max_panels = kMaxPanels);

}  // namespace mdt::quad
