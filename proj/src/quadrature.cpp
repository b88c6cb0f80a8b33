#include "mdt/quadrature.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <queue>
#include <vector>

namespace mdt::quad {
namespace {

// QUADPACK qk21 abscissae / weights. Odd indices of kXgk are the 10-point
// Gauss nodes.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525626590, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk21(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[10];
  double gauss = 0.0;
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    const double s = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  kronrod *= half;
  gauss *= half;
  double err = std::fabs(kronrod - gauss);
  // QUADPACK-style sharpening of the raw difference.
  if (err > 0.0) err = std::min(err, 200.0 * err * std::sqrt(200.0 * err / (std::fabs(kronrod) + 1e-300)));
  err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * std::fabs(kronrod));
  return {a, b, kronrod, err};
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double abs_tol, std::size_t max_panels) {
  Result r;
  if (a == b) {
    r.converged = true;
    return r;
  }
  std::priority_queue<Panel> heap;
  Panel first = gk21(f, a, b);
  heap.push(first);
  double value = first.value;
  double error = first.error;
  std::size_t panels = 1;
  while (error > std::max(abs_tol, rel_tol * std::fabs(value)) && panels < max_panels) {
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      heap.push(worst);
      break;  // cannot subdivide further in double precision
    }
    Panel left = gk21(f, worst.a, mid);
    Panel right = gk21(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  // Re-sum to drop accumulated cancellation in the running totals.
  value = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  r.value = value;
  r.error = error;
  r.panels = panels;
  r.converged = error <= std::max(abs_tol, rel_tol * std::fabs(value));
  return r;
}

}  // namespace mdt::quad
