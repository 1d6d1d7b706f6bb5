#include "treemass/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "treemass/errors.hpp"

namespace treemass::quad {
namespace {

// 15-point Kronrod extension of the 7-point Gauss rule; abscissae and weights
// for [-1, 1]. The even-indexed abscissae are the Gauss points.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double h = 0.5 * (b - a);
  const double c = 0.5 * (a + b);

  const double fc = f(c);
  double resg = kWg[3] * fc;
  double resk = kWgk[7] * fc;
  double resabs = kWgk[7] * std::fabs(fc);
  double fv[15];
  fv[7] = fc;

  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    fv[j] = f1;
    fv[14 - j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::fabs(f1) + std::fabs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }

  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::fabs(fc - reskh);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] * (std::fabs(fv[j] - reskh) + std::fabs(fv[14 - j] - reskh));

  const double ah = std::fabs(h);
  double err = std::fabs((resk - resg) * h);
  resasc *= ah;
  resabs *= ah;
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  const double uflow = std::numeric_limits<double>::min();
  if (resabs > uflow / (50.0 * eps)) err = std::max(eps * 50.0 * resabs, err);

  return Panel{a, b, resk * h, err};
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opts) {
  if (a == b) return Result{0.0, 0.0, 0};

  std::priority_queue<Panel> heap;
  Panel first = gk15(f, a, b);
  double total_v = first.value;
  double total_e = first.error;
  heap.push(first);
  int panels = 1;

  while (total_e > std::max(opts.abs_tol, opts.rel_tol * std::fabs(total_v)) &&
         panels < opts.max_intervals) {
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Interval narrower than machine spacing; cannot refine further.
      heap.push(Panel{worst.a, worst.b, worst.value, 0.0});
      total_e -= worst.error;
      continue;
    }
    Panel left = gk15(f, worst.a, mid);
    Panel right = gk15(f, mid, worst.b);
    total_v += left.value + right.value - worst.value;
    total_e += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }

  return Result{total_v, total_e, panels};
}

Result integrate_scaled_exp(const std::function<double(double)>& log_f,
                            double lo, double hi, const Options& opts) {
  // Scale by the largest log value seen on a coarse scan so exp() stays sane.
  double peak = -std::numeric_limits<double>::infinity();
  const int scan = 64;
  for (int i = 0; i <= scan; ++i) {
    const double t = lo + (hi - lo) * i / scan;
    peak = std::max(peak, log_f(t));
  }
  if (!std::isfinite(peak)) return Result{0.0, 0.0, 0};

  auto g = [&](double t) {
    const double l = log_f(t);
    return std::isfinite(l) ? std::exp(l - peak) : 0.0;
  };
  Result r = integrate(g, lo, hi, opts);
  const double s = std::exp(peak);
  return Result{r.value * s, r.error * s, r.intervals};
}

Result integrate_positive_axis(const std::function<double(double)>& log_f_of_x,
                               double t_hint, const Options& opts,
                               double hard_hi) {
  auto logg = [&](double t) { return log_f_of_x(std::exp(t)) + t; };

  // Hill-climb to a point near the mode of log g.
  double t0 = t_hint;
  double l0 = logg(t0);
  for (int i = 0; i < 400 && !std::isfinite(l0); ++i) {
    // Hint landed in a dead zone (log = -inf); walk outward until signal.
    t0 = t_hint + ((i % 2 == 0) ? 1.0 : -1.0) * (1.0 + i / 2);
    l0 = logg(t0);
  }
  if (!std::isfinite(l0)) return Result{0.0, 0.0, 0};
  double step = 1.0;
  for (int i = 0; i < 400; ++i) {
    const double lp = logg(t0 + step);
    const double lm = logg(t0 - step);
    if (lp > l0 && lp >= lm) {
      t0 += step;
      l0 = lp;
    } else if (lm > l0) {
      t0 -= step;
      l0 = lm;
    } else if (step > 1.0 / 64.0) {
      step *= 0.5;
    } else {
      break;
    }
  }

  // Expand until the integrand has dropped far below the peak. The stride
  // grows so slowly-decaying flanks (shape parameters near zero) still
  // terminate in a bounded number of evaluations.
  const double drop = 120.0;
  double lo = t0, hi = t0;
  double stride = 1.0;
  for (int i = 0; i < 300; ++i) {
    if (logg(lo) < l0 - drop) break;
    lo -= stride;
    if (i > 40) stride *= 1.25;
  }
  stride = 1.0;
  const double hi_cap = hard_hi > 0.0 ? std::log(hard_hi)
                                      : std::numeric_limits<double>::infinity();
  for (int i = 0; i < 300; ++i) {
    if (hi >= hi_cap) {
      hi = hi_cap;
      break;
    }
    if (logg(hi) < l0 - drop) break;
    hi += stride;
    if (i > 40) stride *= 1.25;
  }

  return integrate_scaled_exp(logg, lo, hi, opts);
}

std::vector<double> cumulative_density(const std::function<double(double)>& density,
                                       const std::vector<double>& ascending_points,
                                       double left_exponent,
                                       const Options& per_gap) {
  const std::size_t n = ascending_points.size();
  std::vector<double> gap(n, 0.0);
  if (n == 0) return gap;

  // First segment [0, x0] under x = u^(1/a); the integrand is bounded at 0.
  {
    const double a = left_exponent;
    const double x0 = ascending_points[0];
    if (x0 > 0.0) {
      auto g = [&](double u) {
        const double x = std::pow(u, 1.0 / a);
        return density(x) * std::pow(u, 1.0 / a - 1.0) / a;
      };
      gap[0] = integrate(g, 0.0, std::pow(x0, a), per_gap).value;
    }
  }

#pragma omp parallel for schedule(static)
  for (std::size_t i = 1; i < n; ++i) {
    const double a = ascending_points[i - 1];
    const double b = ascending_points[i];
    gap[i] = (b > a) ? integrate(density, a, b, per_gap).value : 0.0;
  }

  std::vector<double> out(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += gap[i];
    out[i] = acc;
  }
  return out;
}

Result integrate_unit_interval(const std::function<double(double)>& density,
                               double left_exponent, double right_exponent,
                               const Options& opts) {
  const double a = left_exponent;
  const double b = right_exponent;
  auto left = [&](double u) {
    const double p = std::pow(u, 1.0 / a);
    return density(p) * std::pow(u, 1.0 / a - 1.0) / a;
  };
  auto right = [&](double v) {
    const double p = 1.0 - std::pow(v, 1.0 / b);
    return density(p) * std::pow(v, 1.0 / b - 1.0) / b;
  };
  Result rl = integrate(left, 0.0, std::pow(0.5, a), opts);
  Result rr = integrate(right, 0.0, std::pow(0.5, b), opts);
  return Result{rl.value + rr.value, rl.error + rr.error,
                rl.intervals + rr.intervals};
}

}  // namespace treemass::quad
