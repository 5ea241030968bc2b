#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace hjqp::gk {

inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t M>
using Vec = std::array<double, M>;

template <std::size_t M>
struct Panel {
  Vec<M> value{};
  Vec<M> error{};
};

// One 7-15 Gauss-Kronrod panel with the QUADPACK error heuristic, vector valued.
template <std::size_t M, class F>
Panel<M> panel(F& f, double a, double b) {
  constexpr double epmach = std::numeric_limits<double>::epsilon();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<Vec<M>, 15> fv;
  fv[7] = f(c);
  for (int j = 0; j < 7; ++j) {
    const double dx = h * xgk[j];
    fv[j] = f(c - dx);
    fv[14 - j] = f(c + dx);
  }
  Panel<M> out;
  for (std::size_t m = 0; m < M; ++m) {
    double resk = fv[7][m] * wgk[7];
    double resg = fv[7][m] * wg[3];
    double resabs = std::abs(resk);
    for (int j = 0; j < 7; ++j) {
      const double s = fv[j][m] + fv[14 - j][m];
      resk += wgk[j] * s;
      resabs += wgk[j] * (std::abs(fv[j][m]) + std::abs(fv[14 - j][m]));
      if (j % 2 == 1) resg += wg[j / 2] * s;
    }
    const double reskh = 0.5 * resk;
    double resasc = wgk[7] * std::abs(fv[7][m] - reskh);
    for (int j = 0; j < 7; ++j)
      resasc += wgk[j] * (std::abs(fv[j][m] - reskh) + std::abs(fv[14 - j][m] - reskh));
    const double ah = std::abs(h);
    resasc *= ah;
    resabs *= ah;
    double err = std::abs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    if (resabs > std::numeric_limits<double>::min() / (50.0 * epmach))
      err = std::max(50.0 * epmach * resabs, err);
    out.value[m] = resk * h;
    out.error[m] = err;
  }
  return out;
}

template <std::size_t M>
struct Result {
  Vec<M> value{};
  Vec<M> error{};
  int intervals = 0;
  bool converged = true;
};

// Global adaptive bisection: the interval with the largest scaled error is split until
// the summed error of every component is below max(abs_tol, rel_tol * |value|).
// Intervals are summed left to right so results do not depend on the refinement order.
template <std::size_t M, class F>
Result<M> adaptive(F&& f, double a, double b, double abs_tol, double rel_tol, int max_intervals) {
  Result<M> res;
  if (a == b) return res;
  struct Item {
    double a, b;
    Panel<M> p;
    double key;
  };
  const Panel<M> first = panel<M>(f, a, b);
  Vec<M> scale;
  for (std::size_t m = 0; m < M; ++m) scale[m] = std::max(abs_tol, rel_tol * std::abs(first.value[m]));
  auto key_of = [&scale](const Panel<M>& p) {
    double k = 0.0;
    for (std::size_t m = 0; m < M; ++m) k = std::max(k, scale[m] > 0.0 ? p.error[m] / scale[m] : p.error[m]);
    return k;
  };
  auto less = [](const Item& x, const Item& y) { return x.key < y.key; };
  std::vector<Item> heap;
  heap.push_back({a, b, first, key_of(first)});
  Vec<M> value = first.value, error = first.error;
  auto done = [&]() {
    for (std::size_t m = 0; m < M; ++m)
      if (!(error[m] <= std::max(abs_tol, rel_tol * std::abs(value[m])))) return false;
    return true;
  };
  int used = 1;
  bool converged = done();
  while (!converged) {
    if (used + 1 > max_intervals) break;
    std::pop_heap(heap.begin(), heap.end(), less);
    Item it = heap.back();
    const double mid = 0.5 * (it.a + it.b);
    if (mid == it.a || mid == it.b) {
      heap.back().key = -1.0;
      std::push_heap(heap.begin(), heap.end(), less);
      if (heap.front().key < 0.0) break;
      continue;
    }
    heap.pop_back();
    const Panel<M> l = panel<M>(f, it.a, mid);
    const Panel<M> r = panel<M>(f, mid, it.b);
    for (std::size_t m = 0; m < M; ++m) {
      value[m] += l.value[m] + r.value[m] - it.p.value[m];
      error[m] += l.error[m] + r.error[m] - it.p.error[m];
    }
    heap.push_back({it.a, mid, l, key_of(l)});
    std::push_heap(heap.begin(), heap.end(), less);
    heap.push_back({mid, it.b, r, key_of(r)});
    std::push_heap(heap.begin(), heap.end(), less);
    ++used;
    converged = done();
  }
  std::sort(heap.begin(), heap.end(), [](const Item& x, const Item& y) { return x.a < y.a; });
  for (const auto& it : heap) {
    for (std::size_t m = 0; m < M; ++m) {
      res.value[m] += it.p.value[m];
      res.error[m] += it.p.error[m];
    }
  }
  res.intervals = int(heap.size());
  res.converged = converged;
  return res;
}

template <class F>
Result<1> adaptive_scalar(F&& f, double a, double b, double abs_tol, double rel_tol, int max_intervals) {
  auto g = [&f](double x) { return Vec<1>{f(x)}; };
  return adaptive<1>(g, a, b, abs_tol, rel_tol, max_intervals);
}

}  // namespace hjqp::gk
