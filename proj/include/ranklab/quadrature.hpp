#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace ranklab::quad {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15), symmetric about 0.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for kKronrodNodes[1], [3], [5], [7].
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline constexpr std::size_t kPointsPerPanel = 15;

/// Position of the k-th of 15 panel nodes in [-1, 1], ascending.
inline double panel_node(std::size_t k) {
  return k < 7 ? -kKronrodNodes[k] : (k == 7 ? 0.0 : kKronrodNodes[14 - k]);
}
inline double panel_weight(std::size_t k) {
  return k < 7 ? kKronrodWeights[k] : (k == 7 ? kKronrodWeights[7] : kKronrodWeights[14 - k]);
}

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct Panel {
  double lo = 0.0;
  double hi = 0.0;
  Vec<N> value{};
  Vec<N> error{};
  std::array<Vec<N>, kPointsPerPanel> samples{};
};

template <std::size_t N>
struct AdaptiveResult {
  Vec<N> value{};
  Vec<N> error{};
  std::vector<Panel<N>> panels;  // sorted by position
  std::size_t evaluations = 0;
  bool converged = false;
};

template <std::size_t N, class F>
Panel<N> evaluate_panel(F& f, double lo, double hi) {
  Panel<N> p;
  p.lo = lo;
  p.hi = hi;
  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  Vec<N> kron{}, gauss{};
  for (std::size_t k = 0; k < kPointsPerPanel; ++k) {
    p.samples[k] = f(centre + half * panel_node(k));
    const double wk = panel_weight(k);
    // Gauss nodes are the odd-indexed Kronrod nodes (and the centre).
    const std::size_t mirrored = k < 7 ? k : 14 - k;
    const bool is_gauss = (mirrored % 2 == 1) || k == 7;
    const double wg = is_gauss ? kGaussWeights[mirrored / 2] : 0.0;
    for (std::size_t c = 0; c < N; ++c) {
      kron[c] += wk * p.samples[k][c];
      gauss[c] += wg * p.samples[k][c];
    }
  }
  for (std::size_t c = 0; c < N; ++c) {
    p.value[c] = half * kron[c];
    p.error[c] = std::abs(half * (kron[c] - gauss[c]));
  }
  return p;
}

/// Globally adaptive Gauss-Kronrod integration of a vector-valued integrand
/// over [breaks.front(), breaks.back()], starting from the partition given by
/// `breaks`. The panel with the largest scaled error is bisected until the
/// summed scaled error drops below `rel_tol`. `scale(total)` returns the
/// per-component magnitude that errors are measured against.
template <std::size_t N, class F, class Scale>
AdaptiveResult<N> integrate_adaptive(F&& f, std::span<const double> breaks, double rel_tol,
                                     Scale&& scale, std::size_t max_panels = 4000) {
  AdaptiveResult<N> out;
  std::vector<Panel<N>> panels;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) panels.push_back(evaluate_panel<N>(f, breaks[i], breaks[i + 1]));
  }
  out.evaluations = panels.size() * kPointsPerPanel;

  auto totals = [&](Vec<N>& value, Vec<N>& error) {
    value.fill(0.0);
    error.fill(0.0);
    for (const auto& p : panels)
      for (std::size_t c = 0; c < N; ++c) {
        value[c] += p.value[c];
        error[c] += p.error[c];
      }
  };

  Vec<N> value{}, error{};
  while (!panels.empty()) {
    totals(value, error);
    const Vec<N> s = scale(value);
    double worst = -1.0;
    double summed = 0.0;
    std::size_t worst_index = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      double e = 0.0;
      for (std::size_t c = 0; c < N; ++c) {
        if (s[c] > 0.0) e = std::max(e, panels[i].error[c] / s[c]);
      }
      summed += e;
      if (e > worst) {
        worst = e;
        worst_index = i;
      }
    }
    if (summed <= rel_tol) {
      out.converged = true;
      break;
    }
    if (panels.size() >= max_panels) break;
    const Panel<N> victim = panels[worst_index];
    const double mid = 0.5 * (victim.lo + victim.hi);
    if (!(mid > victim.lo && mid < victim.hi)) {
      // Panel cannot be split further in double precision.
      panels[worst_index].error.fill(0.0);
      continue;
    }
    panels[worst_index] = evaluate_panel<N>(f, victim.lo, mid);
    panels.push_back(evaluate_panel<N>(f, mid, victim.hi));
    out.evaluations += 2 * kPointsPerPanel;
  }
  totals(value, error);
  std::sort(panels.begin(), panels.end(),
            [](const Panel<N>& a, const Panel<N>& b) { return a.lo < b.lo; });
  out.value = value;
  out.error = error;
  out.panels = std::move(panels);
  return out;
}

/// Bisect every panel once more (doubles the node count).
template <std::size_t N, class F>
void refine_all(AdaptiveResult<N>& r, F&& f) {
  std::vector<Panel<N>> finer;
  finer.reserve(2 * r.panels.size());
  for (const auto& p : r.panels) {
    const double mid = 0.5 * (p.lo + p.hi);
    finer.push_back(evaluate_panel<N>(f, p.lo, mid));
    finer.push_back(evaluate_panel<N>(f, mid, p.hi));
  }
  r.panels = std::move(finer);
  r.value.fill(0.0);
  r.error.fill(0.0);
  for (const auto& p : r.panels)
    for (std::size_t c = 0; c < N; ++c) {
      r.value[c] += p.value[c];
      r.error[c] += p.error[c];
    }
  r.evaluations += r.panels.size() * kPointsPerPanel;
}

/// M[k][j] such that the integral of the degree-14 interpolant of samples f_j
/// over [-1, node_k] equals sum_j M[k][j] f_j (nodes as in panel_node).
const std::array<std::array<double, kPointsPerPanel>, kPointsPerPanel>& partial_integration_matrix();

struct Result {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

/// Scalar integral of f over [a, b]; either bound may be infinite.
/// Interior points in `breaks` (if any) seed the initial partition.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, double abs_tol = 0.0, std::span<const double> breaks = {});

}  // namespace ranklab::quad
