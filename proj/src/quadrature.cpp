#include "ranklab/quadrature.hpp"

namespace ranklab::quad {

namespace {

struct Mapping {
  enum class Kind { Finite, Upper, Lower, Both } kind = Kind::Finite;
  double anchor = 0.0;

  // x(t) and dx/dt for the open-interval substitutions used on infinite ranges.
  double to_x(double t) const {
    switch (kind) {
      case Kind::Finite: return t;
      case Kind::Upper: return anchor + t / (1.0 - t);
      case Kind::Lower: return anchor - t / (1.0 - t);
      case Kind::Both: return t / (1.0 - t * t);
    }
    return t;
  }
  double jacobian(double t) const {
    switch (kind) {
      case Kind::Finite: return 1.0;
      case Kind::Upper:
      case Kind::Lower: return 1.0 / ((1.0 - t) * (1.0 - t));
      case Kind::Both: return (1.0 + t * t) / ((1.0 - t * t) * (1.0 - t * t));
    }
    return 1.0;
  }
  double to_t(double x) const {
    switch (kind) {
      case Kind::Finite: return x;
      case Kind::Upper: return (x - anchor) / (1.0 + x - anchor);
      case Kind::Lower: return (anchor - x) / (1.0 + anchor - x);
      case Kind::Both:
        return x == 0.0 ? 0.0 : (-1.0 + std::sqrt(1.0 + 4.0 * x * x)) / (2.0 * x);
    }
    return x;
  }
};

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double abs_tol, std::span<const double> breaks) {
  if (a == b) return {0.0, 0.0, true};
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  Mapping m;
  double t_lo = a, t_hi = b;
  const bool inf_lo = std::isinf(a), inf_hi = std::isinf(b);
  if (inf_lo && inf_hi) {
    m.kind = Mapping::Kind::Both;
    t_lo = -1.0;
    t_hi = 1.0;
  } else if (inf_hi) {
    m.kind = Mapping::Kind::Upper;
    m.anchor = a;
    t_lo = 0.0;
    t_hi = 1.0;
  } else if (inf_lo) {
    // Reversed orientation: t runs from 0 (x = b) to 1 (x = -inf).
    m.kind = Mapping::Kind::Lower;
    m.anchor = b;
    t_lo = 0.0;
    t_hi = 1.0;
  }

  std::vector<double> tb{t_lo, t_hi};
  for (double x : breaks) {
    if (x > a && x < b) tb.push_back(m.to_t(x));
  }
  std::sort(tb.begin(), tb.end());
  tb.erase(std::unique(tb.begin(), tb.end()), tb.end());

  auto g = [&](double t) -> Vec<1> {
    const double x = m.to_x(t);
    const double v = f(x) * m.jacobian(t);
    return {std::isfinite(v) ? v : 0.0};
  };
  const double floor = rel_tol > 0.0 ? abs_tol / rel_tol : 0.0;
  auto scale = [&](const Vec<1>& total) -> Vec<1> { return {std::max(std::abs(total[0]), floor)}; };
  const auto r = integrate_adaptive<1>(g, tb, rel_tol, scale);
  return {sign * r.value[0], r.error[0], r.converged};
}

}  // namespace ranklab::quad

namespace ranklab::quad {

const std::array<std::array<double, kPointsPerPanel>, kPointsPerPanel>& partial_integration_matrix() {
  using Matrix = std::array<std::array<double, kPointsPerPanel>, kPointsPerPanel>;
  static const Matrix m = [] {
    constexpr std::size_t n = kPointsPerPanel;
    // Legendre values P_0..P_n at t (one extra degree for the antiderivative).
    auto legendre = [](double t) {
      std::array<double, n + 1> p{};
      p[0] = 1.0;
      p[1] = t;
      for (std::size_t k = 1; k < n; ++k)
        p[k + 1] = ((2.0 * k + 1.0) * t * p[k] - static_cast<double>(k) * p[k - 1]) / (k + 1.0);
      return p;
    };
    // Invert V[k][m] = P_m(t_k) by Gauss-Jordan elimination with partial pivoting.
    Matrix v{}, inv{};
    for (std::size_t k = 0; k < n; ++k) {
      const auto p = legendre(panel_node(k));
      for (std::size_t j = 0; j < n; ++j) v[k][j] = p[j];
      inv[k][k] = 1.0;
    }
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < n; ++r)
        if (std::abs(v[r][col]) > std::abs(v[piv][col])) piv = r;
      std::swap(v[col], v[piv]);
      std::swap(inv[col], inv[piv]);
      const double d = v[col][col];
      for (std::size_t j = 0; j < n; ++j) {
        v[col][j] /= d;
        inv[col][j] /= d;
      }
      for (std::size_t r = 0; r < n; ++r) {
        if (r == col) continue;
        const double f = v[r][col];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
          v[r][j] -= f * v[col][j];
          inv[r][j] -= f * inv[col][j];
        }
      }
    }
    // B[k][m] = integral of P_m over [-1, t_k].
    Matrix b{};
    for (std::size_t k = 0; k < n; ++k) {
      const double t = panel_node(k);
      const auto p = legendre(t);
      b[k][0] = t + 1.0;
      for (std::size_t mm = 1; mm < n; ++mm) b[k][mm] = (p[mm + 1] - p[mm - 1]) / (2.0 * mm + 1.0);
    }
    Matrix out{};
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t mm = 0; mm < n; ++mm) s += b[k][mm] * inv[mm][j];
        out[k][j] = s;
      }
    return out;
  }();
  return m;
}

}  // namespace ranklab::quad
