#include "smtj/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "smtj/errors.hpp"

namespace smtj::markov {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Roots of the monic cubic x^3 + a2 x^2 + a1 x + a0. Closed form (trig /
// Cardano) picks the branch; a few Newton steps polish simple roots to
// machine precision. Near-zero discriminants take the double-root path,
// which recovers the repeated root as a root of the derivative instead of
// losing half the digits to the sqrt of an almost-cancelled discriminant.
std::array<std::complex<double>, 3> solve_cubic(double a2, double a1,
                                                double a0) {
  const double third = 1.0 / 3.0;
  double shift = a2 * third;
  // Depressed form y^3 + p y + q, x = y - shift.
  double p = a1 - a2 * a2 * third;
  double q = a2 * (2.0 * a2 * a2 / 27.0 - a1 * third) + a0;
  double disc = -4.0 * p * p * p - 27.0 * q * q;
  double disc_scale = 4.0 * std::abs(p * p * p) + 27.0 * q * q + 1e-300;

  std::array<std::complex<double>, 3> y;
  if (std::abs(disc) <= 1e-10 * disc_scale) {
    // Repeated root: it is also a root of 3y^2 + p.
    double mu = std::sqrt(std::max(0.0, -p * third));
    auto f = [&](double v) { return std::abs((v * v + p) * v + q); };
    if (f(-mu) < f(mu)) mu = -mu;
    y = {mu, mu, -2.0 * mu};  // depressed roots sum to zero
  } else if (disc > 0.0) {
    // Three distinct real roots.
    double m = 2.0 * std::sqrt(-p * third);
    double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    double theta = std::acos(arg) * third;
    for (int k = 0; k < 3; ++k) {
      y[k] = m * std::cos(theta - 2.0 * std::numbers::pi * k * third);
    }
  } else {
    // One real root, one complex-conjugate pair.
    double rad = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    double u = -q / 2.0;
    double big = u >= 0.0 ? u + rad : u - rad;  // avoid cancellation
    double a = std::cbrt(big);
    double b = a == 0.0 ? 0.0 : -p / (3.0 * a);
    double real = a + b;
    double imag = std::sqrt(3.0) / 2.0 * std::abs(a - b);
    y = {std::complex<double>(real, 0.0),
         std::complex<double>(-real / 2.0, imag),
         std::complex<double>(-real / 2.0, -imag)};
  }

  std::array<std::complex<double>, 3> x;
  bool repeated = std::abs(disc) <= 1e-10 * disc_scale;
  for (int k = 0; k < 3; ++k) {
    std::complex<double> r = y[k] - shift;
    if (!repeated) {
      for (int it = 0; it < 3; ++it) {
        std::complex<double> f = ((r + a2) * r + a1) * r + a0;
        std::complex<double> df = (3.0 * r + 2.0 * a2) * r + a1;
        if (std::abs(df) == 0.0) break;
        r -= f / df;
      }
    }
    x[k] = r;
  }
  return x;
}

}  // namespace

void CoupledPairModel::validate() const {
  require(std::isfinite(tau1_s) && tau1_s > 0.0, "tau1_s must be positive");
  require(std::isfinite(ratio) && ratio >= 1.0,
          "ratio must be >= 1 (first device is the slower one)");
  require(std::isfinite(g1) && g1 >= 1.0, "g1 must be >= 1");
  require(std::isfinite(g2) && g2 >= 1.0, "g2 must be >= 1");
}

Generator4 build_generator(const CoupledPairModel& model) {
  model.validate();
  // Balanced switching rates per device.
  double base1 = 1.0 / model.tau1_s;
  double base2 = model.ratio / model.tau1_s;
  bool positive = model.polarity == analog::Polarity::Positive;

  // Rate for a device to leave `own` while the partner sits in `partner`.
  // Under positive polarity matching states are stabilised (dwell * g);
  // mismatched states are destabilised (dwell / g).
  auto rate = [&](double base, double g, int own, int partner) {
    bool stabilized = (own == partner) == positive;
    return stabilized ? base / g : base * g;
  };

  Generator4 gen;
  for (int s1 = 0; s1 < 2; ++s1) {
    for (int s2 = 0; s2 < 2; ++s2) {
      int from = s1 * 2 + s2;
      double r1 = rate(base1, model.g1, s1, s2);
      double r2 = rate(base2, model.g2, s2, s1);
      gen.q[from][(1 - s1) * 2 + s2] = r1;
      gen.q[from][s1 * 2 + (1 - s2)] = r2;
      gen.q[from][from] = -(r1 + r2);
    }
  }
  return gen;
}

std::array<double, 4> steady_state(const Generator4& gen) {
  // Scale rates to O(1) before adding the rank-one normalization term.
  double scale = 0.0;
  for (int i = 0; i < 4; ++i) scale = std::max(scale, std::abs(gen.q[i][i]));
  if (scale == 0.0) throw NumericalError("generator is identically zero");

  // A = Q^T / scale + ones, b = ones: the unique solution is the stationary
  // distribution when the chain is irreducible.
  double a[4][5];
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) a[i][j] = gen.q[j][i] / scale + 1.0;
    a[i][4] = 1.0;
  }

  // Gaussian elimination with partial pivoting.
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int row = col + 1; row < 4; ++row) {
      if (std::abs(a[row][col]) > std::abs(a[piv][col])) piv = row;
    }
    if (std::abs(a[piv][col]) < 1e-12) {
      throw NumericalError("generator is reducible or degenerate");
    }
    if (piv != col) std::swap(a[piv], a[col]);
    for (int row = col + 1; row < 4; ++row) {
      double f = a[row][col] / a[col][col];
      for (int j = col; j < 5; ++j) a[row][j] -= f * a[col][j];
    }
  }
  std::array<double, 4> p{};
  for (int row = 3; row >= 0; --row) {
    double v = a[row][4];
    for (int j = row + 1; j < 4; ++j) v -= a[row][j] * p[j];
    p[row] = v / a[row][row];
  }

  double sum = p[0] + p[1] + p[2] + p[3];
  for (auto& v : p) v /= sum;
  for (double v : p) {
    if (!(v > 0.0)) {
      throw NumericalError("stationary distribution not strictly positive; "
                           "generator is reducible");
    }
  }
  return p;
}

double slowest_eigenvalue(const CoupledPairModel& model) {
  model.validate();
  if (model.g1 != model.g2) {
    throw NumericalError(
        "closed-form slowest eigenvalue requires g1 == g2; use spectrum() "
        "on the built generator instead");
  }
  double g = model.g1;
  double r = model.ratio;
  double b = (g * g + 1.0) * (r + 1.0);
  double disc = b * b - 16.0 * g * g * r;  // >= 0 for g, r >= 1
  return (-b + std::sqrt(std::max(0.0, disc))) / (2.0 * g) / model.tau1_s;
}

std::array<std::complex<double>, 4> spectrum(const Generator4& gen) {
  double scale = 0.0;
  for (int i = 0; i < 4; ++i) scale = std::max(scale, std::abs(gen.q[i][i]));
  if (scale == 0.0) {
    return {0.0, 0.0, 0.0, 0.0};
  }
  double b[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) b[i][j] = gen.q[i][j] / scale;

  // Characteristic polynomial det(xI - B) = x^4 - c1 x^3 + c2 x^2 - c3 x
  // (+ det B, which vanishes for a generator). ck = sum of k x k principal
  // minors. Deflating the known zero root leaves
  //   x^3 - c1 x^2 + c2 x - c3 = 0.
  double c1 = b[0][0] + b[1][1] + b[2][2] + b[3][3];
  double c2 = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      c2 += b[i][i] * b[j][j] - b[i][j] * b[j][i];
    }
  }
  double c3 = 0.0;
  for (int skip = 0; skip < 4; ++skip) {
    int idx[3], n = 0;
    for (int i = 0; i < 4; ++i)
      if (i != skip) idx[n++] = i;
    const auto& m = b;
    double det =
        m[idx[0]][idx[0]] * (m[idx[1]][idx[1]] * m[idx[2]][idx[2]] -
                             m[idx[1]][idx[2]] * m[idx[2]][idx[1]]) -
        m[idx[0]][idx[1]] * (m[idx[1]][idx[0]] * m[idx[2]][idx[2]] -
                             m[idx[1]][idx[2]] * m[idx[2]][idx[0]]) +
        m[idx[0]][idx[2]] * (m[idx[1]][idx[0]] * m[idx[2]][idx[1]] -
                             m[idx[1]][idx[1]] * m[idx[2]][idx[0]]);
    c3 += det;
  }

  auto roots = solve_cubic(-c1, c2, -c3);
  std::array<std::complex<double>, 4> out{0.0, roots[0] * scale,
                                          roots[1] * scale, roots[2] * scale};
  std::sort(out.begin(), out.end(),
            [](const std::complex<double>& x, const std::complex<double>& y) {
              if (x.real() != y.real()) return x.real() > y.real();
              return x.imag() > y.imag();
            });
  return out;
}

std::array<double, 4> joint_dwell_times(const Generator4& gen) {
  std::array<double, 4> dwell{};
  for (int i = 0; i < 4; ++i) {
    require(gen.q[i][i] != 0.0, "generator has a zero diagonal entry");
    dwell[i] = -1.0 / gen.q[i][i];
  }
  return dwell;
}

double correlation_from_distribution(const std::array<double, 4>& p) {
  // +-1 encoding: E[s1 s2] - E[s1] E[s2] over the marginals.
  double e12 = p[0] + p[3] - p[1] - p[2];
  double m1 = p[2] + p[3] - p[0] - p[1];
  double m2 = p[1] + p[3] - p[0] - p[2];
  double var1 = 1.0 - m1 * m1;
  double var2 = 1.0 - m2 * m2;
  if (var1 <= 0.0 || var2 <= 0.0) {
    throw UndefinedCorrelationError(
        "a marginal is deterministic; correlation undefined");
  }
  return (e12 - m1 * m2) / std::sqrt(var1 * var2);
}

double predict_correlation(const Generator4& gen) {
  return correlation_from_distribution(steady_state(gen));
}

}  // namespace smtj::markov
