#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace c0ip
{
  /// y = Op(x)
  using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

  /// Norm monitored by the stopping test: ||b - A x|| or ||P (b - A x)||.
  enum class ResidualMeasure
  {
    unpreconditioned,
    preconditioned
  };

  struct SolveReport
  {
    unsigned            iterations = 0;
    std::vector<double> residual_history; // ||r_0|| .. ||r_n|| in the monitored norm
    double              fractional = 0.0;
    bool                converged  = false;
    double              wall_time  = 0.0;
    ResidualMeasure     measure    = ResidualMeasure::unpreconditioned;
    /// Monitored norm of b - A x recomputed after the iteration stopped,
    /// relative to the initial one.
    double true_relative_residual = 0.0;

    double
    relative_residual() const
    {
      if (residual_history.empty() || residual_history.front() == 0.0)
        return 0.0;
      return residual_history.back() / residual_history.front();
    }
  };

  /// nu = -8 / log10(rbar), rbar = (||r_n|| / ||r_0||)^(1/n); 0 when r_n = 0.
  inline double
  fractional_iterations(unsigned n, double r0, double rn)
  {
    if (n == 0)
      throw std::invalid_argument("fractional_iterations: at least one iteration required");
    if (!(r0 > 0.0))
      throw std::invalid_argument("fractional_iterations: initial residual must be positive");
    if (rn == 0.0)
      return 0.0;
    const double log_rbar = std::log10(rn / r0) / n;
    return -8.0 / log_rbar;
  }

  inline double
  fractional_iterations(const SolveReport &report)
  {
    return fractional_iterations(report.iterations, report.residual_history.front(),
                                 report.residual_history.back());
  }

  namespace internal
  {
    inline double
    dot(std::span<const double> a, std::span<const double> b)
    {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
      return s;
    }

    inline double
    norm(std::span<const double> a)
    {
      return std::sqrt(dot(a, a));
    }

    inline void
    finish(SolveReport &report, const LinearMap &A, const LinearMap &P,
           std::span<const double> b, std::span<const double> x,
           std::chrono::steady_clock::time_point start)
    {
      std::vector<double> r(b.size());
      A(x, r);
      for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = b[i] - r[i];
      if (report.measure == ResidualMeasure::preconditioned)
        {
          std::vector<double> z(r.size());
          P(r, z);
          r.swap(z);
        }
      const double r0 = report.residual_history.front();
      report.true_relative_residual = r0 > 0.0 ? norm(r) / r0 : 0.0;
      if (report.iterations > 0 && r0 > 0.0)
        report.fractional = fractional_iterations(report);
      report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  } // namespace internal

  /**
   * Preconditioned conjugate gradients for A x = b starting from the given
   * x. Stops when the monitored residual norm dropped by @p tol; hitting
   * max_iter gives a non-converged report.
   */
  inline SolveReport
  cg(const LinearMap &A, const LinearMap &P, std::span<const double> b, std::span<double> x,
     double tol = 1e-8, unsigned max_iter = 500,
     ResidualMeasure measure = ResidualMeasure::unpreconditioned)
  {
    using internal::dot;
    using internal::norm;
    const auto        start = std::chrono::steady_clock::now();
    const std::size_t n     = b.size();
    SolveReport       report;
    report.measure          = measure;
    const bool precond      = measure == ResidualMeasure::preconditioned;

    std::vector<double> r(n), z(n), p(n), q(n);
    A(x, q);
    for (std::size_t i = 0; i < n; ++i)
      r[i] = b[i] - q[i];
    P(r, z);
    const double r0 = precond ? norm(z) : norm(r);
    report.residual_history.push_back(r0);
    if (r0 == 0.0)
      {
        report.converged = true;
        internal::finish(report, A, P, b, x, start);
        return report;
      }

    p          = z;
    double rho = dot(r, z);
    while (report.iterations < max_iter)
      {
        A(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0))
          break;
        const double alpha = rho / pq;
        for (std::size_t i = 0; i < n; ++i)
          {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
          }
        ++report.iterations;
        P(r, z);
        const double rn = precond ? norm(z) : norm(r);
        report.residual_history.push_back(rn);
        if (rn <= tol * r0)
          {
            report.converged = true;
            break;
          }
        const double rho_new = dot(r, z);
        const double beta    = rho_new / rho;
        rho                  = rho_new;
        for (std::size_t i = 0; i < n; ++i)
          p[i] = z[i] + beta * p[i];
      }
    internal::finish(report, A, P, b, x, start);
    return report;
  }

  /**
   * Unrestarted GMRES with modified Gram-Schmidt and Givens rotations.
   * Monitoring the unpreconditioned residual uses right preconditioning
   * (the preconditioned directions are stored, so the update needs no
   * extra preconditioner application); monitoring the preconditioned
   * residual uses left preconditioning.
   */
  inline SolveReport
  gmres(const LinearMap &A, const LinearMap &P, std::span<const double> b, std::span<double> x,
        double tol = 1e-8, unsigned max_iter = 200,
        ResidualMeasure measure = ResidualMeasure::unpreconditioned)
  {
    using internal::dot;
    using internal::norm;
    const auto        start = std::chrono::steady_clock::now();
    const std::size_t n     = b.size();
    SolveReport       report;
    report.measure          = measure;
    const bool left         = measure == ResidualMeasure::preconditioned;

    std::vector<double> w(n), t(n);
    A(x, w);
    std::vector<std::vector<double>> V, Z;
    V.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i)
      t[i] = b[i] - w[i];
    if (left)
      P(t, V[0]);
    else
      V[0] = t;
    const double beta = norm(V[0]);
    report.residual_history.push_back(beta);
    if (beta == 0.0)
      {
        report.converged = true;
        internal::finish(report, A, P, b, x, start);
        return report;
      }
    for (auto &v : V[0])
      v /= beta;

    std::vector<std::vector<double>> H; // column j has j + 2 entries
    std::vector<double>              cs, sn, g{beta};
    while (report.iterations < max_iter)
      {
        const unsigned j = report.iterations;
        if (left)
          {
            A(V[j], t);
            P(t, w);
          }
        else
          {
            Z.emplace_back(n);
            P(V[j], Z[j]);
            A(Z[j], w);
          }
        std::vector<double> h(j + 2, 0.0);
        for (unsigned i = 0; i <= j; ++i)
          {
            h[i] = dot(w, V[i]);
            for (std::size_t s = 0; s < n; ++s)
              w[s] -= h[i] * V[i][s];
          }
        h[j + 1] = norm(w);
        for (unsigned i = 0; i < j; ++i)
          {
            const double a = h[i], c = h[i + 1];
            h[i]               = cs[i] * a + sn[i] * c;
            h[i + 1]           = -sn[i] * a + cs[i] * c;
          }
        const double denom = std::hypot(h[j], h[j + 1]);
        cs.push_back(denom == 0.0 ? 1.0 : h[j] / denom);
        sn.push_back(denom == 0.0 ? 0.0 : h[j + 1] / denom);
        const double hj1 = h[j + 1];
        h[j]             = cs[j] * h[j] + sn[j] * hj1;
        h[j + 1]         = 0.0;
        g.push_back(-sn[j] * g[j]);
        g[j] = cs[j] * g[j];
        H.push_back(std::move(h));

        ++report.iterations;
        const double rn = std::abs(g[j + 1]);
        report.residual_history.push_back(rn);
        if (rn <= tol * beta || hj1 == 0.0)
          {
            report.converged = rn <= tol * beta;
            break;
          }
        V.emplace_back(n);
        for (std::size_t s = 0; s < n; ++s)
          V[j + 1][s] = w[s] / hj1;
      }

    const unsigned      m = report.iterations;
    std::vector<double> y(m);
    for (unsigned i = m; i-- > 0;)
      {
        double s = g[i];
        for (unsigned l = i + 1; l < m; ++l)
          s -= H[l][i] * y[l];
        y[i] = s / H[i][i];
      }
    const auto &directions = left ? V : Z;
    for (unsigned i = 0; i < m; ++i)
      for (std::size_t s = 0; s < n; ++s)
        x[s] += y[i] * directions[i][s];

    internal::finish(report, A, P, b, x, start);
    return report;
  }

  enum class Precision
  {
    double_precision,
    mixed
  };

  /**
   * Wraps a preconditioner working in Low precision as a double map: the
   * residual is rounded once on entry and the correction widened once on
   * exit.
   */
  template <typename Low, typename Preconditioner>
  LinearMap
  mixed_precision_preconditioner(const Preconditioner &P)
  {
    auto r_low = std::make_shared<std::vector<Low>>();
    auto y_low = std::make_shared<std::vector<Low>>();
    return [&P, r_low, y_low](std::span<const double> r, std::span<double> y) {
      r_low->resize(r.size());
      y_low->resize(r.size());
      for (std::size_t i = 0; i < r.size(); ++i)
        (*r_low)[i] = static_cast<Low>(r[i]);
      P.vmult(std::span<const Low>(*r_low), std::span<Low>(*y_low));
      for (std::size_t i = 0; i < r.size(); ++i)
        y[i] = static_cast<double>((*y_low)[i]);
    };
  }
} // namespace c0ip
