#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace c0ip
{
  struct Quadrature1D
  {
    std::vector<double> points;  // on [0,1]
    std::vector<double> weights; // sum to 1
  };

  namespace internal
  {
    /// Legendre polynomial P_n and its derivative at t in [-1,1].
    inline void
    legendre(unsigned n, double t, double &p, double &dp)
    {
      double p0 = 1.0, p1 = t;
      if (n == 0)
        {
          p  = 1.0;
          dp = 0.0;
          return;
        }
      for (unsigned m = 2; m <= n; ++m)
        {
          const double p2 = ((2.0 * m - 1.0) * t * p1 - (m - 1.0) * p0) / m;
          p0              = p1;
          p1              = p2;
        }
      p  = p1;
      dp = n * (t * p1 - p0) / (t * t - 1.0);
    }
  } // namespace internal

  /// n-point Gauss-Legendre rule mapped to [0,1], exact up to degree 2n-1.
  inline Quadrature1D
  gauss_quadrature(unsigned n)
  {
    if (n == 0)
      throw std::invalid_argument("gauss_quadrature: need at least one point");
    Quadrature1D q;
    q.points.resize(n);
    q.weights.resize(n);
    const double pi = std::acos(-1.0);
    for (unsigned i = 0; i < n; ++i)
      {
        double t = -std::cos(pi * (i + 0.75) / (n + 0.5));
        double p, dp;
        for (int it = 0; it < 100; ++it)
          {
            internal::legendre(n, t, p, dp);
            const double dt = p / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16)
              break;
          }
        internal::legendre(n, t, p, dp);
        q.points[i]  = 0.5 * (t + 1.0);
        q.weights[i] = 1.0 / ((1.0 - t * t) * dp * dp);
      }
    return q;
  }

  /// The n+1 Gauss-Lobatto points on [0,1]: endpoints plus the roots of P_n'.
  inline std::vector<double>
  gauss_lobatto_points(unsigned n)
  {
    std::vector<double> x(n + 1);
    x.front()       = 0.0;
    x.back()        = 1.0;
    const double pi = std::acos(-1.0);
    for (unsigned i = 1; i < n; ++i)
      {
        double t = -std::cos(pi * i / n);
        // Newton on P_n'(t) = 0 using (1-t^2) P_n'' = 2t P_n' - n(n+1) P_n.
        for (int it = 0; it < 100; ++it)
          {
            double p, dp;
            internal::legendre(n, t, p, dp);
            const double ddp = (2.0 * t * dp - n * (n + 1.0) * p) / (1.0 - t * t);
            const double dt  = dp / ddp;
            t -= dt;
            if (std::abs(dt) < 1e-16)
              break;
          }
        x[i] = 0.5 * (t + 1.0);
      }
    return x;
  }

  /**
   * Degree-k Lagrange basis on the reference interval [0,1] with
   * Gauss-Lobatto support points, together with a Gauss rule of k+2 points
   * (exact for all products of basis functions and their derivatives).
   */
  class Basis1D
  {
  public:
    explicit Basis1D(unsigned degree)
      : degree_(degree)
    {
      if (degree < 2)
        throw std::invalid_argument("Basis1D: degree must be >= 2, got " +
                                    std::to_string(degree));
      support_ = gauss_lobatto_points(degree);
      quad_    = gauss_quadrature(degree + 2);
      denom_.resize(degree + 1);
      for (unsigned i = 0; i <= degree; ++i)
        {
          double d = 1.0;
          for (unsigned m = 0; m <= degree; ++m)
            if (m != i)
              d *= support_[i] - support_[m];
          denom_[i] = d;
        }
    }

    unsigned
    degree() const
    {
      return degree_;
    }

    unsigned
    size() const
    {
      return degree_ + 1;
    }

    const std::vector<double> &
    support_points() const
    {
      return support_;
    }

    const Quadrature1D &
    quadrature() const
    {
      return quad_;
    }

    double
    value(unsigned i, double x) const
    {
      double v = 1.0;
      for (unsigned m = 0; m <= degree_; ++m)
        if (m != i)
          v *= x - support_[m];
      return v / denom_[i];
    }

    double
    derivative(unsigned i, double x) const
    {
      double sum = 0.0;
      for (unsigned a = 0; a <= degree_; ++a)
        {
          if (a == i)
            continue;
          double prod = 1.0;
          for (unsigned m = 0; m <= degree_; ++m)
            if (m != i && m != a)
              prod *= x - support_[m];
          sum += prod;
        }
      return sum / denom_[i];
    }

    double
    second_derivative(unsigned i, double x) const
    {
      double sum = 0.0;
      for (unsigned a = 0; a <= degree_; ++a)
        for (unsigned b = 0; b <= degree_; ++b)
          {
            if (a == i || b == i || a == b)
              continue;
            double prod = 1.0;
            for (unsigned m = 0; m <= degree_; ++m)
              if (m != i && m != a && m != b)
                prod *= x - support_[m];
            sum += prod;
          }
      return sum / denom_[i];
    }

    /// Value (order 0), first (1) or second (2) derivative on [0,1].
    double
    evaluate(unsigned i, unsigned order, double x) const
    {
      switch (order)
        {
          case 0:
            return value(i, x);
          case 1:
            return derivative(i, x);
          default:
            return second_derivative(i, x);
        }
    }

  private:
    unsigned            degree_;
    std::vector<double> support_;
    std::vector<double> denom_;
    Quadrature1D        quad_;
  };

  inline Basis1D
  build_basis(unsigned degree)
  {
    return Basis1D(degree);
  }
} // namespace c0ip
