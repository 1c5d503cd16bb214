#pragma once

#include <c0ip/banded_matrix.hpp>

#include <array>
#include <cstddef>
#include <stdexcept>

namespace c0ip
{
  /// Extents of a d-dimensional coefficient tensor, axis 0 fastest.
  struct TensorShape
  {
    unsigned                     dim = 0;
    std::array<std::size_t, 3> extent{1, 1, 1};

    std::size_t
    size() const
    {
      std::size_t n = 1;
      for (unsigned d = 0; d < dim; ++d)
        n *= extent[d];
      return n;
    }

    static TensorShape
    cube(unsigned dim, std::size_t n)
    {
      TensorShape s;
      s.dim = dim;
      for (unsigned d = 0; d < dim; ++d)
        s.extent[d] = n;
      return s;
    }
  };

  /**
   * Contract a 1D matrix into one mode of a tensor:
   * y(.., i_a, ..) (+)= scale * sum_j F(i_a, j) x(.., j, ..).
   * The output has the input's shape with extent F.rows() along @p axis.
   */
  template <typename Number>
  void
  apply_along_axis(const BandedMatrix<Number> &F, unsigned axis, const TensorShape &shape,
                   const Number *x, Number *y, Number scale = Number(1),
                   bool accumulate = false)
  {
    if (axis >= shape.dim || F.cols() != shape.extent[axis])
      throw std::invalid_argument("apply_along_axis: matrix does not match tensor mode");

    std::size_t stride = 1, outer = 1;
    for (unsigned b = 0; b < axis; ++b)
      stride *= shape.extent[b];
    for (unsigned b = axis + 1; b < shape.dim; ++b)
      outer *= shape.extent[b];
    const std::size_t n_in  = F.cols();
    const std::size_t n_out = F.rows();
    const std::size_t width = F.width();

    for (std::size_t o = 0; o < outer; ++o)
      {
        const Number *xin  = x + o * n_in * stride;
        Number       *yout = y + o * n_out * stride;
        if (stride == 1)
          {
            for (std::size_t i = 0; i < n_out; ++i)
              {
                const Number *a   = F.row_data(i);
                const Number *xi  = xin + F.first_column(i);
                Number        sum = 0;
                for (std::size_t c = 0; c < width; ++c)
                  sum += a[c] * xi[c];
                yout[i] = accumulate ? yout[i] + scale * sum : scale * sum;
              }
            continue;
          }
        for (std::size_t i = 0; i < n_out; ++i)
          {
            Number *yrow = yout + i * stride;
            if (!accumulate)
              for (std::size_t s = 0; s < stride; ++s)
                yrow[s] = 0;
            const Number *a = F.row_data(i);
            const Number *xr0 = xin + F.first_column(i) * stride;
            for (std::size_t c = 0; c < width; ++c)
              {
                const Number coef = scale * a[c];
                if (coef == Number(0))
                  continue;
                const Number *xr = xr0 + c * stride;
                for (std::size_t s = 0; s < stride; ++s)
                  yrow[s] += coef * xr[s];
              }
          }
      }
  }

  /// Number of multiply-adds performed by apply_along_axis.
  template <typename Number>
  std::size_t
  contraction_flops(const BandedMatrix<Number> &F, unsigned axis, const TensorShape &shape)
  {
    return shape.size() / shape.extent[axis] * F.rows() * F.width();
  }
} // namespace c0ip
