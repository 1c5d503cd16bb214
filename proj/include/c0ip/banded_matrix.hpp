#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace c0ip
{
  /**
   * Matrix whose nonzeros in every row lie in one contiguous column window
   * of fixed width. Covers banded 1D finite element matrices, the
   * rectangular 1D embedding between levels, and (with full width) the
   * small dense patch matrices.
   */
  template <typename Number>
  class BandedMatrix
  {
  public:
    using value_type = Number;

    BandedMatrix() = default;

    BandedMatrix(std::size_t rows, std::size_t cols, std::size_t width,
                 std::vector<std::size_t> first_column)
      : rows_(rows)
      , cols_(cols)
      , width_(width)
      , first_(std::move(first_column))
      , data_(rows * width, Number(0))
    {
      if (first_.size() != rows)
        throw std::invalid_argument("BandedMatrix: one window start per row required");
      for (const auto f : first_)
        if (f + width > cols)
          throw std::invalid_argument("BandedMatrix: row window exceeds column count");
    }

    /// Square matrix with half-bandwidth @p bandwidth.
    static BandedMatrix
    banded(std::size_t n, std::size_t bandwidth)
    {
      const std::size_t        width = std::min(n, 2 * bandwidth + 1);
      std::vector<std::size_t> first(n);
      for (std::size_t i = 0; i < n; ++i)
        first[i] = std::min(i > bandwidth ? i - bandwidth : 0, n - width);
      return BandedMatrix(n, n, width, std::move(first));
    }

    static BandedMatrix
    dense(std::size_t rows, std::size_t cols)
    {
      return BandedMatrix(rows, cols, cols, std::vector<std::size_t>(rows, 0));
    }

    template <typename Derived>
    static BandedMatrix
    from_dense(const Eigen::MatrixBase<Derived> &m)
    {
      BandedMatrix result = dense(m.rows(), m.cols());
      for (std::size_t i = 0; i < result.rows_; ++i)
        for (std::size_t j = 0; j < result.cols_; ++j)
          result.data_[i * result.width_ + j] = static_cast<Number>(m(i, j));
      return result;
    }

    std::size_t
    rows() const
    {
      return rows_;
    }

    std::size_t
    cols() const
    {
      return cols_;
    }

    std::size_t
    width() const
    {
      return width_;
    }

    std::size_t
    first_column(std::size_t row) const
    {
      return first_[row];
    }

    const Number *
    row_data(std::size_t row) const
    {
      return data_.data() + row * width_;
    }

    bool
    in_window(std::size_t i, std::size_t j) const
    {
      return j >= first_[i] && j < first_[i] + width_;
    }

    Number
    operator()(std::size_t i, std::size_t j) const
    {
      assert(i < rows_ && j < cols_);
      return in_window(i, j) ? data_[i * width_ + j - first_[i]] : Number(0);
    }

    Number &
    entry(std::size_t i, std::size_t j)
    {
      if (!in_window(i, j))
        throw std::out_of_range("BandedMatrix: entry outside of row window");
      return data_[i * width_ + j - first_[i]];
    }

    void
    add(std::size_t i, std::size_t j, Number v)
    {
      entry(i, j) += v;
    }

    /// Square submatrix on the index range [start, start + size).
    BandedMatrix
    principal_submatrix(std::size_t start, std::size_t size) const
    {
      BandedMatrix sub = dense(size, size);
      for (std::size_t i = 0; i < size; ++i)
        for (std::size_t j = 0; j < size; ++j)
          sub.data_[i * size + j] = (*this)(start + i, start + j);
      return sub;
    }

    BandedMatrix
    transpose() const
    {
      std::vector<std::size_t> lo(cols_, cols_ == 0 ? 0 : rows_), hi(cols_, 0);
      for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t c = 0; c < width_; ++c)
          {
            const std::size_t j = first_[i] + c;
            lo[j]               = std::min(lo[j], i);
            hi[j]               = std::max(hi[j], i + 1);
          }
      std::size_t width = 1;
      for (std::size_t j = 0; j < cols_; ++j)
        {
          if (hi[j] <= lo[j])
            lo[j] = hi[j] = 0;
          width = std::max(width, hi[j] - lo[j]);
        }
      width = std::min(width, rows_);
      for (std::size_t j = 0; j < cols_; ++j)
        lo[j] = std::min(lo[j], rows_ - width);

      BandedMatrix t(cols_, rows_, width, lo);
      for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t c = 0; c < width_; ++c)
          {
            const Number v = data_[i * width_ + c];
            if (v != Number(0))
              t.entry(first_[i] + c, i) = v;
          }
      return t;
    }

    template <typename Other>
    BandedMatrix<Other>
    cast() const
    {
      BandedMatrix<Other> result(rows_, cols_, width_, first_);
      for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t c = 0; c < width_; ++c)
          result.entry(i, first_[i] + c) = static_cast<Other>(data_[i * width_ + c]);
      return result;
    }

    Eigen::MatrixXd
    to_dense() const
    {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows_, cols_);
      for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t c = 0; c < width_; ++c)
          m(i, first_[i] + c) = static_cast<double>(data_[i * width_ + c]);
      return m;
    }

    /// y = A x
    void
    vmult(const Number *x, Number *y) const
    {
      for (std::size_t i = 0; i < rows_; ++i)
        {
          const Number *a   = row_data(i);
          const Number *xi  = x + first_[i];
          Number        sum = 0;
          for (std::size_t c = 0; c < width_; ++c)
            sum += a[c] * xi[c];
          y[i] = sum;
        }
    }

  private:
    std::size_t              rows_  = 0;
    std::size_t              cols_  = 0;
    std::size_t              width_ = 0;
    std::vector<std::size_t> first_;
    std::vector<Number>      data_;
  };
} // namespace c0ip
