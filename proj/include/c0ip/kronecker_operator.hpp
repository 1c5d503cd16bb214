#pragma once

#include <c0ip/axis_matrices.hpp>
#include <c0ip/tensor_contraction.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace c0ip
{
  enum class Factor : unsigned
  {
    mass      = 0,
    stiffness = 1,
    bulk      = 2
  };

  /// coefficient * (factor along axis 0) x (factor along axis 1) x ...
  struct KroneckerTerm
  {
    double                coefficient = 1.0;
    std::array<Factor, 3> factors{Factor::mass, Factor::mass, Factor::mass};
  };

  /// The rank-3 (2D) or rank-6 (3D) term list of the C0IP operator.
  inline std::vector<KroneckerTerm>
  c0ip_terms(unsigned dim)
  {
    using F = Factor;
    if (dim == 2)
      return {{1.0, {F::bulk, F::mass, F::mass}},
              {2.0, {F::stiffness, F::stiffness, F::mass}},
              {1.0, {F::mass, F::bulk, F::mass}}};
    if (dim == 3)
      return {{1.0, {F::bulk, F::mass, F::mass}},
              {1.0, {F::mass, F::bulk, F::mass}},
              {1.0, {F::mass, F::mass, F::bulk}},
              {2.0, {F::stiffness, F::stiffness, F::mass}},
              {2.0, {F::mass, F::stiffness, F::stiffness}},
              {2.0, {F::stiffness, F::mass, F::stiffness}}};
    throw std::invalid_argument("c0ip_terms: dimension must be 2 or 3");
  }

  /// The separable approximation without mixed first-derivative terms.
  inline std::vector<KroneckerTerm>
  separable_terms(unsigned dim)
  {
    std::vector<KroneckerTerm> terms;
    for (const auto &t : c0ip_terms(dim))
      if (t.factors[0] == Factor::bulk || t.factors[1] == Factor::bulk ||
          (dim == 3 && t.factors[2] == Factor::bulk))
        terms.push_back(t);
    return terms;
  }

  template <typename Number>
  struct AxisFactors
  {
    BandedMatrix<Number> M, L, B;

    const BandedMatrix<Number> &
    operator[](Factor f) const
    {
      switch (f)
        {
          case Factor::mass:
            return M;
          case Factor::stiffness:
            return L;
          default:
            return B;
        }
    }
  };

  /**
   * Matrix-free operator sum_t c_t (F_t,0 x F_t,1 [x F_t,2]) acting on
   * lexicographic tensor coefficient vectors. Terms are grouped by their
   * factor in the slowest axis so shared partial contractions are
   * evaluated once.
   */
  template <typename Number>
  class KroneckerSumOperator
  {
  public:
    KroneckerSumOperator() = default;

    KroneckerSumOperator(std::vector<AxisFactors<Number>> axes,
                         std::vector<KroneckerTerm>       terms)
      : axes_(std::move(axes))
      , terms_(std::move(terms))
    {
      if (axes_.size() != 2 && axes_.size() != 3)
        throw std::invalid_argument("KroneckerSumOperator: dimension must be 2 or 3");
      shape_.dim = static_cast<unsigned>(axes_.size());
      for (unsigned d = 0; d < shape_.dim; ++d)
        {
          const std::size_t n = axes_[d].M.rows();
          if (axes_[d].L.rows() != n || axes_[d].B.rows() != n)
            throw std::invalid_argument("KroneckerSumOperator: inconsistent axis sizes");
          shape_.extent[d] = n;
        }
    }

    unsigned
    dim() const
    {
      return shape_.dim;
    }

    std::size_t
    size() const
    {
      return shape_.size();
    }

    const TensorShape &
    shape() const
    {
      return shape_;
    }

    const std::vector<KroneckerTerm> &
    terms() const
    {
      return terms_;
    }

    const AxisFactors<Number> &
    axis(unsigned d) const
    {
      return axes_[d];
    }

    /// y = A x
    void
    vmult(std::span<const Number> x, std::span<Number> y) const
    {
      if (x.size() != size() || y.size() != size())
        throw std::invalid_argument("KroneckerSumOperator: vector size mismatch");
      std::fill(y.begin(), y.end(), Number(0));
      std::vector<const KroneckerTerm *> all;
      for (const auto &t : terms_)
        all.push_back(&t);
      std::vector<std::unique_ptr<Number[]>> scratch(shape_.dim);
      accumulate(all, shape_.dim - 1, x.data(), y.data(), scratch);
    }

    /// Dense matrix with entries sum_t c_t prod_d F_t,d(i_d, j_d).
    Eigen::MatrixXd
    materialize() const
    {
      const std::size_t n = size();
      Eigen::MatrixXd   A = Eigen::MatrixXd::Zero(n, n);
      std::vector<Eigen::MatrixXd> dense_axes;
      for (unsigned d = 0; d < shape_.dim; ++d)
        for (Factor f : {Factor::mass, Factor::stiffness, Factor::bulk})
          dense_axes.push_back(axes_[d][f].to_dense());
      const auto factor = [&](unsigned d, Factor f) -> const Eigen::MatrixXd & {
        return dense_axes[3 * d + static_cast<unsigned>(f)];
      };
      for (const auto &t : terms_)
        {
          Eigen::MatrixXd K = factor(0, t.factors[0]);
          for (unsigned d = 1; d < shape_.dim; ++d)
            K = kronecker(factor(d, t.factors[d]), K);
          A += t.coefficient * K;
        }
      return A;
    }

    template <typename Other>
    KroneckerSumOperator<Other>
    cast() const
    {
      std::vector<AxisFactors<Other>> axes;
      for (const auto &a : axes_)
        axes.push_back({a.M.template cast<Other>(), a.L.template cast<Other>(),
                        a.B.template cast<Other>()});
      return KroneckerSumOperator<Other>(std::move(axes), terms_);
    }

    /// Multiply-adds of one vmult, for complexity checks.
    std::size_t
    flop_count() const
    {
      std::size_t                        flops = 0;
      std::vector<const KroneckerTerm *> all;
      for (const auto &t : terms_)
        all.push_back(&t);
      count(all, shape_.dim - 1, flops);
      return flops;
    }

  private:
    /// (A (x) B)(i_slow, i_fast) with B acting on the fast index.
    static Eigen::MatrixXd
    kronecker(const Eigen::MatrixXd &slow, const Eigen::MatrixXd &fast)
    {
      Eigen::MatrixXd K(slow.rows() * fast.rows(), slow.cols() * fast.cols());
      for (Eigen::Index i = 0; i < slow.rows(); ++i)
        for (Eigen::Index j = 0; j < slow.cols(); ++j)
          K.block(i * fast.rows(), j * fast.cols(), fast.rows(), fast.cols()) =
            slow(i, j) * fast;
      return K;
    }

    void
    accumulate(const std::vector<const KroneckerTerm *> &terms, unsigned axis,
               const Number *x, Number *y,
               std::vector<std::unique_ptr<Number[]>> &scratch) const
    {
      if (axis == 0)
        {
          for (const auto *t : terms)
            apply_along_axis(axes_[0][t->factors[0]], 0, shape_, x, y,
                             static_cast<Number>(t->coefficient), true);
          return;
        }
      if (!scratch[axis])
        scratch[axis].reset(new Number[size()]);
      Number *tmp = scratch[axis].get();
      for (Factor f : {Factor::mass, Factor::stiffness, Factor::bulk})
        {
          std::vector<const KroneckerTerm *> group;
          for (const auto *t : terms)
            if (t->factors[axis] == f)
              group.push_back(t);
          if (group.empty())
            continue;
          apply_along_axis(axes_[axis][f], axis, shape_, x, tmp);
          accumulate(group, axis - 1, tmp, y, scratch);
        }
    }

    void
    count(const std::vector<const KroneckerTerm *> &terms, unsigned axis,
          std::size_t &flops) const
    {
      if (axis == 0)
        {
          for (const auto *t : terms)
            flops += contraction_flops(axes_[0][t->factors[0]], 0, shape_);
          return;
        }
      for (Factor f : {Factor::mass, Factor::stiffness, Factor::bulk})
        {
          std::vector<const KroneckerTerm *> group;
          for (const auto *t : terms)
            if (t->factors[axis] == f)
              group.push_back(t);
          if (group.empty())
            continue;
          flops += contraction_flops(axes_[axis][f], axis, shape_);
          count(group, axis - 1, flops);
        }
    }

    std::vector<AxisFactors<Number>> axes_;
    std::vector<KroneckerTerm>       terms_;
    TensorShape                      shape_;
  };

  /// Global level operator A_l: the same 1D matrices on every axis.
  template <typename Number>
  KroneckerSumOperator<Number>
  make_c0ip_operator(const Axis1DMatrices<Number> &ax, unsigned dim)
  {
    std::vector<AxisFactors<Number>> axes(dim, AxisFactors<Number>{ax.M, ax.L, ax.B});
    return KroneckerSumOperator<Number>(std::move(axes), c0ip_terms(dim));
  }

  /// Patch operator from per-axis local matrices; @p separable drops the
  /// mixed stiffness terms.
  template <typename Number>
  KroneckerSumOperator<Number>
  make_patch_operator(const std::vector<PatchAxisMatrices<Number>> &local, bool separable)
  {
    std::vector<AxisFactors<Number>> axes;
    for (const auto &a : local)
      axes.push_back({a.M, a.L, a.B});
    const unsigned dim = static_cast<unsigned>(local.size());
    return KroneckerSumOperator<Number>(std::move(axes),
                                        separable ? separable_terms(dim) : c0ip_terms(dim));
  }
} // namespace c0ip
