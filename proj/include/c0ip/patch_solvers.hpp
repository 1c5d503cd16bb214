#pragma once

#include <c0ip/axis_matrices.hpp>
#include <c0ip/kronecker_operator.hpp>
#include <c0ip/mesh_hierarchy.hpp>
#include <c0ip/tensor_contraction.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace c0ip
{
  struct SymmetricEigenResult
  {
    Eigen::VectorXd values;  // ascending
    Eigen::MatrixXd vectors; // orthonormal columns
    unsigned        sweeps = 0;
  };

  /// Cyclic Jacobi rotation method for a small dense symmetric matrix.
  inline SymmetricEigenResult
  jacobi_eigen_symmetric(Eigen::MatrixXd A, double tolerance = 1e-15,
                         unsigned max_sweeps = 100)
  {
    const Eigen::Index n = A.rows();
    if (A.cols() != n)
      throw std::invalid_argument("jacobi_eigen_symmetric: matrix must be square");
    Eigen::MatrixXd V     = Eigen::MatrixXd::Identity(n, n);
    const double    scale = std::max(A.norm(), std::numeric_limits<double>::min());

    unsigned sweep = 0;
    for (; sweep < max_sweeps; ++sweep)
      {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
          for (Eigen::Index q = p + 1; q < n; ++q)
            off += A(p, q) * A(p, q);
        if (std::sqrt(2.0 * off) <= tolerance * scale)
          break;

        for (Eigen::Index p = 0; p < n; ++p)
          for (Eigen::Index q = p + 1; q < n; ++q)
            {
              const double apq = A(p, q);
              if (std::abs(apq) <= std::numeric_limits<double>::min())
                continue;
              const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
              const double t     = (theta >= 0 ? 1.0 : -1.0) /
                               (std::abs(theta) + std::sqrt(theta * theta + 1.0));
              const double c = 1.0 / std::sqrt(t * t + 1.0);
              const double s = t * c;
              for (Eigen::Index r = 0; r < n; ++r)
                {
                  const double arp = A(r, p), arq = A(r, q);
                  A(r, p)          = c * arp - s * arq;
                  A(r, q)          = s * arp + c * arq;
                }
              for (Eigen::Index r = 0; r < n; ++r)
                {
                  const double apr = A(p, r), aqr = A(q, r);
                  A(p, r)          = c * apr - s * aqr;
                  A(q, r)          = s * apr + c * aqr;
                }
              for (Eigen::Index r = 0; r < n; ++r)
                {
                  const double vrp = V(r, p), vrq = V(r, q);
                  V(r, p)          = c * vrp - s * vrq;
                  V(r, q)          = s * vrp + c * vrq;
                }
            }
      }
    if (sweep == max_sweeps)
      throw std::runtime_error("jacobi_eigen_symmetric: no convergence");

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return A(a, a) < A(b, b); });
    SymmetricEigenResult result;
    result.values.resize(n);
    result.vectors.resize(n, n);
    result.sweeps = sweep;
    for (Eigen::Index i = 0; i < n; ++i)
      {
        result.values(i)     = A(order[i], order[i]);
        result.vectors.col(i) = V.col(order[i]);
      }
    return result;
  }

  /// Generalized eigenpairs of (B, M): Q^T M Q = I, Q^T B Q = diag(lambda).
  struct GeneralizedEigenResult
  {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
  };

  inline GeneralizedEigenResult
  generalized_eigen(const Eigen::MatrixXd &B, const Eigen::MatrixXd &M)
  {
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("generalized_eigen: mass matrix is not positive definite");
    const Eigen::MatrixXd C = llt.matrixL();
    // S = C^{-1} B C^{-T}
    Eigen::MatrixXd S = C.triangularView<Eigen::Lower>().solve(B);
    S                 = C.triangularView<Eigen::Lower>().solve(S.transpose()).transpose();
    S                 = 0.5 * (S + S.transpose()).eval();

    const auto             eig = jacobi_eigen_symmetric(S);
    GeneralizedEigenResult result;
    result.values  = eig.values;
    result.vectors = C.transpose().triangularView<Eigen::Upper>().solve(eig.vectors);
    // Normalize in the M inner product and fix the sign: the entry of
    // largest magnitude is positive.
    for (Eigen::Index j = 0; j < result.vectors.cols(); ++j)
      {
        auto         q    = result.vectors.col(j);
        const double norm = std::sqrt(q.dot(M * q));
        q /= norm;
        Eigen::Index imax;
        q.cwiseAbs().maxCoeff(&imax);
        if (q(imax) < 0)
          q = -q;
      }
    return result;
  }

  /**
   * Fast diagonalization of the separable patch operator
   * sum_d B_d (x) prod_{e != d} M_e. The inverse is applied as
   * (x Q_d) diag(lambda_1 + ... + lambda_d)^{-1} (x Q_d^T).
   */
  template <typename Number>
  class FdmDecomposition
  {
  public:
    FdmDecomposition() = default;

    std::vector<Eigen::MatrixXd> Q;      // double-precision eigenvectors per axis
    std::vector<Eigen::VectorXd> lambda; // eigenvalues per axis

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

    /// Workspace entries needed by apply_inverse.
    std::size_t
    workspace_size() const
    {
      return 2 * size();
    }

    void
    apply_inverse(std::span<const Number> r, std::span<Number> u,
                  std::span<Number> workspace) const
    {
      const std::size_t n = size();
      if (r.size() != n || u.size() != n || workspace.size() < 2 * n)
        throw std::invalid_argument("FdmDecomposition: size mismatch");
      Number *a = workspace.data();
      Number *b = workspace.data() + n;

      // (x Q^T) r
      const Number *src = r.data();
      for (unsigned d = 0; d < shape_.dim; ++d)
        {
          Number *dst = (d % 2 == 0) ? a : b;
          apply_along_axis(Qt_[d], d, shape_, src, dst);
          src = dst;
        }
      Number *t = const_cast<Number *>(src);
      for (std::size_t i = 0; i < n; ++i)
        t[i] *= inverse_sum_[i];
      for (unsigned d = 0; d < shape_.dim; ++d)
        {
          Number *dst = (d + 1 == shape_.dim) ? u.data() : (t == a ? b : a);
          apply_along_axis(Qn_[d], d, shape_, t, dst);
          t = dst;
        }
    }

    std::vector<Number>
    apply_inverse(std::span<const Number> r) const
    {
      std::vector<Number> u(size()), work(workspace_size());
      apply_inverse(r, u, work);
      return u;
    }

    /// Multiply-adds of one apply_inverse.
    std::size_t
    flop_count() const
    {
      std::size_t flops = size();
      for (unsigned d = 0; d < shape_.dim; ++d)
        flops += contraction_flops(Qt_[d], d, shape_) + contraction_flops(Qn_[d], d, shape_);
      return flops;
    }

    template <typename Other>
    FdmDecomposition<Other>
    cast() const
    {
      FdmDecomposition<Other> out;
      out.Q      = Q;
      out.lambda = lambda;
      out.finalize();
      return out;
    }

    /// Builds the working-precision tensors from Q and lambda.
    void
    finalize()
    {
      const unsigned dim = static_cast<unsigned>(Q.size());
      shape_.dim         = dim;
      Qn_.clear();
      Qt_.clear();
      for (unsigned d = 0; d < dim; ++d)
        {
          shape_.extent[d] = Q[d].rows();
          Qn_.push_back(BandedMatrix<Number>::from_dense(Q[d]));
          Qt_.push_back(BandedMatrix<Number>::from_dense(Q[d].transpose()));
        }
      inverse_sum_.resize(shape_.size());
      for (std::size_t i = 0; i < inverse_sum_.size(); ++i)
        {
          std::size_t r   = i;
          double      sum = 0.0;
          for (unsigned d = 0; d < dim; ++d)
            {
              sum += lambda[d](r % shape_.extent[d]);
              r /= shape_.extent[d];
            }
          if (!(sum > 0.0))
            throw CoercivityError("FdmDecomposition: nonpositive eigenvalue sum");
          inverse_sum_[i] = static_cast<Number>(1.0 / sum);
        }
    }

  private:
    TensorShape                       shape_;
    std::vector<BandedMatrix<Number>> Qn_, Qt_;
    std::vector<Number>               inverse_sum_;
  };

  template <typename Number = double>
  FdmDecomposition<Number>
  build_fdm(const std::vector<PatchAxisMatrices<double>> &local)
  {
    FdmDecomposition<Number> fdm;
    for (const auto &a : local)
      {
        const auto eig = generalized_eigen(a.B.to_dense(), a.M.to_dense());
        if (!(eig.values.minCoeff() > 0.0))
          throw CoercivityError("build_fdm: nonpositive generalized eigenvalue " +
                                std::to_string(eig.values.minCoeff()) +
                                "; the interior penalty is too small");
        fdm.Q.push_back(eig.vectors);
        fdm.lambda.push_back(eig.values);
      }
    fdm.finalize();
    return fdm;
  }

  /// Dense Cholesky-based solver for the exact restriction A_v.
  template <typename Number>
  class ExactPatchSolver
  {
  public:
    ExactPatchSolver() = default;

    explicit ExactPatchSolver(Eigen::MatrixXd patch_matrix)
      : matrix_(std::move(patch_matrix))
    {
      Eigen::LLT<Eigen::MatrixXd> llt(matrix_);
      if (llt.info() != Eigen::Success)
        throw CoercivityError(
          "ExactPatchSolver: patch matrix is not positive definite; the interior penalty "
          "is too small");
      inverse_dense_ = llt.solve(Eigen::MatrixXd::Identity(matrix_.rows(), matrix_.cols()));
      inverse_       = BandedMatrix<Number>::from_dense(inverse_dense_);
    }

    const Eigen::MatrixXd &
    matrix() const
    {
      return matrix_;
    }

    std::size_t
    size() const
    {
      return matrix_.rows();
    }

    void
    apply_inverse(std::span<const Number> r, std::span<Number> u) const
    {
      inverse_.vmult(r.data(), u.data());
    }

    template <typename Other>
    ExactPatchSolver<Other>
    cast() const
    {
      ExactPatchSolver<Other> out;
      out.matrix_        = matrix_;
      out.inverse_dense_ = inverse_dense_;
      out.inverse_       = BandedMatrix<Other>::from_dense(inverse_dense_);
      return out;
    }

  private:
    template <typename>
    friend class ExactPatchSolver;

    Eigen::MatrixXd      matrix_;
    Eigen::MatrixXd      inverse_dense_;
    BandedMatrix<Number> inverse_;
  };

  template <typename Number = double>
  ExactPatchSolver<Number>
  build_exact(const std::vector<PatchAxisMatrices<double>> &local)
  {
    return ExactPatchSolver<Number>(make_patch_operator(local, false).materialize());
  }

  enum class LocalSolverKind
  {
    exact,
    fdm
  };

  /**
   * Local solvers of all patches of a level. On the uniform mesh the patch
   * operator depends only on whether the patch touches the boundary along
   * each axis, so one solver per such kind is stored.
   */
  template <typename Number>
  class PatchSolverBank
  {
  public:
    PatchSolverBank() = default;

    PatchSolverBank(const MeshHierarchy &hier, unsigned level,
                    const Axis1DMatrices<double> &ax, LocalSolverKind kind)
      : dim_(hier.dim())
      , last_vertex_(static_cast<unsigned>(hier.vertices_per_axis(level)))
      , patch_size_(hier.patch_size())
      , level_(level)
      , kind_(kind)
    {
      for (const auto &p : interior_patches(hier, level))
        {
          const unsigned key = hier.patch_kind(p);
          if (slot_.count(key))
            continue;
          std::vector<PatchAxisMatrices<double>> local;
          for (unsigned d = 0; d < hier.dim(); ++d)
            local.push_back(patch_axis_matrices(ax, hier, p, d));
          slot_[key] = kind == LocalSolverKind::exact ? exact_.size() : fdm_.size();
          if (kind == LocalSolverKind::exact)
            exact_.push_back(build_exact<Number>(local));
          else
            fdm_.push_back(build_fdm<Number>(local));
        }
      build_lookup();
    }

    LocalSolverKind
    kind() const
    {
      return kind_;
    }

    std::size_t
    n_distinct_solvers() const
    {
      return kind_ == LocalSolverKind::exact ? exact_.size() : fdm_.size();
    }

    std::size_t
    workspace_size() const
    {
      return 2 * patch_size_;
    }

    /// u = A_v^{-1} r (exact) or the separable approximation's inverse.
    void
    solve(const VertexPatch &p, std::span<const Number> r, std::span<Number> u,
          std::span<Number> workspace) const
    {
      const std::size_t s = lookup_[patch_kind(p)];
      if (kind_ == LocalSolverKind::exact)
        exact_[s].apply_inverse(r, u);
      else
        fdm_[s].apply_inverse(r, u, workspace);
    }

    const ExactPatchSolver<Number> &
    exact_solver(const VertexPatch &p) const
    {
      return exact_.at(lookup_[patch_kind(p)]);
    }

    const FdmDecomposition<Number> &
    fdm_solver(const VertexPatch &p) const
    {
      return fdm_.at(lookup_[patch_kind(p)]);
    }

    template <typename Other>
    PatchSolverBank<Other>
    cast() const
    {
      PatchSolverBank<Other> out;
      out.dim_         = dim_;
      out.last_vertex_ = last_vertex_;
      out.patch_size_  = patch_size_;
      out.level_       = level_;
      out.kind_  = kind_;
      out.slot_  = slot_;
      for (const auto &e : exact_)
        out.exact_.push_back(e.template cast<Other>());
      for (const auto &f : fdm_)
        out.fdm_.push_back(f.template cast<Other>());
      out.build_lookup();
      return out;
    }

  private:
    template <typename>
    friend class PatchSolverBank;

    void
    build_lookup()
    {
      lookup_.assign(dim_ == 2 ? 16 : 64, 0);
      for (const auto &[key, s] : slot_)
        lookup_[key] = s;
    }

    unsigned
    patch_kind(const VertexPatch &p) const
    {
      unsigned key = 0;
      for (unsigned d = dim_; d-- > 0;)
        key = 4 * key + (p.vertex[d] == 1 ? 1u : 0u) + (p.vertex[d] == last_vertex_ ? 2u : 0u);
      return key;
    }

    unsigned                              dim_         = 2;
    unsigned                              last_vertex_ = 1;
    std::size_t                           patch_size_  = 0;
    unsigned                              level_       = 0;
    LocalSolverKind                       kind_  = LocalSolverKind::exact;
    std::map<unsigned, std::size_t>       slot_;
    std::vector<std::size_t>              lookup_;
    std::vector<ExactPatchSolver<Number>> exact_;
    std::vector<FdmDecomposition<Number>> fdm_;
  };
} // namespace c0ip
