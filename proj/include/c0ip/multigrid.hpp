#pragma once

#include <c0ip/axis_matrices.hpp>
#include <c0ip/basis_1d.hpp>
#include <c0ip/kronecker_operator.hpp>
#include <c0ip/mesh_hierarchy.hpp>
#include <c0ip/patch_solvers.hpp>
#include <c0ip/smoothers.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace c0ip
{
  /// 1D embedding of continuous Q_k on n_coarse cells into the uniformly
  /// refined mesh, boundary nodes included: E(j, i) = phi_i^coarse(x_j^fine).
  inline BandedMatrix<double>
  full_embedding_1d(std::size_t n_coarse, const Basis1D &basis)
  {
    const unsigned    k      = basis.degree();
    const std::size_t n_fine = 2 * n_coarse;
    const std::size_t rows   = k * n_fine + 1;
    const std::size_t cols   = k * n_coarse + 1;
    const auto       &nodes  = basis.support_points();

    std::vector<std::size_t> first(rows);
    for (std::size_t j = 0; j < rows; ++j)
      first[j] = std::min<std::size_t>(std::min(j / k, n_fine - 1) / 2 * k, cols - (k + 1));
    BandedMatrix<double> E(rows, cols, k + 1, std::move(first));

    for (std::size_t j = 0; j < rows; ++j)
      {
        const std::size_t fine_cell = std::min(j / k, n_fine - 1);
        const double      t         = j == rows - 1 ? 1.0 : nodes[j - fine_cell * k];
        const std::size_t c         = fine_cell / 2;
        const double      s         = 0.5 * (static_cast<double>(fine_cell % 2) + t);
        for (unsigned i = 0; i <= k; ++i)
          {
            double v = basis.value(i, s);
            if (std::abs(v) < 1e-15)
              v = 0.0;
            E.entry(j, c * k + i) = v;
          }
      }
    return E;
  }

  /// Embedding restricted to the interior (clamped) DoFs: boundary
  /// coarse values are zero, fine boundary rows are dropped.
  inline BandedMatrix<double>
  interior_embedding_1d(std::size_t n_coarse, const Basis1D &basis)
  {
    const auto        full  = full_embedding_1d(n_coarse, basis);
    const std::size_t rows  = full.rows() - 2;
    const std::size_t cols  = full.cols() - 2;
    const std::size_t width = std::min<std::size_t>(basis.degree() + 1, cols);

    std::vector<std::size_t> first(rows);
    for (std::size_t j = 0; j < rows; ++j)
      {
        const std::size_t f = full.first_column(j + 1);
        first[j]            = std::min(f > 0 ? f - 1 : 0, cols - width);
      }
    BandedMatrix<double> E(rows, cols, width, std::move(first));
    for (std::size_t j = 0; j < rows; ++j)
      for (std::size_t c = 0; c < full.width(); ++c)
        {
          const std::size_t col = full.first_column(j + 1) + c;
          if (col == 0 || col == full.cols() - 1)
            continue;
          const double v = full.row_data(j + 1)[c];
          if (v != 0.0)
            E.entry(j, col - 1) = v;
        }
    return E;
  }

  /**
   * Prolongation (tensor product of the 1D embedding) and its transpose
   * between consecutive levels.
   */
  template <typename Number>
  class TransferOperators
  {
  public:
    TransferOperators() = default;

    TransferOperators(const MeshHierarchy &hier, const Basis1D &basis)
      : dim_(hier.dim())
    {
      embed_.resize(hier.n_levels());
      embed_t_.resize(hier.n_levels());
      for (unsigned l = 1; l < hier.n_levels(); ++l)
        {
          const auto E = interior_embedding_1d(hier.cells_per_dim(l - 1), basis);
          embed_[l]    = E.template cast<Number>();
          embed_t_[l]  = E.transpose().template cast<Number>();
        }
    }

    unsigned
    n_levels() const
    {
      return static_cast<unsigned>(embed_.size());
    }

    /// 1D embedding from level - 1 into level.
    const BandedMatrix<Number> &
    embedding(unsigned level) const
    {
      check(level);
      return embed_[level];
    }

    /// fine = (E x ... x E) coarse
    void
    prolongate(unsigned level, std::span<const Number> coarse, std::span<Number> fine) const
    {
      check(level);
      apply(embed_[level], coarse, fine);
    }

    /// coarse = (E^T x ... x E^T) fine
    void
    restrict(unsigned level, std::span<const Number> fine, std::span<Number> coarse) const
    {
      check(level);
      apply(embed_t_[level], fine, coarse);
    }

    template <typename Other>
    TransferOperators<Other>
    cast() const
    {
      TransferOperators<Other> out;
      out.dim_ = dim_;
      for (const auto &E : embed_)
        out.embed_.push_back(E.template cast<Other>());
      for (const auto &E : embed_t_)
        out.embed_t_.push_back(E.template cast<Other>());
      return out;
    }

  private:
    template <typename>
    friend class TransferOperators;

    void
    check(unsigned level) const
    {
      if (level == 0 || level >= embed_.size())
        throw std::out_of_range("TransferOperators: no transfer into level " +
                                std::to_string(level));
    }

    void
    apply(const BandedMatrix<Number> &F, std::span<const Number> in,
          std::span<Number> out) const
    {
      TensorShape shape = TensorShape::cube(dim_, F.cols());
      TensorShape final_shape = TensorShape::cube(dim_, F.rows());
      if (in.size() != shape.size() || out.size() != final_shape.size())
        throw std::invalid_argument("TransferOperators: vector size does not match level");

      std::vector<Number> a, b;
      const Number       *src = in.data();
      for (unsigned d = 0; d < dim_; ++d)
        {
          TensorShape next = shape;
          next.extent[d]   = F.rows();
          Number *dst;
          if (d + 1 == dim_)
            dst = out.data();
          else
            {
              auto &buf = (d % 2 == 0) ? a : b;
              buf.resize(next.size());
              dst = buf.data();
            }
          apply_along_axis(F, d, shape, src, dst);
          src   = dst;
          shape = next;
        }
    }

    unsigned                          dim_ = 2;
    std::vector<BandedMatrix<Number>> embed_;
    std::vector<BandedMatrix<Number>> embed_t_;
  };

  enum class CoarseSolverKind
  {
    smoothing, // pre_steps applications of the smoother
    exact      // dense Cholesky of A_0
  };

  struct VCycleConfig
  {
    SmootherConfig   smoother;
    unsigned         pre_steps     = 1;
    unsigned         post_steps    = 1;
    CoarseSolverKind coarse_solver = CoarseSolverKind::smoothing;
  };

  /// V-cycle configuration with pre/post smoothing counts taken from the
  /// smoother's step count.
  inline VCycleConfig
  make_vcycle_config(const SmootherConfig &smoother,
                     CoarseSolverKind      coarse = CoarseSolverKind::smoothing)
  {
    VCycleConfig cfg;
    cfg.smoother      = smoother;
    cfg.pre_steps     = smoother.steps;
    cfg.post_steps    = smoother.steps;
    cfg.coarse_solver = coarse;
    cfg.smoother.steps = 1;
    return cfg;
  }

  /**
   * Geometric multigrid on all levels of a hierarchy, rediscretizing the
   * operator on every level. Setup data is computed in double precision and
   * then converted to Number, so a float cycle sees the rounded double data.
   */
  template <typename Number>
  class Multigrid
  {
  public:
    Multigrid(const MeshHierarchy &hier, double penalty_scale, const VCycleConfig &cfg)
      : hier_(hier)
      , cfg_(cfg)
    {
      cfg_.smoother.validate(hier.dim());
      const Basis1D basis(hier.degree());
      const double  penalty = default_penalty(hier.degree(), penalty_scale);
      transfer_             = TransferOperators<double>(hier, basis).template cast<Number>();

      for (unsigned l = 0; l < hier.n_levels(); ++l)
        {
          const auto ax = assemble_axis_matrices(hier, l, basis, penalty);
          auto       op = std::make_shared<const KroneckerSumOperator<Number>>(
            make_c0ip_operator(ax, hier.dim()).template cast<Number>());
          auto bank = std::make_shared<const PatchSolverBank<Number>>(
            PatchSolverBank<double>(hier, l, ax, cfg_.smoother.local_solver)
              .template cast<Number>());
          operators_.push_back(op);
          smoothers_.push_back(
            std::make_unique<SchwarzSmoother<Number>>(hier, l, op, bank, cfg_.smoother));
          if (l == 0 && cfg_.coarse_solver == CoarseSolverKind::exact)
            coarse_ = std::make_unique<ExactPatchSolver<Number>>(
              make_c0ip_operator(ax, hier.dim()).materialize());
        }

      x_.resize(hier.n_levels());
      b_.resize(hier.n_levels());
      r_.resize(hier.n_levels());
      for (unsigned l = 0; l < hier.n_levels(); ++l)
        {
          x_[l].resize(hier.n_dofs(l));
          b_[l].resize(hier.n_dofs(l));
          r_[l].resize(hier.n_dofs(l));
        }
    }

    const MeshHierarchy &
    hierarchy() const
    {
      return hier_;
    }

    const VCycleConfig &
    config() const
    {
      return cfg_;
    }

    unsigned
    finest_level() const
    {
      return hier_.finest_level();
    }

    const KroneckerSumOperator<Number> &
    level_operator(unsigned level) const
    {
      return *operators_.at(level);
    }

    const SchwarzSmoother<Number> &
    smoother(unsigned level) const
    {
      return *smoothers_.at(level);
    }

    const TransferOperators<Number> &
    transfer() const
    {
      return transfer_;
    }

    /// One V-cycle on @p level updating x for right-hand side b.
    void
    v_cycle(unsigned level, std::span<Number> x, std::span<const Number> b) const
    {
      const auto &S = *smoothers_.at(level);
      if (level == 0)
        {
          if (coarse_)
            {
              compute_residual(0, x, b);
              std::vector<Number> c(x.size());
              coarse_->apply_inverse(r_[0], c);
              for (std::size_t i = 0; i < x.size(); ++i)
                x[i] += c[i];
            }
          else
            for (unsigned s = 0; s < cfg_.pre_steps; ++s)
              S.step(x, b);
          return;
        }

      for (unsigned s = 0; s < cfg_.pre_steps; ++s)
        S.step(x, b);

      compute_residual(level, x, b);
      transfer_.restrict(level, r_[level], b_[level - 1]);
      std::fill(x_[level - 1].begin(), x_[level - 1].end(), Number(0));
      v_cycle(level - 1, x_[level - 1], b_[level - 1]);
      transfer_.prolongate(level, x_[level - 1], r_[level]);
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] += r_[level][i];

      for (unsigned s = 0; s < cfg_.post_steps; ++s)
        S.step(x, b);
    }

    /// Preconditioner application: y = MG_L(0, r).
    void
    vmult(std::span<const Number> r, std::span<Number> y) const
    {
      std::fill(y.begin(), y.end(), Number(0));
      v_cycle(finest_level(), y, r);
    }

  private:
    void
    compute_residual(unsigned level, std::span<const Number> x, std::span<const Number> b) const
    {
      auto &r = r_[level];
      operators_[level]->vmult(x, r);
      for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = b[i] - r[i];
    }

    MeshHierarchy                                                    hier_;
    VCycleConfig                                                     cfg_;
    TransferOperators<Number>                                        transfer_;
    std::vector<std::shared_ptr<const KroneckerSumOperator<Number>>> operators_;
    std::vector<std::unique_ptr<SchwarzSmoother<Number>>>            smoothers_;
    std::unique_ptr<ExactPatchSolver<Number>>                        coarse_;

    mutable std::vector<std::vector<Number>> x_, b_, r_;
  };
} // namespace c0ip
