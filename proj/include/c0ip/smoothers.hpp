#pragma once

#include <c0ip/kronecker_operator.hpp>
#include <c0ip/mesh_hierarchy.hpp>
#include <c0ip/patch_solvers.hpp>

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace c0ip
{
  enum class SmootherKind
  {
    additive,
    multiplicative
  };

  /// How the additive smoother combines overlapping patch updates.
  enum class AdditiveLoop
  {
    colored,  // write color by color straight into the iterate
    buffered  // accumulate all updates, then add once
  };

  struct SmootherConfig
  {
    SmootherKind    kind         = SmootherKind::multiplicative;
    unsigned        steps        = 1;
    double          omega        = 1.0;
    LocalSolverKind local_solver = LocalSolverKind::fdm;
    AdditiveLoop    additive_loop = AdditiveLoop::colored;

    /// Throws if omega is outside (0, 1/2^d] (additive) or (0, 1]
    /// (multiplicative), or steps is not 1 or 2.
    void
    validate(unsigned dim) const
    {
      if (steps < 1 || steps > 2)
        throw std::invalid_argument("SmootherConfig: steps must be 1 or 2");
      const double bound = kind == SmootherKind::additive ? 1.0 / (1u << dim) : 1.0;
      if (!(omega > 0.0) || omega > bound * (1.0 + 1e-14))
        throw std::invalid_argument("SmootherConfig: omega = " + std::to_string(omega) +
                                    " outside (0, " + std::to_string(bound) + "]");
    }
  };

  /// Relaxation used in the reference experiments for each setting.
  inline double
  default_omega(unsigned dim, SmootherKind kind)
  {
    if (kind == SmootherKind::additive)
      return dim == 2 ? 0.25 : 0.1;
    return dim == 2 ? 1.0 : 0.7;
  }

  /**
   * Additive (AVS) and colored multiplicative (MVS) vertex patch smoother
   * on one level. Residuals always use the exact level operator; only the
   * local inverses may be approximate.
   */
  template <typename Number>
  class SchwarzSmoother
  {
  public:
    SchwarzSmoother(const MeshHierarchy &hier, unsigned level,
                    std::shared_ptr<const KroneckerSumOperator<Number>> op,
                    std::shared_ptr<const PatchSolverBank<Number>>      solvers,
                    SmootherConfig                                      cfg)
      : hier_(hier)
      , level_(level)
      , op_(std::move(op))
      , solvers_(std::move(solvers))
      , cfg_(cfg)
      , coloring_(color_patches(hier, level))
    {
      cfg_.validate(hier.dim());
      if (op_->size() != hier.n_dofs(level))
        throw std::invalid_argument("SchwarzSmoother: operator size does not match level");
      residual_.resize(op_->size());
      const std::size_t m = hier.patch_size();
      local_r_.resize(m);
      local_u_.resize(m);
      work_.resize(solvers_->workspace_size());
    }

    const SmootherConfig &
    config() const
    {
      return cfg_;
    }

    const Coloring &
    coloring() const
    {
      return coloring_;
    }

    const KroneckerSumOperator<Number> &
    level_operator() const
    {
      return *op_;
    }

    /// cfg.steps applications of the configured smoother.
    void
    smooth(std::span<Number> x, std::span<const Number> b) const
    {
      for (unsigned s = 0; s < cfg_.steps; ++s)
        step(x, b);
    }

    /// A single application.
    void
    step(std::span<Number> x, std::span<const Number> b) const
    {
      if (cfg_.kind == SmootherKind::additive)
        additive_step(x, b);
      else
        multiplicative_step(x, b, coloring_);
    }

    /// x <- x + omega sum_v R_v^T A_v^{-1} R_v (b - A x)
    void
    additive_step(std::span<Number> x, std::span<const Number> b) const
    {
      compute_residual(x, b);
      const Number omega = static_cast<Number>(cfg_.omega);
      if (cfg_.additive_loop == AdditiveLoop::buffered)
        {
          std::vector<Number> update(x.size(), Number(0));
          for (const auto &color : coloring_.classes)
            for (const auto &p : color)
              local_correction(p, Number(1), update);
          for (std::size_t i = 0; i < x.size(); ++i)
            x[i] += omega * update[i];
          return;
        }
      for (const auto &color : coloring_.classes)
        for (const auto &p : color)
          local_correction(p, omega, x);
    }

    /// Color by color: x <- x + omega sum_{v in color} R_v^T A_v^{-1} R_v (b - A x),
    /// with the residual refreshed once per color. A custom @p coloring
    /// (e.g. permuted within colors) may be supplied.
    void
    multiplicative_step(std::span<Number> x, std::span<const Number> b,
                        const Coloring &coloring) const
    {
      const Number omega = static_cast<Number>(cfg_.omega);
      for (const auto &color : coloring.classes)
        {
          if (color.empty())
            continue;
          compute_residual(x, b);
          for (const auto &p : color)
            local_correction(p, omega, x);
        }
    }

  private:
    void
    compute_residual(std::span<const Number> x, std::span<const Number> b) const
    {
      op_->vmult(x, residual_);
      for (std::size_t i = 0; i < residual_.size(); ++i)
        residual_[i] = b[i] - residual_[i];
    }

    void
    local_correction(const VertexPatch &p, Number scale, std::span<Number> target) const
    {
      gather_patch(hier_, p, std::span<const Number>(residual_), std::span<Number>(local_r_));
      solvers_->solve(p, local_r_, local_u_, work_);
      scatter_add_patch(hier_, p, scale, std::span<const Number>(local_u_), target);
    }

    MeshHierarchy                                       hier_;
    unsigned                                            level_;
    std::shared_ptr<const KroneckerSumOperator<Number>> op_;
    std::shared_ptr<const PatchSolverBank<Number>>      solvers_;
    SmootherConfig                                      cfg_;
    Coloring                                            coloring_;

    mutable std::vector<Number> residual_;
    mutable std::vector<Number> local_r_;
    mutable std::vector<Number> local_u_;
    mutable std::vector<Number> work_;
  };
} // namespace c0ip
