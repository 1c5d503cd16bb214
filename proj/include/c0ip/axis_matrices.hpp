#pragma once

#include <c0ip/banded_matrix.hpp>
#include <c0ip/basis_1d.hpp>
#include <c0ip/mesh_hierarchy.hpp>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace c0ip
{
  /// Raised when the interior penalty parameter is too small for the
  /// discrete bilinear form to be positive definite.
  class CoercivityError : public std::runtime_error
  {
  public:
    using std::runtime_error::runtime_error;
  };

  /// Default penalty sigma(k) = k(k+1), optionally scaled.
  inline double
  default_penalty(unsigned degree, double scale = 1.0)
  {
    return scale * degree * (degree + 1.0);
  }

  /// Harmonic mean of the extents of the two cells adjacent to a face.
  inline double
  face_length_scale(double h_left, double h_right)
  {
    return 2.0 * h_left * h_right / (h_left + h_right);
  }

  /**
   * One-dimensional mass M, stiffness L and interior penalty matrix B of a
   * level along one axis. B collects the second-derivative cell integrals
   * and, per mesh node, the penalty, consistency and adjoint consistency
   * contributions of the normal derivative jump at that node.
   */
  template <typename Number>
  struct Axis1DMatrices
  {
    unsigned             level   = 0;
    std::size_t          n_cells = 0;
    double               h       = 0.0;
    double               penalty = 0.0;
    BandedMatrix<Number> M;
    BandedMatrix<Number> L;
    BandedMatrix<Number> B;

    std::size_t
    size() const
    {
      return M.rows();
    }

    template <typename Other>
    Axis1DMatrices<Other>
    cast() const
    {
      return {level, n_cells, h, penalty, M.template cast<Other>(), L.template cast<Other>(),
              B.template cast<Other>()};
    }
  };

  /// 1D matrices of the principal patch block along one axis.
  template <typename Number>
  struct PatchAxisMatrices
  {
    BandedMatrix<Number> M;
    BandedMatrix<Number> L;
    BandedMatrix<Number> B;

    template <typename Other>
    PatchAxisMatrices<Other>
    cast() const
    {
      return {M.template cast<Other>(), L.template cast<Other>(), B.template cast<Other>()};
    }
  };

  /// Assembles M, L, B on an n_cells-cell uniform mesh of [0,1] including
  /// the two boundary nodes.
  inline Axis1DMatrices<double>
  assemble_unconstrained_axis_matrices(std::size_t n_cells, const Basis1D &basis,
                                       double penalty)
  {
    const unsigned    k = basis.degree();
    const std::size_t N = k * n_cells + 1;
    const double      h = 1.0 / static_cast<double>(n_cells);

    Axis1DMatrices<double> ax;
    ax.n_cells = n_cells;
    ax.h       = h;
    ax.penalty = penalty;
    ax.M       = BandedMatrix<double>::banded(N, k);
    ax.L       = BandedMatrix<double>::banded(N, k);
    ax.B       = BandedMatrix<double>::banded(N, 2 * k);

    const auto        &q = basis.quadrature();
    const std::size_t  nq = q.points.size();
    std::vector<double> v(nq * (k + 1)), d1(nq * (k + 1)), d2(nq * (k + 1));
    for (unsigned i = 0; i <= k; ++i)
      for (std::size_t p = 0; p < nq; ++p)
        {
          v[i * nq + p]  = basis.value(i, q.points[p]);
          d1[i * nq + p] = basis.derivative(i, q.points[p]);
          d2[i * nq + p] = basis.second_derivative(i, q.points[p]);
        }

    for (std::size_t c = 0; c < n_cells; ++c)
      for (unsigned i = 0; i <= k; ++i)
        for (unsigned j = 0; j <= k; ++j)
          {
            double m = 0, l = 0, b = 0;
            for (std::size_t p = 0; p < nq; ++p)
              {
                m += q.weights[p] * v[i * nq + p] * v[j * nq + p];
                l += q.weights[p] * d1[i * nq + p] * d1[j * nq + p];
                b += q.weights[p] * d2[i * nq + p] * d2[j * nq + p];
              }
            const std::size_t gi = c * k + i, gj = c * k + j;
            ax.M.add(gi, gj, m * h);
            ax.L.add(gi, gj, l / h);
            ax.B.add(gi, gj, b / (h * h * h));
          }

    // Face terms at every node x_p = p h. Outward normal of the left cell
    // is +1, of the right cell -1; on the boundary only one side exists.
    std::vector<double> jump(2 * k + 1), mean(2 * k + 1);
    for (std::size_t p = 0; p <= n_cells; ++p)
      {
        std::fill(jump.begin(), jump.end(), 0.0);
        std::fill(mean.begin(), mean.end(), 0.0);
        const bool        has_left  = p > 0;
        const bool        has_right = p < n_cells;
        const double      avg       = (has_left && has_right) ? 0.5 : 1.0;
        const std::size_t base      = has_left ? (p - 1) * k : p * k;
        if (has_left)
          for (unsigned i = 0; i <= k; ++i)
            {
              const std::size_t loc = (p - 1) * k + i - base;
              jump[loc] += basis.derivative(i, 1.0) / h;
              mean[loc] += avg * basis.second_derivative(i, 1.0) / (h * h);
            }
        if (has_right)
          for (unsigned i = 0; i <= k; ++i)
            {
              const std::size_t loc = p * k + i - base;
              jump[loc] -= basis.derivative(i, 0.0) / h;
              mean[loc] += avg * basis.second_derivative(i, 0.0) / (h * h);
            }
        const double      h_e   = (has_left && has_right) ? face_length_scale(h, h) : h;
        const std::size_t count = (has_left && has_right) ? 2 * k + 1 : k + 1;
        for (std::size_t i = 0; i < count; ++i)
          for (std::size_t j = 0; j < count; ++j)
            ax.B.add(base + i, base + j,
                     penalty / h_e * jump[i] * jump[j] - mean[j] * jump[i] -
                       jump[j] * mean[i]);
      }
    return ax;
  }

  /// True if the symmetric banded matrix admits a Cholesky factorization.
  template <typename Number>
  bool
  is_positive_definite(const BandedMatrix<Number> &A)
  {
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t c = 0; c < A.width(); ++c)
        {
          const double v = static_cast<double>(A.row_data(i)[c]);
          if (v != 0.0)
            triplets.emplace_back(i, A.first_column(i) + c, v);
        }
    Eigen::SparseMatrix<double> S(A.rows(), A.cols());
    S.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(S);
    return llt.info() == Eigen::Success;
  }

  /**
   * Matrices of one axis on a level with the clamped boundary nodes
   * eliminated (u = 0 strongly, du/dn = 0 through the boundary face terms).
   * Throws CoercivityError when B is not positive definite.
   */
  inline Axis1DMatrices<double>
  assemble_axis_matrices(const MeshHierarchy &hier, unsigned level, const Basis1D &basis,
                         double penalty)
  {
    if (!(penalty > 0.0))
      throw std::invalid_argument("assemble_axis_matrices: penalty must be positive");
    if (basis.degree() != hier.degree())
      throw std::invalid_argument("assemble_axis_matrices: basis degree mismatch");

    const auto        full = assemble_unconstrained_axis_matrices(hier.cells_per_dim(level),
                                                                  basis, penalty);
    const std::size_t n    = full.size() - 2;
    const unsigned    k    = basis.degree();

    Axis1DMatrices<double> ax;
    ax.level   = level;
    ax.n_cells = full.n_cells;
    ax.h       = full.h;
    ax.penalty = penalty;
    ax.M       = BandedMatrix<double>::banded(n, k);
    ax.L       = BandedMatrix<double>::banded(n, k);
    ax.B       = BandedMatrix<double>::banded(n, 2 * k);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = (i > 2 * k ? i - 2 * k : 0); j < std::min(n, i + 2 * k + 1); ++j)
        {
          if (ax.M.in_window(i, j))
            ax.M.entry(i, j) = full.M(i + 1, j + 1);
          if (ax.L.in_window(i, j))
            ax.L.entry(i, j) = full.L(i + 1, j + 1);
          ax.B.entry(i, j) = full.B(i + 1, j + 1);
        }

    if (!is_positive_definite(ax.B))
      {
        std::ostringstream msg;
        msg << "interior penalty sigma = " << penalty << " is too small for degree " << k
            << ": the 1D C0IP matrix on level " << level << " is not positive definite";
        throw CoercivityError(msg.str());
      }
    return ax;
  }

  template <typename Number>
  PatchAxisMatrices<Number>
  patch_axis_matrices(const Axis1DMatrices<Number> &ax, const MeshHierarchy &hier,
                      const VertexPatch &p, unsigned axis)
  {
    const std::size_t start = hier.patch_axis_start(p, axis);
    const std::size_t m     = hier.patch_dofs_per_axis();
    return {ax.M.principal_submatrix(start, m), ax.L.principal_submatrix(start, m),
            ax.B.principal_submatrix(start, m)};
  }
} // namespace c0ip
