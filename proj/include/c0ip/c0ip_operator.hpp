#pragma once

#include <c0ip/axis_matrices.hpp>
#include <c0ip/basis_1d.hpp>
#include <c0ip/kronecker_operator.hpp>
#include <c0ip/mesh_hierarchy.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace c0ip
{
  using Point = std::array<double, 3>;

  /// Matrix-free A_l of a level in the requested precision.
  template <typename Number = double>
  KroneckerSumOperator<Number>
  build_level_operator(const MeshHierarchy &hier, unsigned level, const Basis1D &basis,
                       double penalty)
  {
    return make_c0ip_operator(
      assemble_axis_matrices(hier, level, basis, penalty).template cast<Number>(), hier.dim());
  }

  /// u = prod_d sin(pi x_d) with forcing f = Delta^2 u = (d pi^2)^2 u.
  class ManufacturedCase
  {
  public:
    explicit ManufacturedCase(unsigned dim)
      : dim_(dim)
    {
      if (dim != 2 && dim != 3)
        throw std::invalid_argument("ManufacturedCase: dimension must be 2 or 3");
    }

    unsigned
    dim() const
    {
      return dim_;
    }

    double
    value(const Point &x) const
    {
      double v = 1.0;
      for (unsigned d = 0; d < dim_; ++d)
        v *= std::sin(pi * x[d]);
      return v;
    }

    double
    derivative(const Point &x, unsigned a) const
    {
      double v = 1.0;
      for (unsigned d = 0; d < dim_; ++d)
        v *= d == a ? pi * std::cos(pi * x[d]) : std::sin(pi * x[d]);
      return v;
    }

    double
    second_derivative(const Point &x, unsigned a, unsigned b) const
    {
      double v = 1.0;
      for (unsigned d = 0; d < dim_; ++d)
        {
          const unsigned order = (d == a) + (d == b);
          if (order == 0)
            v *= std::sin(pi * x[d]);
          else if (order == 1)
            v *= pi * std::cos(pi * x[d]);
          else
            v *= -pi * pi * std::sin(pi * x[d]);
        }
      return v;
    }

    double
    forcing(const Point &x) const
    {
      const double s = dim_ * pi * pi;
      return s * s * value(x);
    }

    static constexpr double pi = 3.14159265358979323846;

  private:
    unsigned dim_;
  };

  namespace internal
  {
    /// Basis tables on a set of reference points: [order][i * n_points + p].
    struct BasisTable
    {
      unsigned                           n_basis  = 0;
      std::size_t                        n_points = 0;
      std::array<std::vector<double>, 3> data;

      BasisTable(const Basis1D &basis, const std::vector<double> &points)
        : n_basis(basis.size())
        , n_points(points.size())
      {
        for (unsigned o = 0; o < 3; ++o)
          {
            data[o].resize(n_basis * n_points);
            for (unsigned i = 0; i < n_basis; ++i)
              for (std::size_t p = 0; p < n_points; ++p)
                data[o][i * n_points + p] = basis.evaluate(i, o, points[p]);
          }
      }

      double
      operator()(unsigned order, unsigned i, std::size_t p) const
      {
        return data[order][i * n_points + p];
      }
    };

    /// Iterates the multi-indices of a d-dimensional box of extent n.
    inline std::vector<std::array<unsigned, 3>>
    multi_indices(unsigned dim, unsigned n)
    {
      std::vector<std::array<unsigned, 3>> out;
      std::array<unsigned, 3>              idx{0, 0, 0};
      unsigned                             total = 1;
      for (unsigned d = 0; d < dim; ++d)
        total *= n;
      out.reserve(total);
      for (unsigned t = 0; t < total; ++t)
        {
          unsigned r = t;
          for (unsigned d = 0; d < dim; ++d)
            {
              idx[d] = r % n;
              r /= n;
            }
          out.push_back(idx);
        }
      return out;
    }

    /// Interior DoF index of local node @p l on cell @p c, or -1 on the
    /// boundary.
    inline long
    global_dof(const MeshHierarchy &hier, unsigned level, const std::array<unsigned, 3> &c,
               const std::array<unsigned, 3> &l)
    {
      const std::size_t n_full = hier.nodes_per_axis(level);
      const std::size_t n_int  = hier.dofs_per_axis(level);
      long              index  = 0;
      long              stride = 1;
      for (unsigned d = 0; d < hier.dim(); ++d)
        {
          const std::size_t g = std::size_t(c[d]) * hier.degree() + l[d];
          if (g == 0 || g + 1 == n_full)
            return -1;
          index += static_cast<long>(g - 1) * stride;
          stride *= static_cast<long>(n_int);
        }
      return index;
    }
  } // namespace internal

  /**
   * Dense A_l assembled by quadrature over cells (full Hessian contraction
   * including mixed derivatives) and over every face (penalty, consistency
   * and adjoint consistency terms with one-sided jump and mean on the
   * boundary). Built directly from the tensor-product shape functions and
   * independent of the 1D matrix assembly.
   */
  inline Eigen::MatrixXd
  assemble_dense(const MeshHierarchy &hier, unsigned level, const Basis1D &basis,
                 double penalty, std::size_t max_dofs = 20000)
  {
    hier.check_level(level);
    const std::size_t n_dofs = hier.n_dofs(level);
    if (n_dofs > max_dofs)
      throw std::length_error("assemble_dense: " + std::to_string(n_dofs) +
                              " DoFs exceed the dense guard of " + std::to_string(max_dofs));

    const unsigned dim     = hier.dim();
    const unsigned k       = basis.degree();
    const unsigned n_cells = static_cast<unsigned>(hier.cells_per_dim(level));
    const double   h       = hier.cell_width(level);
    const auto    &quad    = gauss_quadrature(k + 2);
    const unsigned nq      = static_cast<unsigned>(quad.points.size());

    const internal::BasisTable cell_tab(basis, quad.points);
    const internal::BasisTable end_tab(basis, {0.0, 1.0});

    const auto local_dofs = internal::multi_indices(dim, k + 1);
    const auto cell_qps   = internal::multi_indices(dim, nq);
    const auto cells      = internal::multi_indices(dim, n_cells);
    const std::size_t n_local = local_dofs.size();

    // Element matrix, identical for all cells of the uniform mesh.
    Eigen::MatrixXd element = Eigen::MatrixXd::Zero(n_local, n_local);
    {
      std::vector<double> hess(n_local * dim * dim);
      for (const auto &q : cell_qps)
        {
          double w = 1.0;
          for (unsigned d = 0; d < dim; ++d)
            w *= quad.weights[q[d]] * h;
          for (std::size_t i = 0; i < n_local; ++i)
            for (unsigned a = 0; a < dim; ++a)
              for (unsigned b = 0; b < dim; ++b)
                {
                  double v = 1.0 / (h * h);
                  for (unsigned d = 0; d < dim; ++d)
                    v *= cell_tab((d == a) + (d == b), local_dofs[i][d], q[d]);
                  hess[(i * dim + a) * dim + b] = v;
                }
          for (std::size_t i = 0; i < n_local; ++i)
            for (std::size_t j = 0; j < n_local; ++j)
              {
                double s = 0.0;
                for (unsigned ab = 0; ab < dim * dim; ++ab)
                  s += hess[i * dim * dim + ab] * hess[j * dim * dim + ab];
                element(i, j) += w * s;
              }
        }
    }

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_dofs, n_dofs);
    std::vector<long> dof_index(n_local);
    for (const auto &c : cells)
      {
        for (std::size_t i = 0; i < n_local; ++i)
          dof_index[i] = internal::global_dof(hier, level, c, local_dofs[i]);
        for (std::size_t i = 0; i < n_local; ++i)
          if (dof_index[i] >= 0)
            for (std::size_t j = 0; j < n_local; ++j)
              if (dof_index[j] >= 0)
                A(dof_index[i], dof_index[j]) += element(i, j);
      }

    // Faces orthogonal to axis a at plane p; tangential cell index t.
    struct SideValue
    {
      long   dof;
      double jump;
      double mean;
    };
    std::vector<SideValue> values;
    const auto face_cells = internal::multi_indices(dim - 1, n_cells);
    const auto face_qps   = internal::multi_indices(dim - 1, nq);
    for (unsigned a = 0; a < dim; ++a)
      for (unsigned p = 0; p <= n_cells; ++p)
        for (const auto &t : face_cells)
          {
            const bool   has_left  = p > 0;
            const bool   has_right = p < n_cells;
            const double avg       = (has_left && has_right) ? 0.5 : 1.0;
            const double h_e       = (has_left && has_right) ? face_length_scale(h, h) : h;

            for (const auto &fq : face_qps)
              {
                // Tangential quadrature coordinates per axis.
                std::array<unsigned, 3> qidx{0, 0, 0};
                double                  w = 1.0;
                for (unsigned d = 0, s = 0; d < dim; ++d)
                  if (d != a)
                    {
                      qidx[d] = fq[s++];
                      w *= quad.weights[qidx[d]] * h;
                    }

                values.clear();
                for (int side = 0; side < 2; ++side)
                  {
                    if ((side == 0 && !has_left) || (side == 1 && !has_right))
                      continue;
                    std::array<unsigned, 3> cell{0, 0, 0};
                    for (unsigned d = 0, s = 0; d < dim; ++d)
                      cell[d] = d == a ? (side == 0 ? p - 1 : p) : t[s++];
                    const unsigned end    = side == 0 ? 1 : 0;
                    const double   normal = side == 0 ? 1.0 : -1.0;
                    for (const auto &l : local_dofs)
                      {
                        const long g = internal::global_dof(hier, level, cell, l);
                        if (g < 0)
                          continue;
                        double tangential = 1.0;
                        for (unsigned d = 0; d < dim; ++d)
                          if (d != a)
                            tangential *= cell_tab(0, l[d], qidx[d]);
                        if (tangential == 0.0)
                          continue;
                        const double d1 = end_tab(1, l[a], end) / h * tangential;
                        const double d2 = end_tab(2, l[a], end) / (h * h) * tangential;
                        values.push_back({g, normal * d1, avg * d2});
                      }
                  }
                for (const auto &vi : values)
                  for (const auto &vj : values)
                    A(vi.dof, vj.dof) += w * (penalty / h_e * vi.jump * vj.jump -
                                              vj.mean * vi.jump - vj.jump * vi.mean);
              }
          }
    return A;
  }

  /// b_i = int f phi_i with an n_points^d Gauss rule per cell.
  inline std::vector<double>
  assemble_rhs(const MeshHierarchy &hier, unsigned level, const Basis1D &basis,
               const std::function<double(const Point &)> &f, unsigned n_points = 0)
  {
    hier.check_level(level);
    const unsigned dim     = hier.dim();
    const unsigned k       = basis.degree();
    const unsigned n_cells = static_cast<unsigned>(hier.cells_per_dim(level));
    const double   h       = hier.cell_width(level);
    const auto     quad    = gauss_quadrature(n_points == 0 ? k + 3 : n_points);
    const unsigned nq      = static_cast<unsigned>(quad.points.size());
    const internal::BasisTable tab(basis, quad.points);

    const auto local_dofs = internal::multi_indices(dim, k + 1);
    const auto qps        = internal::multi_indices(dim, nq);
    std::vector<double> b(hier.n_dofs(level), 0.0);
    std::vector<double> fw(qps.size());
    for (const auto &c : internal::multi_indices(dim, n_cells))
      {
        for (std::size_t q = 0; q < qps.size(); ++q)
          {
            Point  x{0, 0, 0};
            double w = 1.0;
            for (unsigned d = 0; d < dim; ++d)
              {
                x[d] = (c[d] + quad.points[qps[q][d]]) * h;
                w *= quad.weights[qps[q][d]] * h;
              }
            fw[q] = w * f(x);
          }
        for (const auto &l : local_dofs)
          {
            const long g = internal::global_dof(hier, level, c, l);
            if (g < 0)
              continue;
            double s = 0.0;
            for (std::size_t q = 0; q < qps.size(); ++q)
              {
                double phi = fw[q];
                for (unsigned d = 0; d < dim; ++d)
                  phi *= tab(0, l[d], qps[q][d]);
                s += phi;
              }
            b[g] += s;
          }
      }
    return b;
  }

  /**
   * Weak normal derivative data g = du/dn on the boundary, entering the
   * right-hand side as int_F (sigma/h) g dv/dn - g d^2v/dn^2. The operator
   * is unchanged; with g = 0 the clamped problem is recovered.
   */
  inline void
  add_boundary_normal_data(const MeshHierarchy &hier, unsigned level, const Basis1D &basis,
                           double penalty,
                           const std::function<double(const Point &, unsigned)> &gradient,
                           std::vector<double> &b, unsigned n_points = 0)
  {
    hier.check_level(level);
    const unsigned dim     = hier.dim();
    const unsigned k       = basis.degree();
    const unsigned n_cells = static_cast<unsigned>(hier.cells_per_dim(level));
    const double   h       = hier.cell_width(level);
    const auto     quad    = gauss_quadrature(n_points == 0 ? k + 3 : n_points);
    const unsigned nq      = static_cast<unsigned>(quad.points.size());
    const internal::BasisTable tab(basis, quad.points);
    const internal::BasisTable end_tab(basis, {0.0, 1.0});

    const auto local_dofs = internal::multi_indices(dim, k + 1);
    const auto face_cells = internal::multi_indices(dim - 1, n_cells);
    const auto face_qps   = internal::multi_indices(dim - 1, nq);
    for (unsigned a = 0; a < dim; ++a)
      for (unsigned p : {0u, n_cells})
        {
          const double   normal = p == 0 ? -1.0 : 1.0;
          const unsigned end    = p == 0 ? 0 : 1;
          for (const auto &t : face_cells)
            {
              std::array<unsigned, 3> cell{0, 0, 0};
              for (unsigned d = 0, s = 0; d < dim; ++d)
                cell[d] = d == a ? (p == 0 ? 0 : n_cells - 1) : t[s++];
              for (const auto &fq : face_qps)
                {
                  std::array<unsigned, 3> qidx{0, 0, 0};
                  Point                   x{0, 0, 0};
                  double                  w = 1.0;
                  for (unsigned d = 0, s = 0; d < dim; ++d)
                    if (d != a)
                      {
                        qidx[d] = fq[s];
                        x[d]    = (t[s] + quad.points[qidx[d]]) * h;
                        w *= quad.weights[qidx[d]] * h;
                        ++s;
                      }
                  x[a]           = p * h;
                  const double g = normal * gradient(x, a);
                  if (g == 0.0)
                    continue;
                  for (const auto &l : local_dofs)
                    {
                      const long dof = internal::global_dof(hier, level, cell, l);
                      if (dof < 0)
                        continue;
                      double tangential = 1.0;
                      for (unsigned d = 0; d < dim; ++d)
                        if (d != a)
                          tangential *= tab(0, l[d], qidx[d]);
                      const double dn  = normal * end_tab(1, l[a], end) / h * tangential;
                      const double dnn = end_tab(2, l[a], end) / (h * h) * tangential;
                      b[dof] += w * (penalty / h * g * dn - g * dnn);
                    }
                }
            }
        }
  }

  /// Load vector of the manufactured case including its normal derivative
  /// boundary data.
  inline std::vector<double>
  assemble_rhs(const MeshHierarchy &hier, unsigned level, const Basis1D &basis,
               const ManufacturedCase &mc, double penalty, unsigned n_points = 0)
  {
    auto b = assemble_rhs(
      hier, level, basis, [&](const Point &x) { return mc.forcing(x); }, n_points);
    add_boundary_normal_data(
      hier, level, basis, penalty, [&](const Point &x, unsigned a) { return mc.derivative(x, a); },
      b, n_points);
    return b;
  }

  /// Nodal interpolant of a function into the interior DoFs of a level.
  inline std::vector<double>
  interpolate(const MeshHierarchy &hier, unsigned level, const Basis1D &basis,
              const std::function<double(const Point &)> &f)
  {
    const unsigned    dim = hier.dim();
    const unsigned    k   = basis.degree();
    const std::size_t n   = hier.dofs_per_axis(level);
    const double      h   = hier.cell_width(level);
    const auto       &sp  = basis.support_points();
    std::vector<double> u(hier.n_dofs(level));
    for (std::size_t g = 0; g < u.size(); ++g)
      {
        Point       x{0, 0, 0};
        std::size_t r = g;
        for (unsigned d = 0; d < dim; ++d)
          {
            const std::size_t node = r % n + 1;
            r /= n;
            x[d] = (node / k + sp[node % k]) * h;
          }
        u[g] = f(x);
      }
    return u;
  }

  /// Point value of the finite element function with interior coefficients
  /// @p u.
  inline double
  evaluate(const MeshHierarchy &hier, unsigned level, const Basis1D &basis,
           std::span<const double> u, const Point &x)
  {
    const unsigned dim     = hier.dim();
    const unsigned k       = basis.degree();
    const unsigned n_cells = static_cast<unsigned>(hier.cells_per_dim(level));
    const double   h       = hier.cell_width(level);
    std::array<unsigned, 3> cell{0, 0, 0};
    Point                   xi{0, 0, 0};
    for (unsigned d = 0; d < dim; ++d)
      {
        cell[d] = std::min(n_cells - 1, static_cast<unsigned>(x[d] / h));
        xi[d]   = x[d] / h - cell[d];
      }
    double value = 0.0;
    for (const auto &l : internal::multi_indices(dim, k + 1))
      {
        const long g = internal::global_dof(hier, level, cell, l);
        if (g < 0)
          continue;
        double phi = u[g];
        for (unsigned d = 0; d < dim; ++d)
          phi *= basis.value(l[d], xi[d]);
        value += phi;
      }
    return value;
  }

  /**
   * Mesh-dependent energy norm |u - u_h|_h: broken H^2 seminorm plus the
   * penalty-weighted L2 norm of the normal derivative jumps on all faces.
   * With @p exact == nullptr this is the norm of u_h itself.
   */
  inline double
  energy_seminorm_error(const MeshHierarchy &hier, unsigned level, const Basis1D &basis,
                        double penalty, std::span<const double> u_h,
                        const ManufacturedCase *exact, unsigned n_points = 0)
  {
    hier.check_level(level);
    if (u_h.size() != hier.n_dofs(level))
      throw std::invalid_argument("energy_seminorm_error: vector size mismatch");
    const unsigned dim     = hier.dim();
    const unsigned k       = basis.degree();
    const unsigned n_cells = static_cast<unsigned>(hier.cells_per_dim(level));
    const double   h       = hier.cell_width(level);
    const auto     quad    = gauss_quadrature(n_points == 0 ? k + 3 : n_points);
    const unsigned nq      = static_cast<unsigned>(quad.points.size());
    const internal::BasisTable tab(basis, quad.points);
    const internal::BasisTable end_tab(basis, {0.0, 1.0});

    const auto local_dofs = internal::multi_indices(dim, k + 1);
    const auto qps        = internal::multi_indices(dim, nq);
    std::vector<double> coeff(local_dofs.size());

    const auto gather = [&](const std::array<unsigned, 3> &c) {
      for (std::size_t i = 0; i < local_dofs.size(); ++i)
        {
          const long g = internal::global_dof(hier, level, c, local_dofs[i]);
          coeff[i]     = g < 0 ? 0.0 : u_h[g];
        }
    };

    double bulk = 0.0;
    for (const auto &c : internal::multi_indices(dim, n_cells))
      {
        gather(c);
        for (const auto &q : qps)
          {
            Point  x{0, 0, 0};
            double w = 1.0;
            for (unsigned d = 0; d < dim; ++d)
              {
                x[d] = (c[d] + quad.points[q[d]]) * h;
                w *= quad.weights[q[d]] * h;
              }
            for (unsigned a = 0; a < dim; ++a)
              for (unsigned b = 0; b < dim; ++b)
                {
                  double uh = 0.0;
                  for (std::size_t i = 0; i < local_dofs.size(); ++i)
                    {
                      double v = coeff[i];
                      for (unsigned d = 0; d < dim; ++d)
                        v *= tab((d == a) + (d == b), local_dofs[i][d], q[d]);
                      uh += v;
                    }
                  uh /= h * h;
                  const double e = (exact ? exact->second_derivative(x, a, b) : 0.0) - uh;
                  bulk += w * e * e;
                }
          }
      }

    double     faces      = 0.0;
    const auto face_cells = internal::multi_indices(dim - 1, n_cells);
    const auto face_qps   = internal::multi_indices(dim - 1, nq);
    for (unsigned a = 0; a < dim; ++a)
      for (unsigned p = 0; p <= n_cells; ++p)
        for (const auto &t : face_cells)
          {
            const bool   has_left  = p > 0;
            const bool   has_right = p < n_cells;
            const double h_e       = (has_left && has_right) ? face_length_scale(h, h) : h;
            for (const auto &fq : face_qps)
              {
                std::array<unsigned, 3> qidx{0, 0, 0};
                Point                   x{0, 0, 0};
                double                  w = 1.0;
                for (unsigned d = 0, s = 0; d < dim; ++d)
                  if (d != a)
                    {
                      qidx[d] = fq[s];
                      x[d]    = (t[s] + quad.points[qidx[d]]) * h;
                      w *= quad.weights[qidx[d]] * h;
                      ++s;
                    }
                x[a] = p * h;

                double jump = 0.0;
                for (int side = 0; side < 2; ++side)
                  {
                    if ((side == 0 && !has_left) || (side == 1 && !has_right))
                      continue;
                    std::array<unsigned, 3> cell{0, 0, 0};
                    for (unsigned d = 0, s = 0; d < dim; ++d)
                      cell[d] = d == a ? (side == 0 ? p - 1 : p) : t[s++];
                    gather(cell);
                    const double normal = side == 0 ? 1.0 : -1.0;
                    double       du     = 0.0;
                    for (std::size_t i = 0; i < local_dofs.size(); ++i)
                      {
                        double v = coeff[i] * end_tab(1, local_dofs[i][a], side == 0 ? 1 : 0);
                        for (unsigned d = 0; d < dim; ++d)
                          if (d != a)
                            v *= tab(0, local_dofs[i][d], qidx[d]);
                        du += v;
                      }
                    du /= h;
                    const double du_exact = exact ? exact->derivative(x, a) : 0.0;
                    jump += normal * (du_exact - du);
                  }
                faces += w * penalty / h_e * jump * jump;
              }
          }
    return std::sqrt(bulk + faces);
  }
} // namespace c0ip
