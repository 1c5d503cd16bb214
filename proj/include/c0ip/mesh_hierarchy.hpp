#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace c0ip
{
  /// Interior vertex of a level, identified by its per-axis vertex
  /// coordinates (1 .. cells_per_dim-1). Unused trailing axes stay 0.
  struct VertexPatch
  {
    unsigned                level = 0;
    std::array<unsigned, 3> vertex{};

    friend bool
    operator==(const VertexPatch &, const VertexPatch &) = default;
  };

  /// Patch position relative to the domain boundary along one axis. Patches
  /// of the same kind on every axis have identical local matrices.
  enum class AxisPosition : unsigned
  {
    interior       = 0,
    touches_left   = 1,
    touches_right  = 2,
    touches_both   = 3
  };

  /**
   * Nested uniform Cartesian meshes of the unit hypercube. Level 0 has two
   * cells per axis (one interior vertex); every further level halves the
   * cell width. Degrees of freedom are the interior nodes of continuous
   * Q_k Lagrange elements, numbered lexicographically with axis 0 fastest.
   */
  class MeshHierarchy
  {
  public:
    MeshHierarchy(unsigned dim, unsigned degree, unsigned n_levels)
      : dim_(dim)
      , degree_(degree)
      , n_levels_(n_levels)
    {
      if (dim != 2 && dim != 3)
        throw std::invalid_argument("MeshHierarchy: dimension must be 2 or 3, got " +
                                    std::to_string(dim));
      if (degree < 2)
        throw std::invalid_argument(
          "MeshHierarchy: C0 interior penalty needs polynomial degree >= 2, got " +
          std::to_string(degree));
      if (n_levels < 1)
        throw std::invalid_argument("MeshHierarchy: at least one level required");
      if (n_levels > 16)
        throw std::invalid_argument("MeshHierarchy: too many levels");
    }

    unsigned
    dim() const
    {
      return dim_;
    }

    unsigned
    degree() const
    {
      return degree_;
    }

    unsigned
    n_levels() const
    {
      return n_levels_;
    }

    unsigned
    finest_level() const
    {
      return n_levels_ - 1;
    }

    std::size_t
    cells_per_dim(unsigned level) const
    {
      check_level(level);
      return std::size_t(2) << level;
    }

    double
    cell_width(unsigned level) const
    {
      return 1.0 / static_cast<double>(cells_per_dim(level));
    }

    /// Continuous Q_k nodes per axis including the two boundary nodes.
    std::size_t
    nodes_per_axis(unsigned level) const
    {
      return degree_ * cells_per_dim(level) + 1;
    }

    /// Nodes per axis left after eliminating the clamped boundary nodes.
    std::size_t
    dofs_per_axis(unsigned level) const
    {
      return degree_ * cells_per_dim(level) - 1;
    }

    std::size_t
    n_dofs(unsigned level) const
    {
      return power(dofs_per_axis(level));
    }

    std::size_t
    vertices_per_axis(unsigned level) const
    {
      return cells_per_dim(level) - 1;
    }

    std::size_t
    n_patches(unsigned level) const
    {
      return power(vertices_per_axis(level));
    }

    std::size_t
    patch_dofs_per_axis() const
    {
      return 2 * degree_ - 1;
    }

    std::size_t
    patch_size() const
    {
      return power(patch_dofs_per_axis());
    }

    /// First interior DoF index (along @p axis) owned by the patch.
    std::size_t
    patch_axis_start(const VertexPatch &p, unsigned axis) const
    {
      return static_cast<std::size_t>(p.vertex[axis] - 1) * degree_;
    }

    AxisPosition
    axis_position(const VertexPatch &p, unsigned axis) const
    {
      const unsigned last  = static_cast<unsigned>(vertices_per_axis(p.level));
      unsigned       flags = 0;
      if (p.vertex[axis] == 1)
        flags |= 1;
      if (p.vertex[axis] == last)
        flags |= 2;
      return static_cast<AxisPosition>(flags);
    }

    /// Integer key identifying the tuple of axis positions; patches with
    /// the same key share their local operator.
    unsigned
    patch_kind(const VertexPatch &p) const
    {
      unsigned key = 0;
      for (unsigned d = dim_; d-- > 0;)
        key = 4 * key + static_cast<unsigned>(axis_position(p, d));
      return key;
    }

    void
    check_level(unsigned level) const
    {
      if (level >= n_levels_)
        throw std::out_of_range("MeshHierarchy: level " + std::to_string(level) +
                                " out of range (" + std::to_string(n_levels_) +
                                " levels)");
    }

  private:
    std::size_t
    power(std::size_t base) const
    {
      std::size_t result = 1;
      for (unsigned d = 0; d < dim_; ++d)
        result *= base;
      return result;
    }

    unsigned dim_;
    unsigned degree_;
    unsigned n_levels_;
  };

  inline MeshHierarchy
  build_hierarchy(unsigned dim, unsigned degree, unsigned n_levels)
  {
    return MeshHierarchy(dim, degree, n_levels);
  }

  /// All interior vertex patches of a level in lexicographic vertex order
  /// (axis 0 fastest).
  inline std::vector<VertexPatch>
  interior_patches(const MeshHierarchy &h, unsigned level)
  {
    h.check_level(level);
    const unsigned n = static_cast<unsigned>(h.vertices_per_axis(level));

    std::vector<VertexPatch> patches;
    patches.reserve(h.n_patches(level));
    VertexPatch p;
    p.level = level;
    if (h.dim() == 2)
      {
        for (unsigned j = 1; j <= n; ++j)
          for (unsigned i = 1; i <= n; ++i)
            {
              p.vertex = {i, j, 0};
              patches.push_back(p);
            }
      }
    else
      {
        for (unsigned l = 1; l <= n; ++l)
          for (unsigned j = 1; j <= n; ++j)
            for (unsigned i = 1; i <= n; ++i)
              {
                p.vertex = {i, j, l};
                patches.push_back(p);
              }
      }
    return patches;
  }

  struct Coloring
  {
    unsigned                              level = 0;
    std::vector<std::vector<VertexPatch>> classes;

    std::size_t
    n_patches() const
    {
      std::size_t n = 0;
      for (const auto &c : classes)
        n += c.size();
      return n;
    }
  };

  inline unsigned
  n_colors(unsigned dim)
  {
    return 2u << dim;
  }

  /// Color of a vertex: its parity tuple selects one of 2^d nonoverlapping
  /// classes, which is split in two by (sum_d floor(i_d / 2)) mod 2.
  inline unsigned
  color_of(const VertexPatch &p, unsigned dim)
  {
    unsigned parity = 0;
    unsigned half   = 0;
    for (unsigned d = 0; d < dim; ++d)
      {
        parity |= (p.vertex[d] % 2) << d;
        half += p.vertex[d] / 2;
      }
    return 2 * parity + (half % 2);
  }

  inline Coloring
  color_patches(const MeshHierarchy &h, unsigned level)
  {
    Coloring coloring;
    coloring.level = level;
    coloring.classes.resize(n_colors(h.dim()));
    for (const auto &p : interior_patches(h, level))
      coloring.classes[color_of(p, h.dim())].push_back(p);
    return coloring;
  }

  /// Global DoF indices of the patch-local space (R_v), patch-local
  /// lexicographic order.
  inline std::vector<std::size_t>
  patch_dof_map(const MeshHierarchy &h, const VertexPatch &p)
  {
    const std::size_t n  = h.dofs_per_axis(p.level);
    const std::size_t m  = h.patch_dofs_per_axis();
    const std::size_t s0 = h.patch_axis_start(p, 0);
    const std::size_t s1 = h.patch_axis_start(p, 1);

    std::vector<std::size_t> map;
    map.reserve(h.patch_size());
    if (h.dim() == 2)
      {
        for (std::size_t j = 0; j < m; ++j)
          for (std::size_t i = 0; i < m; ++i)
            map.push_back((s1 + j) * n + s0 + i);
      }
    else
      {
        const std::size_t s2 = h.patch_axis_start(p, 2);
        for (std::size_t l = 0; l < m; ++l)
          for (std::size_t j = 0; j < m; ++j)
            for (std::size_t i = 0; i < m; ++i)
              map.push_back(((s2 + l) * n + s1 + j) * n + s0 + i);
      }
    return map;
  }

  /// local = R_v global
  template <typename Number>
  void
  gather_patch(const MeshHierarchy &h, const VertexPatch &p, std::span<const Number> global,
               std::span<Number> local)
  {
    const std::size_t n = h.dofs_per_axis(p.level);
    const std::size_t m = h.patch_dofs_per_axis();
    const std::size_t planes = h.dim() == 3 ? m : 1;
    const std::size_t s2     = h.dim() == 3 ? h.patch_axis_start(p, 2) : 0;
    Number           *out    = local.data();
    for (std::size_t l = 0; l < planes; ++l)
      for (std::size_t j = 0; j < m; ++j)
        {
          const Number *row =
            global.data() + ((s2 + l) * n + h.patch_axis_start(p, 1) + j) * n +
            h.patch_axis_start(p, 0);
          for (std::size_t i = 0; i < m; ++i)
            *out++ = row[i];
        }
  }

  /// global += scale * R_v^T local
  template <typename Number>
  void
  scatter_add_patch(const MeshHierarchy &h, const VertexPatch &p, Number scale,
                    std::span<const Number> local, std::span<Number> global)
  {
    const std::size_t n = h.dofs_per_axis(p.level);
    const std::size_t m = h.patch_dofs_per_axis();
    const std::size_t planes = h.dim() == 3 ? m : 1;
    const std::size_t s2     = h.dim() == 3 ? h.patch_axis_start(p, 2) : 0;
    const Number     *in     = local.data();
    for (std::size_t l = 0; l < planes; ++l)
      for (std::size_t j = 0; j < m; ++j)
        {
          Number *row = global.data() + ((s2 + l) * n + h.patch_axis_start(p, 1) + j) * n +
                        h.patch_axis_start(p, 0);
          for (std::size_t i = 0; i < m; ++i)
            row[i] += scale * *in++;
        }
  }
} // namespace c0ip
