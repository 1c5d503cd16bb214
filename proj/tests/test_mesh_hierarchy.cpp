#include <c0ip/mesh_hierarchy.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace c0ip;

namespace
{
  VertexPatch
  patch(unsigned level, unsigned i, unsigned j, unsigned k = 0)
  {
    return VertexPatch{level, {i, j, k}};
  }
} // namespace

TEST(MeshHierarchy, SizesPerLevel)
{
  const MeshHierarchy h(2, 3, 4);
  EXPECT_EQ(h.cells_per_dim(0), 2u);
  EXPECT_EQ(h.cells_per_dim(3), 16u);
  EXPECT_EQ(h.dofs_per_axis(1), 3u * 4 - 1);
  EXPECT_EQ(h.n_dofs(1), 11u * 11);
  EXPECT_EQ(h.patch_dofs_per_axis(), 5u);
  EXPECT_EQ(h.patch_size(), 25u);
  EXPECT_DOUBLE_EQ(h.cell_width(2), 0.125);
}

TEST(MeshHierarchy, RejectsInvalidConfiguration)
{
  EXPECT_THROW(MeshHierarchy(1, 2, 2), std::invalid_argument);
  EXPECT_THROW(MeshHierarchy(4, 2, 2), std::invalid_argument);
  EXPECT_THROW(MeshHierarchy(2, 1, 2), std::invalid_argument);
  EXPECT_THROW(MeshHierarchy(2, 2, 0), std::invalid_argument);
  const MeshHierarchy h(2, 2, 2);
  EXPECT_THROW(h.cells_per_dim(2), std::out_of_range);
}

TEST(InteriorPatches, FourCellsPerAxis)
{
  const MeshHierarchy h(2, 2, 2);
  const auto          patches = interior_patches(h, 1);
  ASSERT_EQ(patches.size(), 9u);
  std::vector<VertexPatch> expected;
  for (unsigned j = 1; j <= 3; ++j)
    for (unsigned i = 1; i <= 3; ++i)
      expected.push_back(patch(1, i, j));
  EXPECT_EQ(patches, expected);
}

TEST(InteriorPatches, TwoCellsPerAxisHasOnePatch)
{
  const MeshHierarchy h(2, 2, 1);
  const auto          patches = interior_patches(h, 0);
  ASSERT_EQ(patches.size(), 1u);
  EXPECT_EQ(patches[0], patch(0, 1, 1));
}

TEST(InteriorPatches, ThreeDimensionsEightCells)
{
  const MeshHierarchy h(3, 2, 3);
  EXPECT_EQ(interior_patches(h, 2).size(), 343u);
  EXPECT_EQ(h.n_patches(2), 343u);
}

TEST(Coloring, RedBlackSplitOfParityClass)
{
  const MeshHierarchy h(2, 2, 2);
  const auto          coloring = color_patches(h, 1);
  ASSERT_EQ(coloring.classes.size(), 8u);

  const std::vector<VertexPatch> diagonal{patch(1, 1, 1), patch(1, 3, 3)};
  const std::vector<VertexPatch> anti{patch(1, 3, 1), patch(1, 1, 3)};
  auto sorted = [](std::vector<VertexPatch> v) {
    std::sort(v.begin(), v.end(), [](const auto &a, const auto &b) { return a.vertex < b.vertex; });
    return v;
  };
  bool found_diagonal = false, found_anti = false;
  for (const auto &c : coloring.classes)
    {
      if (sorted(c) == sorted(diagonal))
        found_diagonal = true;
      if (sorted(c) == sorted(anti))
        found_anti = true;
    }
  EXPECT_TRUE(found_diagonal);
  EXPECT_TRUE(found_anti);
}

TEST(Coloring, SinglePatchGivesOneNonemptyColor)
{
  const MeshHierarchy h(2, 2, 1);
  const auto          coloring = color_patches(h, 0);
  EXPECT_EQ(coloring.classes.size(), 8u);
  EXPECT_EQ(std::count_if(coloring.classes.begin(), coloring.classes.end(),
                          [](const auto &c) { return !c.empty(); }),
            1);
}

class ColoringProperties : public ::testing::TestWithParam<std::tuple<unsigned, unsigned>>
{};

TEST_P(ColoringProperties, PartitionAndDisjointness)
{
  const auto [dim, level] = GetParam();
  const MeshHierarchy h(dim, 2, level + 1);
  const auto          coloring = color_patches(h, level);
  EXPECT_EQ(coloring.classes.size(), n_colors(dim));
  EXPECT_EQ(coloring.n_patches(), h.n_patches(level));

  std::set<std::array<unsigned, 3>> seen;
  for (const auto &color : coloring.classes)
    for (const auto &p : color)
      EXPECT_TRUE(seen.insert(p.vertex).second);
  EXPECT_EQ(seen.size(), h.n_patches(level));

  for (const auto &color : coloring.classes)
    for (std::size_t a = 0; a < color.size(); ++a)
      {
        const auto              map_a = patch_dof_map(h, color[a]);
        const std::set<std::size_t> dofs_a(map_a.begin(), map_a.end());
        for (std::size_t b = a + 1; b < color.size(); ++b)
          {
            for (auto g : patch_dof_map(h, color[b]))
              EXPECT_EQ(dofs_a.count(g), 0u);
            // No two patches of one color share a face: their cell boxes
            // are never neighbors across exactly one axis.
            unsigned steps = 0;
            for (unsigned d = 0; d < dim; ++d)
              steps += static_cast<unsigned>(
                std::abs(static_cast<int>(color[a].vertex[d]) - static_cast<int>(color[b].vertex[d])));
            EXPECT_GE(steps, 4u);
          }
      }
}

INSTANTIATE_TEST_SUITE_P(Levels, ColoringProperties,
                         ::testing::Values(std::make_tuple(2u, 0u), std::make_tuple(2u, 1u),
                                           std::make_tuple(2u, 2u), std::make_tuple(2u, 3u),
                                           std::make_tuple(3u, 1u), std::make_tuple(3u, 2u)));

TEST(PatchDofMap, OnePatchMeshIsIdentity)
{
  const MeshHierarchy h(2, 2, 1);
  const auto          map = patch_dof_map(h, patch(0, 1, 1));
  std::vector<std::size_t> identity(9);
  std::iota(identity.begin(), identity.end(), 0);
  EXPECT_EQ(map, identity);
}

TEST(PatchDofMap, LocalSizes)
{
  EXPECT_EQ(patch_dof_map(MeshHierarchy(2, 3, 2), patch(1, 2, 2)).size(), 25u);
  EXPECT_EQ(patch_dof_map(MeshHierarchy(3, 2, 2), patch(1, 2, 2, 2)).size(), 27u);
}

TEST(PatchDofMap, TensorProductOfAxisRanges)
{
  for (unsigned dim : {2u, 3u})
    {
      const MeshHierarchy h(dim, 3, 3);
      const std::size_t   n = h.dofs_per_axis(2);
      const std::size_t   m = h.patch_dofs_per_axis();
      for (const auto &p : interior_patches(h, 2))
        {
          std::vector<std::size_t> expected;
          const std::size_t s0 = h.patch_axis_start(p, 0), s1 = h.patch_axis_start(p, 1);
          const std::size_t s2 = dim == 3 ? h.patch_axis_start(p, 2) : 0;
          for (std::size_t c = 0; c < (dim == 3 ? m : 1); ++c)
            for (std::size_t b = 0; b < m; ++b)
              for (std::size_t a = 0; a < m; ++a)
                expected.push_back(((s2 + c) * n + s1 + b) * n + s0 + a);
          if (dim == 2)
            for (auto &g : expected)
              g -= s2 * n * n;
          EXPECT_EQ(patch_dof_map(h, p), expected);
        }
    }
}

TEST(PatchDofMap, GatherScatterMatchMap)
{
  const MeshHierarchy h(3, 2, 2);
  std::vector<double> global(h.n_dofs(1));
  std::iota(global.begin(), global.end(), 0.0);
  for (const auto &p : interior_patches(h, 1))
    {
      const auto          map = patch_dof_map(h, p);
      std::vector<double> local(map.size());
      gather_patch(h, p, std::span<const double>(global), std::span<double>(local));
      for (std::size_t i = 0; i < map.size(); ++i)
        EXPECT_EQ(local[i], global[map[i]]);

      std::vector<double> target(global.size(), 0.0);
      scatter_add_patch(h, p, 2.0, std::span<const double>(local), std::span<double>(target));
      for (std::size_t i = 0; i < map.size(); ++i)
        EXPECT_EQ(target[map[i]], 2.0 * global[map[i]]);
    }
}

TEST(PatchKind, BoundaryPositions)
{
  const MeshHierarchy h(2, 2, 3);
  EXPECT_EQ(h.axis_position(patch(2, 1, 4), 0), AxisPosition::touches_left);
  EXPECT_EQ(h.axis_position(patch(2, 7, 4), 0), AxisPosition::touches_right);
  EXPECT_EQ(h.axis_position(patch(2, 4, 4), 1), AxisPosition::interior);
  const MeshHierarchy one(2, 2, 1);
  EXPECT_EQ(one.axis_position(patch(0, 1, 1), 0), AxisPosition::touches_both);
  std::set<unsigned> kinds;
  for (const auto &p : interior_patches(h, 2))
    kinds.insert(h.patch_kind(p));
  EXPECT_EQ(kinds.size(), 9u);
}
