#include "rpgrasp/error.hpp"
#include "rpgrasp/point_cloud.hpp"
#include "rpgrasp/spatial_index.hpp"

#include "support.hpp"

#include <fstream>
#include <sstream>

namespace rpgrasp {
namespace {

PointCloud random_cloud(std::size_t n, bool normals, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PointCloud c;
  for (std::size_t k = 0; k < n; ++k) {
    c.points.emplace_back(u(rng), u(rng), u(rng));
    if (normals) c.normals.push_back(Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized());
  }
  return c;
}

TEST(PointCloud, PlyRoundTripIsExact) {
  const PointCloud c = random_cloud(500, true, 1);
  std::stringstream s;
  write_ply(s, c);
  const PointCloud back = parse_ply(s);
  ASSERT_EQ(back.size(), c.size());
  ASSERT_TRUE(back.has_normals());
  for (std::size_t k = 0; k < c.size(); ++k) {
    EXPECT_EQ(back.points[k], c.points[k]);
    EXPECT_EQ(back.normals[k], c.normals[k]);
  }
}

TEST(PointCloud, CsvRoundTripWithoutNormals) {
  const PointCloud c = random_cloud(100, false, 2);
  std::stringstream s;
  write_csv(s, c);
  const PointCloud back = parse_csv(s);
  ASSERT_EQ(back.size(), c.size());
  EXPECT_FALSE(back.has_normals());
  for (std::size_t k = 0; k < c.size(); ++k) EXPECT_EQ(back.points[k], c.points[k]);
}

TEST(PointCloud, CsvAcceptsHeaderAndComments) {
  std::istringstream s("x,y,z\n# comment\n1,2,3\n4,5,6\n");
  const PointCloud c = parse_csv(s);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points[1], Eigen::Vector3d(4, 5, 6));
}

TEST(PointCloud, MalformedRowsAreNamed) {
  std::istringstream csv("x,y,z\n1,2,3\n1,oops,3\n");
  try {
    parse_csv(csv);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
  }
  std::istringstream ply("ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
                         "property float z\nend_header\n1 2 3\n1 2\n");
  EXPECT_THROW(parse_ply(ply), DataError);
  std::istringstream truncated("ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\n"
                               "property float z\nend_header\n1 2 3\n");
  EXPECT_THROW(parse_ply(truncated), DataError);
  std::istringstream empty("x,y,z\n");
  EXPECT_THROW(parse_csv(empty), DataError);
  std::istringstream binary("ply\nformat binary_little_endian 1.0\nelement vertex 1\nend_header\n");
  EXPECT_THROW(parse_ply(binary), DataError);
}

TEST(PointCloud, PlyIgnoresExtraPropertiesAndElements) {
  std::istringstream s(
      "ply\nformat ascii 1.0\ncomment test\nelement vertex 2\nproperty float x\nproperty float y\n"
      "property float z\nproperty uchar red\nelement face 1\nproperty list uchar int vertex_indices\n"
      "end_header\n0.5 1.5 2.5 255\n-1 -2 -3 0\n3 0 1 1\n");
  const PointCloud c = parse_ply(s);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points[0], Eigen::Vector3d(0.5, 1.5, 2.5));
  EXPECT_FALSE(c.has_normals());
}

TEST(PointCloud, LoadCloudPicksFormatByExtension) {
  test::TempDir dir("cloud");
  const PointCloud c = random_cloud(50, true, 3);
  {
    std::ofstream f(dir / "a.ply");
    write_ply(f, c);
    std::ofstream g(dir / "a.csv");
    write_csv(g, c);
  }
  EXPECT_EQ(load_cloud(dir / "a.ply").points, c.points);
  EXPECT_EQ(load_cloud(dir / "a.csv").normals, c.normals);
  EXPECT_THROW(load_cloud(dir / "missing.ply"), DataError);
}

TEST(PointCloud, TransformedMovesPointsAndRotatesNormals) {
  Rng rng(4);
  const PointCloud c = random_cloud(20, true, 4);
  const Pose t = test::random_pose(rng);
  const PointCloud m = transformed(c, t);
  for (std::size_t k = 0; k < c.size(); ++k) {
    EXPECT_LE((m.points[k] - t.transform_point(c.points[k])).norm(), 1e-15);
    EXPECT_LE((m.normals[k] - t.rotate(c.normals[k])).norm(), 1e-15);
  }
}

TEST(PointGrid, RadiusSearchMatchesBruteForce) {
  const PointCloud c = random_cloud(3000, false, 5);
  const PointGrid grid(c.points, 0.1);
  Rng rng(6);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int q = 0; q < 50; ++q) {
    const Eigen::Vector3d centre(u(rng), u(rng), u(rng));
    const double r = 0.05 + 0.3 * std::abs(u(rng));
    auto found = grid.radius_search(centre, r);
    std::sort(found.begin(), found.end());
    std::vector<std::size_t> expected;
    for (std::size_t k = 0; k < c.size(); ++k)
      if ((c.points[k] - centre).norm() <= r) expected.push_back(k);
    EXPECT_EQ(found, expected);
  }
}

TEST(PointGrid, BoxVisitsAreDeterministicAndComplete) {
  const PointCloud c = random_cloud(1000, false, 7);
  const PointGrid grid(c.points, 0.05);
  const Eigen::Vector3d lo(-0.3, -0.2, -0.5), hi(0.4, 0.1, 0.2);
  std::vector<std::size_t> a, b;
  grid.for_each_in_box(lo, hi, [&](std::size_t i) { a.push_back(i); });
  grid.for_each_in_box(lo, hi, [&](std::size_t i) { b.push_back(i); });
  EXPECT_EQ(a, b);
  std::size_t expected = 0;
  for (const auto& p : c.points) expected += (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  EXPECT_EQ(a.size(), expected);
}

}  // namespace
}  // namespace rpgrasp
