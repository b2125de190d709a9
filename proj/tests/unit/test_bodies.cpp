#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cvm/body.hpp"
#include "cvm/lp.hpp"
#include "cvm/special.hpp"

using namespace cvm;

namespace {

// Shoelace area of a convex polygon given its vertices in any order.
double polygon_area(std::vector<Vec> pts) {
  Vec c = Vec::Zero(2);
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  std::sort(pts.begin(), pts.end(), [&](const Vec& a, const Vec& b) {
    return std::atan2(a(1) - c(1), a(0) - c(0)) < std::atan2(b(1) - c(1), b(0) - c(0));
  });
  double area = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec& p = pts[i];
    const Vec& q = pts[(i + 1) % pts.size()];
    area += p(0) * q(1) - p(1) * q(0);
  }
  return 0.5 * std::abs(area);
}

// Hull vertices of a point cloud in the plane (gift wrapping).
std::vector<Vec> hull2d(const std::vector<Vec>& pts) {
  std::vector<Vec> hull;
  std::size_t start = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i](0) < pts[start](0) || (pts[i](0) == pts[start](0) && pts[i](1) < pts[start](1))) start = i;
  std::size_t p = start;
  do {
    hull.push_back(pts[p]);
    std::size_t q = (p + 1) % pts.size();
    for (std::size_t r = 0; r < pts.size(); ++r) {
      const Vec a = pts[q] - pts[p], b = pts[r] - pts[p];
      const double cross = a(0) * b(1) - a(1) * b(0);
      if (cross < -1e-12 || (std::abs(cross) <= 1e-12 && b.norm() > a.norm())) q = r;
    }
    p = q;
  } while (p != start && hull.size() <= pts.size());
  return hull;
}

}  // namespace

TEST(Bodies, ExactVolumes) {
  EXPECT_NEAR(volume_exact(make_box(vec_of({0, -1}), vec_of({2, 3}))), 8.0, 1e-12);
  for (int n = 1; n <= 6; ++n) {
    EXPECT_NEAR(volume_exact(make_standard_simplex(n)), 1.0 / factorial(n), 1e-14);
    EXPECT_NEAR(volume_exact(make_ball(Vec::Zero(n), 1.5)), ball_volume(n, 1.5), 1e-12);
  }
  Mat shape = diag_of(vec_of({4.0, 0.25}));
  EXPECT_NEAR(volume_exact(make_ellipsoid(Vec::Zero(2), shape)), std::numbers::pi, 1e-12);
}

TEST(Bodies, ZonotopeVolumeMatchesPolygonArea) {
  const std::vector<Vec> gens{vec_of({1, 0}), vec_of({0, 1}), vec_of({1, 1}), vec_of({0.5, -2})};
  const Body z = make_zonotope(vec_of({0.3, -0.2}), gens);
  const auto verts = vertex_list(z);
  ASSERT_TRUE(verts.has_value());
  EXPECT_NEAR(volume_exact(z), polygon_area(hull2d(*verts)), 1e-10);
}

TEST(Bodies, ZonotopeMembershipAgreesWithHullLp) {
  SeededStream s(9, "zono");
  std::vector<Vec> gens;
  for (int i = 0; i < 5; ++i) gens.push_back(s.normal_vec(3));
  const Body z = make_zonotope(Vec::Zero(3), gens);
  const auto verts = *vertex_list(z);
  const auto bb = bounding_box(z);
  int inside = 0;
  for (int i = 0; i < 400; ++i) {
    Vec x(3);
    for (int k = 0; k < 3; ++k) x(k) = s.uniform(bb.first(k), bb.second(k));
    const bool lp = lp_point_in_hull(x, verts);
    EXPECT_EQ(contains(z, x), lp);
    inside += lp;
  }
  EXPECT_GT(inside, 20);
}

TEST(Bodies, SupportFunctions) {
  const Body box = make_box(vec_of({-1, 0}), vec_of({2, 1}));
  EXPECT_NEAR(support_function(box, vec_of({1, 0})), 2.0, 1e-12);
  EXPECT_NEAR(support_function(box, vec_of({-1, 0})), 1.0, 1e-12);
  const Body ball = make_ball(vec_of({1, 1}), 2.0);
  EXPECT_NEAR(support_function(ball, vec_of({0, 3})), 3.0, 1e-12);
  // The simplex attains its support at a vertex.
  const Body tri = make_standard_simplex(2);
  EXPECT_NEAR(support_function(tri, vec_of({1, 1})), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Bodies, SumClosedForms) {
  const Body a = make_box(vec_of({0, 0}), vec_of({1, 2}));
  const Body b = make_box(vec_of({-1, 1}), vec_of({0, 1.5}));
  const Body s = minkowski_sum(a, b);
  ASSERT_NE(s.as<Box>(), nullptr);
  EXPECT_NEAR(volume_exact(s), 2.0 * 2.5, 1e-12);
  const Body balls = minkowski_sum(make_ball(Vec::Zero(3), 1.0), make_ball(Vec::Zero(3), 0.5));
  ASSERT_NE(balls.as<Ball>(), nullptr);
  EXPECT_NEAR(balls.as<Ball>()->radius, 1.5, 1e-15);
}

TEST(Bodies, SquarePlusTriangleArea) {
  // [0,1]^2 + conv{0, e1, e2} is the pentagon (0,0),(2,0),(2,1),(1,2),(0,2).
  const Body s = minkowski_sum(make_cube(2), make_standard_simplex(2));
  EXPECT_TRUE(contains(s, vec_of({1.9, 1.05})));
  EXPECT_FALSE(contains(s, vec_of({1.6, 1.6})));
  const Estimate v = volume_auto(s, 200000, SeededStream(1, "pentagon"));
  EXPECT_NEAR(v.value, 3.5, 4.0 * v.stderr_);
}

TEST(Bodies, BoxPlusBallMembership) {
  const Body s = minkowski_sum(make_cube(2), make_ball(Vec::Zero(2), 0.5));
  EXPECT_TRUE(contains(s, vec_of({1.3, 1.3})));   // distance 0.42 from the corner
  EXPECT_FALSE(contains(s, vec_of({1.4, 1.4})));  // distance 0.57
  // Oracle: |K + rB| = 1 + perimeter * r + pi r^2 in the plane.
  const Estimate v = volume_auto(s, 200000, SeededStream(2, "rounded"));
  EXPECT_NEAR(v.value, 1.0 + 4.0 * 0.5 + std::numbers::pi * 0.25, 4.0 * v.stderr_);
}

TEST(Bodies, DifferenceBodyOfTriangleIsHexagonOfAreaThree) {
  const Body d = difference_body(make_standard_simplex(2));
  const auto verts = vertex_list(d);
  ASSERT_TRUE(verts.has_value());
  EXPECT_NEAR(polygon_area(hull2d(*verts)), 3.0, 1e-12);
  const Estimate v = volume_mc(d, 100000, SeededStream(3, "hexagon"));
  EXPECT_NEAR(v.value, 3.0, 0.03 * 3.0);
}

TEST(Bodies, LinearImagesScaleVolume) {
  Mat u(2, 2);
  u << 2, 1, 0, 3;
  for (const Body& b : {make_cube(2), make_standard_simplex(2), make_ball(Vec::Zero(2), 1.0)}) {
    const Body img = linear_image(u, b, vec_of({1, -1}));
    EXPECT_NEAR(volume_exact(img), 6.0 * volume_exact(b), 1e-10) << b.kind();
    const Vec x = interior_point(b);
    EXPECT_TRUE(contains(img, u * x + vec_of({1, -1}))) << b.kind();
  }
}

TEST(Bodies, SymmetryAndTransforms) {
  EXPECT_TRUE(is_origin_symmetric(make_cube(3, -0.5, 0.5)));
  EXPECT_FALSE(is_origin_symmetric(make_cube(3)));
  EXPECT_TRUE(is_origin_symmetric(difference_body(make_standard_simplex(2))));
  const Body t = translate(make_cube(2), vec_of({-0.5, -0.5}));
  EXPECT_TRUE(is_origin_symmetric(t));
  EXPECT_NEAR(volume_exact(scale_to_unit_volume(make_ball(Vec::Zero(3), 2.0))), 1.0, 1e-12);
}

TEST(Bodies, UniformSamplesHaveExactMoments) {
  SeededStream s(4, "samples");
  for (const Body& b : {make_standard_simplex(3), make_ball(vec_of({1, 0, 0}), 1.0), make_cube(3, -1, 2)}) {
    const auto m = exact_moments(b);
    ASSERT_TRUE(m.has_value());
    const auto pts = sample_uniform_batch(b, 40000, s);
    Vec mean = Vec::Zero(3);
    for (const auto& p : pts) {
      ASSERT_TRUE(contains(b, p));
      mean += p;
    }
    mean /= static_cast<double>(pts.size());
    const double sd = std::sqrt(m->second.diagonal().maxCoeff() / static_cast<double>(pts.size()));
    EXPECT_LT((mean - m->first).cwiseAbs().maxCoeff(), 5.0 * sd) << b.kind();
  }
}

TEST(Bodies, HitAndRunOnPolytope) {
  // Hexagon A - A for the triangle: centroid at the origin.
  const Body d = difference_body(make_standard_simplex(2));
  SeededStream s(5, "hitrun");
  const auto pts = sample_uniform_batch(d, 20000, s);
  Vec mean = Vec::Zero(2);
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  EXPECT_LT(mean.norm(), 0.03);
}

TEST(Bodies, IntersectionVolume) {
  const Body a = make_cube(2);
  const Body b = make_cube(2, 0.5, 1.5);
  const Estimate v = intersection_volume_mc(a, b, 100000, SeededStream(6, "cap"));
  EXPECT_NEAR(v.value, 0.25, 4.0 * v.stderr_);
}

TEST(Bodies, Preconditions) {
  EXPECT_THROW(make_ball(Vec::Zero(2), -1.0), PreconditionError);
  EXPECT_THROW(make_box(vec_of({1, 0}), vec_of({0, 1})), PreconditionError);
  EXPECT_THROW(make_cube(7), PreconditionError);
}
