#include "nngs/core.hpp"
#include "nngs/parallel.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <limits>

namespace nngs {
namespace {

PointCloud cloud_with_ids(std::vector<std::string> ids) {
  Matrix m(static_cast<Eigen::Index>(ids.size()), 2);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) << static_cast<double>(i), 1.0;
  return PointCloud(std::move(ids), std::move(m));
}

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no nngs::Error thrown";
  return ErrorCode::InvalidArgument;
}

TEST(PointCloud, RejectsBadShapes) {
  EXPECT_EQ(code_of([] { PointCloud({"a", "b"}, Matrix(3, 2)); }), ErrorCode::InvalidShape);
  EXPECT_EQ(code_of([] { PointCloud({"a"}, Matrix::Zero(1, 2)); }), ErrorCode::TooFewPoints);
  EXPECT_EQ(code_of([] { PointCloud({"a", "b"}, Matrix(2, 0)); }), ErrorCode::InvalidShape);
  EXPECT_EQ(code_of([] { cloud_with_ids({"a", "b", "a"}); }), ErrorCode::DuplicateId);
}

TEST(PointCloud, NaNCoordinateIsRejected) {
  Matrix m = Matrix::Zero(3, 2);
  m(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(code_of([&] { PointCloud({"a", "b", "c"}, m); }), ErrorCode::NonFiniteCoordinate);
  m(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_EQ(code_of([&] { PointCloud({"a", "b", "c"}, m); }), ErrorCode::NonFiniteCoordinate);
}

TEST(PointCloud, SelectKeepsRequestedOrder) {
  const auto c = cloud_with_ids({"a", "b", "c"});
  const auto s = c.select({2, 0});
  EXPECT_EQ(s.ids(), (std::vector<std::string>{"c", "a"}));
  EXPECT_EQ(s.data()(0, 0), 2.0);
  EXPECT_EQ(s.data()(1, 0), 0.0);
}

TEST(ErrorType, MessageCarriesCodeName) {
  const Error e(ErrorCode::IdMismatch, "row 3");
  EXPECT_EQ(std::string(e.what()), "IdMismatch: row 3");
  EXPECT_EQ(e.detail(), "row 3");
}

TEST(ValidatePaired, IdenticalIdsPair) {
  const auto p = validate_paired(cloud_with_ids({"a", "b", "c"}), cloud_with_ids({"a", "b", "c"}));
  EXPECT_EQ(p.size(), 3u);
  EXPECT_EQ(p.x().ids(), p.y().ids());
}

TEST(ValidatePaired, OrderIsPartOfTheContract) {
  EXPECT_EQ(code_of([] { validate_paired(cloud_with_ids({"a", "b", "c"}), cloud_with_ids({"a", "c", "b"})); }),
            ErrorCode::IdMismatch);
  EXPECT_EQ(code_of([] { validate_paired(cloud_with_ids({"a", "b", "c"}), cloud_with_ids({"a", "b"})); }),
            ErrorCode::IdMismatch);
}

TEST(ValidatePaired, DimensionsMayDiffer) {
  const PointCloud x({"a", "b"}, Matrix::Ones(2, 3));
  const PointCloud y({"a", "b"}, Matrix::Ones(2, 5));
  EXPECT_NO_THROW(validate_paired(x, y));
}

TEST(AlignByIntersection, KeepsSharedIds) {
  Warnings w;
  const auto p = align_by_intersection(cloud_with_ids({"a", "b", "c"}), cloud_with_ids({"b", "c", "d"}), &w);
  EXPECT_EQ(p.ids(), (std::vector<std::string>{"b", "c"}));
  EXPECT_EQ(p.x().data()(0, 0), 1.0);
  EXPECT_EQ(p.y().data()(0, 0), 0.0);
  EXPECT_GE(w.count(), 1u);
}

TEST(AlignByIntersection, DisjointIsAnError) {
  EXPECT_EQ(code_of([] { align_by_intersection(cloud_with_ids({"a", "b"}), cloud_with_ids({"c", "d"})); }),
            ErrorCode::EmptyIntersection);
}

TEST(AlignByIntersection, LexicographicOrder) {
  const auto p = align_by_intersection(cloud_with_ids({"c", "a"}), cloud_with_ids({"a", "c"}));
  EXPECT_EQ(p.ids(), (std::vector<std::string>{"a", "c"}));
  EXPECT_EQ(p.x().data()(0, 0), 1.0);
  EXPECT_EQ(p.y().data()(0, 0), 0.0);
}

TEST(AlignByIntersection, Idempotent) {
  const auto p = align_by_intersection(cloud_with_ids({"z", "b", "q", "a"}), cloud_with_ids({"a", "q", "x", "z"}));
  const auto again = align_by_intersection(p.x(), p.y());
  EXPECT_EQ(again.ids(), p.ids());
  EXPECT_EQ(again.x().data(), p.x().data());
  EXPECT_EQ(again.y().data(), p.y().data());
}

TEST(MetricType, ParseAndName) {
  EXPECT_EQ(Metric::parse("cosine"), Metric::cosine());
  EXPECT_EQ(Metric::parse("euclidean"), Metric::minkowski(2));
  EXPECT_EQ(Metric::parse("manhattan"), Metric::minkowski(1));
  EXPECT_EQ(Metric::parse("minkowski:3"), Metric::minkowski(3));
  EXPECT_EQ(Metric::minkowski(2).name(), "minkowski:2");
  EXPECT_EQ(Metric::cosine().name(), "cosine");
  EXPECT_EQ(code_of([] { Metric::parse("minkowski:0.5"); }), ErrorCode::InvalidMetric);
  EXPECT_EQ(code_of([] { Metric::parse("hamming"); }), ErrorCode::InvalidMetric);
}

TEST(MetricType, AxiomsOnRandomInputs) {
  std::mt19937_64 rng(11);
  for (const auto& m : {Metric::cosine(), Metric::minkowski(1), Metric::minkowski(2), Metric::minkowski(3.5)}) {
    for (int t = 0; t < 50; ++t) {
      const Matrix a = testing::random_matrix(2, 7, rng);
      const auto u = a.row(0);
      const auto v = a.row(1);
      const double duv = distance(m, u, v);
      EXPECT_GE(duv, 0.0);
      EXPECT_EQ(duv, distance(m, v, u));
      if (m.kind == Metric::Kind::Cosine) {
        EXPECT_NEAR(distance(m, u, u), 0.0, 1e-12);
      } else {
        EXPECT_EQ(distance(m, u, u), 0.0);
      }
    }
  }
}

TEST(MetricType, ZeroVectorUnderCosine) {
  const Matrix a = Matrix::Zero(2, 3);
  EXPECT_EQ(code_of([&] { distance(Metric::cosine(), a.row(0), a.row(1)); }), ErrorCode::ZeroVectorUnderCosine);
}

TEST(SeedType, DeriveIsDeterministicAndSeparates) {
  const Seed s{42};
  EXPECT_EQ(s.derive("signal", 1, 2), s.derive("signal", 1, 2));
  EXPECT_NE(s.derive("signal", 1, 2), s.derive("signal", 2, 1));
  EXPECT_NE(s.derive("signal", 1), s.derive("noise", 1));
  EXPECT_NE(Seed{1}.derive("x"), Seed{2}.derive("x"));
}

TEST(Parallel, EveryIndexVisitedOnce) {
  for (std::size_t threads : {1u, 4u}) {
    parallel::set_max_threads(threads);
    std::vector<std::atomic<int>> hits(1000);
    parallel::for_each(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  parallel::set_max_threads(0);
}

TEST(Parallel, ExceptionsPropagate) {
  parallel::set_max_threads(3);
  EXPECT_THROW(parallel::for_each(100,
                                  [](std::size_t i) {
                                    if (i == 57) throw Error(ErrorCode::InvalidArgument, "boom");
                                  }),
               Error);
  parallel::set_max_threads(0);
}

}  // namespace
}  // namespace nngs
