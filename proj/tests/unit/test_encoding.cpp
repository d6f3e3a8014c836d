#include <gtest/gtest.h>

#include "odesys/encoding.hpp"
#include "odesys/errors.hpp"
#include "odesys/random.hpp"

using namespace odesys;

TEST(GridPoints, IncludesBothEndpoints) {
  const auto g = grid_points(1.5, 4.0, 0.5);
  EXPECT_EQ(g, (std::vector<double>{1.5, 2.0, 2.5, 3.0, 3.5, 4.0}));
}

TEST(GridPoints, WideStepGivesEndpointsOnly) {
  EXPECT_EQ(grid_points(2.0, 8.0, 10.0), (std::vector<double>{2.0, 8.0}));
  EXPECT_EQ(grid_points(2.0, 8.0, 6.0), (std::vector<double>{2.0, 8.0}));
}

TEST(GridPoints, TenthGridCount) {
  EXPECT_EQ(grid_points(1.5, 4.0, 0.1).size(), 26u);
  EXPECT_EQ(grid_points(2.0, 8.0, 0.1).size(), 61u);
}

TEST(GridPoints, RejectsBadInput) {
  EXPECT_THROW(grid_points(0, 1, 0), ValidationError);
  EXPECT_THROW(grid_points(1, 0, 0.1), ValidationError);
}

TEST(NearestGridIndex, TiesGoLow) {
  const std::vector<double> g = {0.0, 1.0, 2.0};
  EXPECT_EQ(nearest_grid_index(g, 0.5), 0u);
  EXPECT_EQ(nearest_grid_index(g, 0.51), 1u);
  EXPECT_EQ(nearest_grid_index(g, -3), 0u);
  EXPECT_EQ(nearest_grid_index(g, 9), 2u);
}

TEST(MixedEncoding, SnapClampsRoundsAndGrids) {
  MixedEncoding e({{"n", GeneKind::integer, 0, 3, 0}, {"d", GeneKind::real, 1.5, 4.0, 0.5},
                   {"l", GeneKind::real, 2.0, 8.0, 0}});
  EXPECT_EQ(e.snap(std::vector<double>{2.6, 2.2, 5.5}), (DecisionVector{3, 2.0, 5.5}));
  EXPECT_EQ(e.snap(std::vector<double>{-1, 9, 1}), (DecisionVector{0, 4.0, 2.0}));
  EXPECT_THROW(e.snap(std::vector<double>{1, 2}), SchemaError);
}

TEST(MixedEncoding, SnapIsIdempotent) {
  MixedEncoding e({{"n", GeneKind::integer, 0, 2, 0}, {"d", GeneKind::real, 1.5, 4.0, 0.1}});
  Rng rng(2);
  for (int t = 0; t < 500; ++t) {
    const std::vector<double> g = {rng.uniform(-1, 3), rng.uniform(1, 5)};
    const auto once = e.snap(g);
    EXPECT_EQ(e.snap(once), once);
    EXPECT_GE(once[1], 1.5);
    EXPECT_LE(once[1], 4.0);
  }
}

TEST(MixedEncoding, RejectsInvertedBounds) {
  EXPECT_THROW(MixedEncoding({{"x", GeneKind::real, 2, 1, 0}}), ValidationError);
}

TEST(RandomKeyVector, RejectsKeysOutsideUnitInterval) {
  EXPECT_NO_THROW(RandomKeyVector({0.0, 0.999}));
  EXPECT_THROW(RandomKeyVector({1.0}), DomainError);
  EXPECT_THROW(RandomKeyVector({-0.1}), DomainError);
}

namespace {

struct SumDecoder final : RandomKeyDecoder {
  std::size_t key_count() const override { return 2; }
  DecisionVector decode(std::span<const double> k) const override { return {k[0] + k[1]}; }
};

}  // namespace

TEST(Decode, ChecksLengthThenForwards) {
  SumDecoder d;
  EXPECT_EQ(decode(RandomKeyVector({0.25, 0.5}), d), (DecisionVector{0.75}));
  EXPECT_THROW(decode(RandomKeyVector({0.25}), d), SchemaError);
}
