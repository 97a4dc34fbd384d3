#include <gtest/gtest.h>

#include "properties.h"

namespace fran {
namespace {

void expect_clean(const props::Outcome& o, int min_cases) {
  EXPECT_GE(o.cases, min_cases) << o.name;
  EXPECT_EQ(o.failures, 0) << o.name << ": " << o.first_failure;
}

TEST(Properties, AssignmentInvariants) { expect_clean(props::assignment_invariants(101, 3000), 3000); }
TEST(Properties, JainBounds) { expect_clean(props::jain_bounds(102, 4000), 4000); }
TEST(Properties, PriceMonotonicity) { expect_clean(props::price_monotonicity(103, 2000), 2000); }
TEST(Properties, AuctionTermination) { expect_clean(props::auction_termination(104, 1000), 1000); }
TEST(Properties, Determinism) { expect_clean(props::determinism(105, 300), 300); }

}  // namespace
}  // namespace fran
