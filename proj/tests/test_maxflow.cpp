#include <gtest/gtest.h>

#include "cfseam/maxflow.hpp"

namespace cfseam {
namespace {

// Textbook network with max flow 23; the min cut separates {s, 0, 1, 3} from {2, t}.
TEST(MaxFlow, TextbookNetwork) {
  MaxFlow g(4);
  g.add_terminal(0, 16, 0);
  g.add_terminal(1, 13, 0);
  g.add_edge(0, 2, 12, 0);
  g.add_edge(1, 0, 4, 0);
  g.add_edge(1, 3, 14, 0);
  g.add_edge(2, 1, 9, 0);
  g.add_terminal(2, 0, 20);
  g.add_edge(3, 2, 7, 0);
  g.add_terminal(3, 0, 4);
  EXPECT_DOUBLE_EQ(g.solve(), 23.0);
  EXPECT_TRUE(g.source_side(0));
  EXPECT_TRUE(g.source_side(1));
  EXPECT_TRUE(g.source_side(3));
  EXPECT_FALSE(g.source_side(2));
}

TEST(MaxFlow, InfiniteTerminalNeverCut) {
  MaxFlow g(2);
  g.add_terminal(0, MaxFlow::infinity(), 0);
  g.add_edge(0, 1, 2.5, 2.5);
  g.add_terminal(1, 0, MaxFlow::infinity());
  EXPECT_DOUBLE_EQ(g.solve(), 2.5);
  EXPECT_TRUE(g.source_side(0));
  EXPECT_FALSE(g.source_side(1));
}

TEST(MaxFlow, IsolatedNodeStaysOnSinkSide) {
  MaxFlow g(1);
  EXPECT_EQ(g.solve(), 0.0);
  EXPECT_FALSE(g.source_side(0));
}

}  // namespace
}  // namespace cfseam
