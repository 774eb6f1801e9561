#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fixflex/common.hpp"
#include "fixflex/csv.hpp"
#include "fixflex/dijkstra.hpp"
#include "support.hpp"

using namespace fixflex;

TEST(Seeds, DerivedSeedsAreStableAndDistinct) {
  EXPECT_EQ(derive_seed(1, "fleet"), derive_seed(1, "fleet"));
  EXPECT_NE(derive_seed(1, "fleet"), derive_seed(1, "virtual_stops"));
  EXPECT_NE(derive_seed(1, "fleet"), derive_seed(2, "fleet"));
  std::set<std::uint64_t> keys;
  for (std::uint64_t k = 0; k < 1000; ++k) keys.insert(derive_seed(42, k));
  EXPECT_EQ(keys.size(), 1000u);
}

TEST(Seeds, CounterUniformIsInUnitInterval) {
  for (std::uint64_t k = 0; k < 10000; ++k) {
    const double u = counter_uniform(7, k);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, SameSeedSameSequence) {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, UniformAndNormalMoments) {
  Rng rng(3);
  const int n = 200000;
  double s = 0, s2 = 0, z = 0, z2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    s += u;
    s2 += u * u;
    const double g = rng.normal(1.5, 2.0);
    z += g;
    z2 += g * g;
  }
  EXPECT_NEAR(s / n, 0.5, 0.005);
  EXPECT_NEAR(s2 / n - std::pow(s / n, 2), 1.0 / 12.0, 0.002);
  EXPECT_NEAR(z / n, 1.5, 0.03);
  EXPECT_NEAR(std::sqrt(z2 / n - std::pow(z / n, 2)), 2.0, 0.03);
}

TEST(Rng, IndexCoversRange) {
  Rng rng(5);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits[rng.index(7)];
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Format, DoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 26106.0, 1e-9, 123456.789}) {
    const auto s = format_double(v);
    EXPECT_EQ(std::stod(s), v);
  }
  EXPECT_EQ(format_double(450.0), "450");
  EXPECT_EQ(format_fixed(13152.5, 2), "13152.50");
}

TEST(Csv, SplitHandlesQuotes) {
  const auto f = csv::split(R"(13,Micro+Fixed,15,"['AM', 'PM']",x)");
  ASSERT_EQ(f.size(), 5u);
  EXPECT_EQ(f[3], "['AM', 'PM']");
  const auto g = csv::split(R"(a,"say ""hi""",)");
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[1], "say \"hi\"");
  EXPECT_EQ(g[2], "");
  EXPECT_EQ(csv::quote_if_needed("a,b"), "\"a,b\"");
  EXPECT_EQ(csv::quote_if_needed("plain"), "plain");
}

TEST(Csv, ParseErrorNamesFileAndLine) {
  const auto dir = fixture::temp_dir("csv");
  const auto f = fixture::write_file(dir / "t.csv", "a,b\n1,2\n\n# note\n3\n");
  try {
    csv::Table::read(f);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
    EXPECT_NE(std::string(e.what()).find("t.csv"), std::string::npos);
  }
  const auto g = fixture::write_file(dir / "u.csv", "a,b\n1,x\n");
  const auto t = csv::Table::read(g);
  EXPECT_THROW(t.real(t.rows()[0], 1), ParseError);
  EXPECT_EQ(t.integer(t.rows()[0], 0), 1);
}

TEST(Dijkstra, MatchesFloydWarshallOnRandomGraphs) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.index(9);
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
    for (std::size_t k = 0; k < 3 * n; ++k)
      edges.emplace_back(rng.index(n), rng.index(n), std::floor(rng.uniform() * 10));
    std::vector<std::vector<double>> d(n, std::vector<double>(n, kInf));
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
    for (auto [a, b, w] : edges) d[a][b] = std::min(d[a][b], w);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    for (std::size_t s = 0; s < n; ++s) {
      auto tree = dijkstra(n, s, [&](std::size_t u, auto&& relax) {
        for (std::size_t e = 0; e < edges.size(); ++e)
          if (std::get<0>(edges[e]) == u) relax(std::get<1>(edges[e]), e, std::get<2>(edges[e]));
      });
      for (std::size_t t = 0; t < n; ++t) {
        ASSERT_EQ(tree.dist[t], d[s][t]);
        if (tree.reached(t)) {
          double sum = 0;
          std::size_t at = s;
          for (std::size_t e : tree.edges_to(t)) {
            ASSERT_EQ(std::get<0>(edges[e]), at);
            at = std::get<1>(edges[e]);
            sum += std::get<2>(edges[e]);
          }
          EXPECT_EQ(at, t);
          EXPECT_EQ(sum, d[s][t]);
        }
      }
    }
  }
}

TEST(Dijkstra, BoundLeavesFarNodesUnreached) {
  // 0 -1-> 1 -1-> 2
  auto tree = dijkstra(3, 0, [](std::size_t u, auto&& relax) {
    if (u < 2) relax(u + 1, u, 1.0);
  }, 1.5);
  EXPECT_TRUE(tree.reached(1));
  EXPECT_FALSE(tree.reached(2));
}
