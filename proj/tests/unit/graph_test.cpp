#include <gtest/gtest.h>

#include "generators.hpp"
#include "vquel/graph.hpp"

using namespace vquel;
using namespace vquel::testing;

namespace {

//   a -> b -> d -> e
//   a -> c -> d
//   x (isolated)
RandomDag diamond() {
    RandomDag g;
    g.ids = {"a", "b", "c", "d", "e", "x"};
    for (const auto& id : g.ids) {
        g.parents[id];
        g.children[id];
    }
    auto edge = [&](const std::string& p, const std::string& c) {
        g.parents[c].push_back(p);
        g.children[p].push_back(c);
    };
    edge("a", "b");
    edge("a", "c");
    edge("b", "d");
    edge("c", "d");
    edge("d", "e");
    return g;
}

using Ids = std::vector<std::string>;

}  // namespace

TEST(Graph, Ancestors) {
    auto g = diamond();
    EXPECT_EQ(ancestors(g, "e", 1u), (Ids{"d"}));
    EXPECT_EQ(ancestors(g, "e", 2u), (Ids{"b", "c", "d"}));
    EXPECT_EQ(ancestors(g, "e"), (Ids{"a", "b", "c", "d"}));
    EXPECT_EQ(ancestors(g, "a"), Ids{});
    EXPECT_EQ(ancestors(g, "e", 0u), Ids{});
}

TEST(Graph, Descendants) {
    auto g = diamond();
    EXPECT_EQ(descendants(g, "a", 1u), (Ids{"b", "c"}));
    EXPECT_EQ(descendants(g, "a"), (Ids{"b", "c", "d", "e"}));
    EXPECT_EQ(descendants(g, "x"), Ids{});
}

TEST(Graph, Neighborhood) {
    auto g = diamond();
    EXPECT_EQ(neighborhood(g, "b", 1u), (Ids{"a", "d"}));
    EXPECT_EQ(neighborhood(g, "b", 2u), (Ids{"a", "c", "d", "e"}));
    EXPECT_EQ(neighborhood(g, "b", 2u, HopMode::Exactly), (Ids{"c", "e"}));
    EXPECT_EQ(neighborhood(g, "b", std::nullopt), (Ids{"a", "c", "d", "e"}));
}

TEST(Graph, UnknownStart) { EXPECT_THROW(ancestors(diamond(), "zz"), NotFoundError); }

TEST(Graph, TopologicalOrder) {
    auto g = diamond();
    auto order = topological_order(g, g.ids);
    ASSERT_TRUE(order);
    auto pos = [&](const std::string& id) { return std::ranges::find(*order, id) - order->begin(); };
    EXPECT_LT(pos("a"), pos("b"));
    EXPECT_LT(pos("c"), pos("d"));
    EXPECT_LT(pos("d"), pos("e"));
    g.parents["a"].push_back("e");
    g.children["e"].push_back("a");
    EXPECT_FALSE(topological_order(g, g.ids));
}

TEST(Graph, RandomDagsAreConsistent) {
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
        auto g = random_dag(rng, 60);
        ASSERT_TRUE(topological_order(g, g.ids));
        for (const auto& id : g.ids) {
            for (const auto& a : ancestors(g, id)) {
                auto d = descendants(g, a);
                EXPECT_TRUE(std::ranges::binary_search(d, id));
            }
        }
    }
}
