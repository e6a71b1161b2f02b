#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "dkl/graph.hpp"
#include "doctest.h"
#include "oracles.hpp"

using dkl::Graph;

TEST_CASE("trivial graphs") {
    const Graph solo = dkl::random_connected_graph(1, 0.5, 1);
    CHECK(solo.num_edges() == 0);
    CHECK(dkl::neighbors(solo, 0).empty());

    const Graph pair = dkl::random_connected_graph(2, 1.0, 1);
    REQUIRE(pair.num_edges() == 1);
    CHECK(pair.edges.front() == std::pair<int, int>{0, 1});
    CHECK(dkl::neighbors(pair, 0) == std::vector<int>{1});
    CHECK(dkl::neighbors(pair, 1) == std::vector<int>{0});
}

TEST_CASE("random graphs are connected, symmetric, and seed deterministic") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const Graph g = dkl::random_connected_graph(20, 0.2, seed);
        CHECK(oracles::bfs_reachable(g) == 20);
        for (int i = 0; i < g.num_agents; ++i) {
            for (int j : dkl::neighbors(g, i)) {
                CHECK(j != i);
                const auto& back = dkl::neighbors(g, j);
                CHECK(std::find(back.begin(), back.end(), i) != back.end());
            }
        }
        const Graph again = dkl::random_connected_graph(20, 0.2, seed);
        CHECK(again.edges == g.edges);
    }
}

TEST_CASE("neighbor lists are sorted ascending") {
    const Graph g = dkl::random_connected_graph(15, 0.3, 99);
    for (int i = 0; i < g.num_agents; ++i) {
        const auto& list = dkl::neighbors(g, i);
        CHECK(std::is_sorted(list.begin(), list.end()));
    }
    CHECK_THROWS_AS(dkl::neighbors(g, 15), std::invalid_argument);
}

TEST_CASE("star graph built from an explicit edge list") {
    const Graph star(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    CHECK(dkl::neighbors(star, 0) == std::vector<int>{1, 2, 3, 4});
    CHECK(dkl::neighbors(star, 3) == std::vector<int>{0});
}

TEST_CASE("explicit construction rejects bad edge sets") {
    CHECK_THROWS_AS(Graph(3, {{0, 0}}), std::invalid_argument);               // self loop
    CHECK_THROWS_AS(Graph(3, {{0, 1}}), std::invalid_argument);               // disconnected
    CHECK_THROWS_AS(Graph(3, {{0, 1}, {1, 0}, {1, 2}}), std::invalid_argument);  // duplicate
    CHECK_THROWS_AS(Graph(3, {{0, 3}}), std::invalid_argument);               // out of range
}

TEST_CASE("hopeless edge probability hits the attempt cap") {
    CHECK_THROWS_AS(dkl::random_connected_graph(40, 1e-7, 5), std::runtime_error);
}

TEST_CASE("edge-list file format round trips with 1-based indices") {
    const Graph g = dkl::random_connected_graph(7, 0.5, 3);
    const auto path = std::filesystem::temp_directory_path() / "dkl_graph_roundtrip.txt";
    dkl::save_graph(g, path);

    std::ifstream in(path);
    int count = 0;
    in >> count;
    CHECK(count == 7);
    int a = 0;
    int b = 0;
    while (in >> a >> b) {
        CHECK(a >= 1);
        CHECK(b >= 1);
        CHECK(a < b);
    }

    const Graph loaded = dkl::load_graph(path);
    CHECK(loaded.num_agents == g.num_agents);
    CHECK(loaded.edges == g.edges);
    std::filesystem::remove(path);
}

TEST_CASE("malformed graph files are rejected") {
    const auto path = std::filesystem::temp_directory_path() / "dkl_graph_bad.txt";
    {
        std::ofstream out(path);
        out << "3\n1 2\n2 x\n";
    }
    CHECK_THROWS(dkl::load_graph(path));
    std::filesystem::remove(path);
}
