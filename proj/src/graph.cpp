#include "dkl/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dkl/errors.hpp"
#include "dkl/rng.hpp"

namespace dkl {

namespace {

bool connected(int num_agents, const std::vector<std::vector<int>>& adjacency) {
    if (num_agents <= 1) {
        return true;
    }
    std::vector<bool> seen(num_agents, false);
    std::vector<int> frontier{0};
    seen[0] = true;
    int reached = 1;
    while (!frontier.empty()) {
        const int node = frontier.back();
        frontier.pop_back();
        for (int next : adjacency[node]) {
            if (!seen[next]) {
                seen[next] = true;
                ++reached;
                frontier.push_back(next);
            }
        }
    }
    return reached == num_agents;
}

std::vector<std::vector<int>> build_adjacency(int num_agents,
                                              const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adjacency(num_agents);
    for (const auto& [i, j] : edges) {
        adjacency[i].push_back(j);
        adjacency[j].push_back(i);
    }
    for (auto& list : adjacency) {
        std::sort(list.begin(), list.end());
    }
    return adjacency;
}

}  // namespace

Graph::Graph(int agents, std::vector<std::pair<int, int>> edge_list)
    : num_agents(agents), edges(std::move(edge_list)) {
    if (num_agents < 1) {
        throw std::invalid_argument("graph: need at least one agent");
    }
    for (auto& [i, j] : edges) {
        if (i > j) {
            std::swap(i, j);
        }
        if (i == j) {
            throw std::invalid_argument("graph: self-loop at agent " + std::to_string(i));
        }
        if (i < 0 || j >= num_agents) {
            throw std::invalid_argument("graph: edge endpoint out of range");
        }
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
        throw std::invalid_argument("graph: duplicate edge");
    }
    adjacency = build_adjacency(num_agents, edges);
    if (!connected(num_agents, adjacency)) {
        throw std::invalid_argument("graph: not connected");
    }
}

Graph random_connected_graph(int num_agents, double edge_prob, std::uint64_t seed) {
    if (num_agents < 1) {
        throw std::invalid_argument("random_connected_graph: need at least one agent");
    }
    if (!(edge_prob > 0.0) || edge_prob > 1.0) {
        throw std::invalid_argument("random_connected_graph: edge_prob must be in (0, 1]");
    }
    Rng rng(seed);
    constexpr int kMaxAttempts = 10000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < num_agents; ++i) {
            for (int j = i + 1; j < num_agents; ++j) {
                if (rng.uniform() < edge_prob) {
                    edges.emplace_back(i, j);
                }
            }
        }
        auto adjacency = build_adjacency(num_agents, edges);
        if (connected(num_agents, adjacency)) {
            Graph g;
            g.num_agents = num_agents;
            g.edges = std::move(edges);
            g.adjacency = std::move(adjacency);
            return g;
        }
    }
    throw std::runtime_error("random_connected_graph: no connected draw in " +
                             std::to_string(kMaxAttempts) +
                             " attempts; edge_prob too small for " +
                             std::to_string(num_agents) + " agents");
}

const std::vector<int>& neighbors(const Graph& g, int i) {
    if (i < 0 || i >= g.num_agents) {
        throw std::invalid_argument("neighbors: agent index out of range");
    }
    return g.adjacency[i];
}

void save_graph(const Graph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << g.num_agents << '\n';
    for (const auto& [i, j] : g.edges) {
        out << (i + 1) << ' ' << (j + 1) << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

Graph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    int num_agents = 0;
    if (!(in >> num_agents)) {
        throw ParseError(path.string() + ": missing agent count");
    }
    std::vector<std::pair<int, int>> edges;
    int a = 0;
    int b = 0;
    while (in >> a >> b) {
        if (a < 1 || b < 1 || a > num_agents || b > num_agents) {
            throw ParseError(path.string() + ": edge endpoints must be 1-based agent indices");
        }
        edges.emplace_back(a - 1, b - 1);
    }
    if (!in.eof()) {
        throw ParseError(path.string() + ": malformed edge line");
    }
    return Graph(num_agents, std::move(edges));
}

}  // namespace dkl
