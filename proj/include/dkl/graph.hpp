#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace dkl {

/// Undirected connected communication topology over agents 0..num_agents-1.
/// Edges are unordered pairs (stored i < j); adjacency lists are sorted
/// ascending. Construction rejects self-loops, duplicates, and disconnected
/// edge sets.
struct Graph {
    Graph() = default;
    Graph(int num_agents, std::vector<std::pair<int, int>> edge_list);

    int num_agents = 0;
    std::vector<std::pair<int, int>> edges;        // i < j, sorted
    std::vector<std::vector<int>> adjacency;       // per agent, sorted

    int num_edges() const { return static_cast<int>(edges.size()); }
};

/// Erdos-Renyi draw resampled until connected: each unordered pair is an
/// edge independently with probability edge_prob, and a disconnected draw is
/// thrown away entirely. Deterministic for a given seed; gives up after
/// 10000 attempts (edge_prob too small for the agent count).
Graph random_connected_graph(int num_agents, double edge_prob, std::uint64_t seed);

/// Sorted neighbor list of agent i (never contains i).
const std::vector<int>& neighbors(const Graph& g, int i);

/// Edge-list text format: first line the agent count, then one "i j" line
/// per edge with i < j in 1-based indices.
void save_graph(const Graph& g, const std::filesystem::path& path);
Graph load_graph(const std::filesystem::path& path);

}  // namespace dkl
