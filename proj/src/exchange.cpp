#include "dkl/exchange.hpp"

#include <stdexcept>

namespace dkl {

std::vector<NeighborEvals> exchange_round(const std::vector<AgentState>& snapshot,
                                          const std::vector<Batch>& batches,
                                          CommStats* stats) {
    const int num_agents = static_cast<int>(snapshot.size());
    if (static_cast<int>(batches.size()) != num_agents) {
        throw std::invalid_argument("exchange_round: one batch per agent required");
    }
    std::vector<NeighborEvals> tables(num_agents);
    for (int i = 0; i < num_agents; ++i) {
        if (snapshot[i].id != i) {
            throw std::invalid_argument("exchange_round: snapshot must be ordered by agent id");
        }
        const Batch& batch = batches[i];
        const int batch_size = batch.size();
        NeighborEvals& table = tables[i];
        table.neighbor_ids = snapshot[i].neighbors;
        table.values.reserve(table.neighbor_ids.size());
        for (int j : table.neighbor_ids) {
            if (j < 0 || j >= num_agents) {
                throw std::invalid_argument("exchange_round: neighbor index out of range");
            }
            Eigen::MatrixXd values(batch_size, snapshot[j].f.classes());
            for (int b = 0; b < batch_size; ++b) {
                values.row(b) = evaluate(snapshot[j].f, batch.points.col(b)).transpose();
            }
            table.values.push_back(std::move(values));
            if (stats != nullptr) {
                stats->vectors_sent += batch_size;
                stats->scalars_returned +=
                    static_cast<std::int64_t>(batch_size) * snapshot[j].f.classes();
            }
        }
    }
    return tables;
}

}  // namespace dkl
