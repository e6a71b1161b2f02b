#pragma once

#include <cstdint>
#include <vector>

#include "dkl/agent.hpp"

namespace dkl {

/// Communication accounting for one or more synchronous rounds: feature
/// vectors shipped to neighbors and scalar activations returned (D scalars
/// per vector per class function).
struct CommStats {
    std::int64_t vectors_sent = 0;
    std::int64_t scalars_returned = 0;
};

/// Synchronous message-passing round on the pre-round snapshot: for every
/// agent i, neighbor j, and batch sample b, the returned table holds
/// f_j(x_{i,b}). A pure function of the snapshot; invoking it twice yields
/// identical tables. Counters accumulate into *stats when provided.
std::vector<NeighborEvals> exchange_round(const std::vector<AgentState>& snapshot,
                                          const std::vector<Batch>& batches,
                                          CommStats* stats = nullptr);

}  // namespace dkl
