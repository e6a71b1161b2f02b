#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dkl/expansion.hpp"
#include "dkl/losses.hpp"

namespace dkl {

/// One agent of the network: its index, its current function, and the
/// (sorted, self-free) neighbor index list.
struct AgentState {
    int id = 0;
    FunctionExpansion f;
    std::vector<int> neighbors;
};

/// Per-round update parameters.
struct StepParams {
    double eta = 1.0;         // step size, > 0 and eta * lambda < 1
    double lambda = 0.0;      // Tikhonov regularizer, >= 0
    double c = 0.0;           // consensus penalty coefficient, >= 0
    double epsilon = 0.0;     // compression budget, >= 0
    double jitter = 1e-10;    // Gram regularization for compression solves
    double ball_radius = 0.0; // optional post-projection Hilbert-ball cap; 0 disables

    void validate() const;
};

/// The minibatch an agent consumes in one round: points as columns, labels
/// 1-based.
struct Batch {
    Eigen::MatrixXd points;  // p x B
    std::vector<int> labels;

    int size() const { return static_cast<int>(points.cols()); }
};

/// Pre-round snapshot evaluations received from the neighbors: values[k] is
/// a B x D matrix holding f_{neighbor k}(x_b) for each batch sample b.
struct NeighborEvals {
    std::vector<int> neighbor_ids;
    std::vector<Eigen::MatrixXd> values;
};

/// Penalized functional stochastic gradient step: scales the existing
/// weights by (1 - eta * lambda) and appends every batch point as an atom
/// with weight row -(eta/B) * [loss_grad + c * sum_j (f_i(x_b) - f_j(x_b))],
/// all activations taken from the pre-round snapshot.
FunctionExpansion local_gradient_step(const AgentState& agent, const LossSpec& loss,
                                      const Batch& batch, const NeighborEvals& nbr,
                                      const StepParams& params);

/// Subspace projection by compression: komp with budget epsilon.
FunctionExpansion project(const FunctionExpansion& f_tilde, double epsilon,
                          double jitter = 1e-10);

/// Full round for one agent: gradient step, projection, optional norm-ball
/// rescale. When projection_dist_sq is non-null it receives the squared
/// Hilbert distance between the unprojected and projected functions.
AgentState agent_round(const AgentState& agent, const LossSpec& loss, const Batch& batch,
                       const NeighborEvals& nbr, const StepParams& params,
                       double* projection_dist_sq = nullptr);

}  // namespace dkl
