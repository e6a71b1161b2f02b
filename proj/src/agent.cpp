#include "dkl/agent.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dkl/komp.hpp"

namespace dkl {

void StepParams::validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw std::invalid_argument("step: eta must be > 0");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("step: lambda must be >= 0");
    }
    if (!(eta * lambda < 1.0)) {
        throw std::invalid_argument("step: eta * lambda must be < 1");
    }
    if (!(c >= 0.0) || !std::isfinite(c)) {
        throw std::invalid_argument("step: penalty coefficient must be >= 0");
    }
    if (!(epsilon >= 0.0) || !(jitter >= 0.0) || !(ball_radius >= 0.0)) {
        throw std::invalid_argument("step: epsilon, jitter, ball_radius must be >= 0");
    }
}

FunctionExpansion local_gradient_step(const AgentState& agent, const LossSpec& loss,
                                      const Batch& batch, const NeighborEvals& nbr,
                                      const StepParams& params) {
    params.validate();
    const int batch_size = batch.size();
    const int classes = agent.f.classes();
    if (batch_size < 1) {
        throw std::invalid_argument("local_gradient_step: empty batch");
    }
    if (static_cast<int>(batch.labels.size()) != batch_size) {
        throw std::invalid_argument("local_gradient_step: batch label count mismatch");
    }
    if (loss.classes != classes) {
        throw std::invalid_argument("local_gradient_step: loss/function class mismatch");
    }
    if (nbr.neighbor_ids != agent.neighbors ||
        nbr.values.size() != agent.neighbors.size()) {
        throw std::invalid_argument("local_gradient_step: neighbor evaluations do not cover the "
                                    "agent's neighbor set");
    }
    for (const auto& table : nbr.values) {
        if (table.rows() != batch_size || table.cols() != classes) {
            throw std::invalid_argument("local_gradient_step: neighbor table shape mismatch");
        }
    }

    Eigen::MatrixXd new_weights(batch_size, classes);
    const double step_scale = -(params.eta / batch_size);
    for (int b = 0; b < batch_size; ++b) {
        const Eigen::VectorXd own = evaluate(agent.f, batch.points.col(b));
        const Eigen::VectorXd grad = loss_grad(loss, own, batch.labels[b]);
        Eigen::VectorXd consensus = Eigen::VectorXd::Zero(classes);
        for (std::size_t k = 0; k < nbr.values.size(); ++k) {
            consensus += own - nbr.values[k].row(b).transpose();
        }
        new_weights.row(b) = step_scale * (grad + params.c * consensus).transpose();
    }
    return append_atoms(agent.f, batch.points, new_weights, 1.0 - params.eta * params.lambda);
}

FunctionExpansion project(const FunctionExpansion& f_tilde, double epsilon, double jitter) {
    return komp(f_tilde, KompBudget{epsilon, jitter});
}

AgentState agent_round(const AgentState& agent, const LossSpec& loss, const Batch& batch,
                       const NeighborEvals& nbr, const StepParams& params,
                       double* projection_dist_sq) {
    const FunctionExpansion stepped = local_gradient_step(agent, loss, batch, nbr, params);
    FunctionExpansion projected = project(stepped, params.epsilon, params.jitter);
    if (projection_dist_sq != nullptr) {
        *projection_dist_sq = hilbert_dist_sq(stepped, projected);
    }
    if (params.ball_radius > 0.0) {
        const double norm = std::sqrt(hilbert_norm_sq(projected));
        if (norm > params.ball_radius) {
            projected.weights *= params.ball_radius / norm;
        }
    }
    return AgentState{agent.id, std::move(projected), agent.neighbors};
}

}  // namespace dkl
