#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dkl/dataset.hpp"
#include "dkl/exchange.hpp"
#include "dkl/expansion.hpp"
#include "dkl/graph.hpp"
#include "dkl/losses.hpp"
#include "json.hpp"

namespace dkl {

/// Step-size schedule: constant eta, or eta_t = eta0 / (1 + t).
struct StepSchedule {
    enum class Kind { Constant, Diminishing };
    Kind kind = Kind::Constant;
    double eta0 = 1.0;

    double eta(int round) const {
        return kind == Kind::Constant ? eta0 : eta0 / (1.0 + round);
    }
};

/// Consensus-penalty schedule: fixed c, or c0 doubled whenever the per-agent
/// sample count crosses the next multiple of interval_samples, saturating at
/// c_max. The synchronous penalized update is a linear feedback on the
/// network disagreement with gain proportional to eta * c, so an unbounded
/// doubling schedule eventually crosses the oscillatory-instability
/// threshold; c_max pins the schedule inside the stable region.
struct PenaltySchedule {
    enum class Kind { Fixed, Doubling };
    Kind kind = Kind::Fixed;
    double c0 = 0.0;
    std::int64_t interval_samples = 200;
    double c_max = std::numeric_limits<double>::infinity();
};

struct GraphConfig {
    int num_agents = 1;
    double edge_prob = 1.0;
};

struct ExperimentConfig {
    LossSpec loss;
    KernelSpec kernel;
    StepSchedule step;
    double lambda = 0.0;
    double parsimony_k = 0.0;  // constant schedule: epsilon = K * eta^(3/2)
    int batch_size = 1;
    PenaltySchedule penalty;
    int rounds = 0;
    GraphConfig graph;
    std::uint64_t seed = 0;
    int eval_every = 10;
    double ball_radius = 0.0;   // 0 disables the post-projection norm cap
    int threads = 1;
    bool check_budget = false;  // per-round compression-budget assertions
    double jitter = 1e-10;

    /// Compression budget for a round: K * eta^(3/2) under the constant
    /// schedule, eta_t^2 under the diminishing schedule.
    double epsilon(int round) const;

    /// Throws ConfigError listing every violated invariant.
    void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
void from_json(const nlohmann::json& j, ExperimentConfig& cfg);

/// One metric evaluation. samples counts per-agent training samples
/// consumed; comm_scalars is the cumulative count of activation scalars
/// returned across all exchanges so far.
struct MetricsRow {
    int round = 0;
    std::int64_t samples = 0;
    double objective = 0.0;
    double penalty = 0.0;
    double disagreement = 0.0;
    double constraint_violation = 0.0;
    double c = 0.0;
    std::int64_t comm_scalars = 0;
    std::vector<int> model_orders;
    std::vector<double> accuracies;
};

std::string metrics_header(int num_agents);
std::string metrics_to_csv(const std::vector<MetricsRow>& rows, int num_agents);

struct RunResult {
    std::vector<MetricsRow> metrics;
    std::vector<FunctionExpansion> models;
    Graph graph;
    CommStats comm;
    bool diverged = false;
    int divergence_round = -1;
    std::string divergence_reason;
    std::int64_t budget_checks = 0;      // populated when check_budget is set
    std::int64_t budget_violations = 0;
    double max_budget_excess = 0.0;      // max over rounds of dist - epsilon
};

/// Cyclic per-agent sample order: a Fisher-Yates shuffle of 0..n-1 seeded
/// from (run_seed, agent). Rounds consume batch_size consecutive entries,
/// wrapping across epochs.
std::vector<int> agent_stream(std::uint64_t run_seed, int agent, int n);

/// Seed of the topology draw for a run seed (exposed so artifacts can be
/// reproduced piecewise).
std::uint64_t graph_seed(std::uint64_t run_seed);

/// Synchronous rounds of the penalized-descent/compression loop: snapshot,
/// exchange, parallel agent updates, penalty-schedule advance, metrics at
/// the configured cadence (round 0 and the final round are always
/// evaluated). Deterministic for a given config and seed regardless of the
/// thread count. A non-finite or norm-exploding iterate stops the run with
/// the divergence fields set.
RunResult run_experiment(const ExperimentConfig& cfg, const Dataset& train, const Dataset& test);

/// (1/N) sum_n sum_i loss(f_i(x_n), y_n): the unregularized global objective
/// estimated on held-out data.
double eval_objective(const std::vector<FunctionExpansion>& models, const LossSpec& loss,
                      const Dataset& test);

/// Sum over unordered edges of the squared Hilbert distance between the
/// endpoint functions.
double eval_disagreement(const std::vector<FunctionExpansion>& models, const Graph& graph);

/// Empirical (1/2) sum_i sum_{j in n_i} E[|f_i(x) - f_j(x)|^2] over the test
/// features, summed over classes.
double eval_constraint_violation(const std::vector<FunctionExpansion>& models,
                                 const Dataset& test, const Graph& graph);

/// Regularized penalty estimate: objective + (lambda/2) sum_i |f_i|^2 +
/// c * constraint violation.
double eval_penalty(const std::vector<FunctionExpansion>& models, const LossSpec& loss,
                    const Dataset& test, const Graph& graph, double lambda, double c);

/// Fraction of test samples whose argmax activation matches the label.
double eval_accuracy(const FunctionExpansion& model, const Dataset& test);

/// Constant-step convergence-radius diagnostic
/// (sqrt(eta)/lambda) * (K V + sqrt(K^2 V^2 + lambda sigma^2)); sigma is a
/// user-supplied gradient-variance bound.
double convergence_radius(double eta, double lambda, double parsimony_k, int num_agents,
                          double sigma);

}  // namespace dkl
