#include "dkl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dkl/agent.hpp"
#include "dkl/errors.hpp"
#include "dkl/parallel.hpp"
#include "dkl/rng.hpp"
#include "dkl/text.hpp"

namespace dkl {

namespace {

// Sub-stream tags of the master run seed.
constexpr std::uint64_t kGraphStream = 1;
constexpr std::uint64_t kAgentStreamBase = 1000;

constexpr double kDivergenceNormCap = 1e6;  // Hilbert norm; far beyond sane iterates

void check_dataset(const Dataset& ds, int classes, const char* name) {
    ds.validate();
    for (int label : ds.labels) {
        if (label > classes) {
            throw std::invalid_argument(std::string(name) + ": label " + std::to_string(label) +
                                        " exceeds configured class count " +
                                        std::to_string(classes));
        }
    }
}

Eigen::MatrixXd activations_on(const FunctionExpansion& model, const Dataset& ds) {
    Eigen::MatrixXd acts(ds.size(), model.classes());
    for (int n = 0; n < ds.size(); ++n) {
        acts.row(n) = evaluate(model, ds.features.row(n).transpose()).transpose();
    }
    return acts;
}

}  // namespace

double ExperimentConfig::epsilon(int round) const {
    if (step.kind == StepSchedule::Kind::Constant) {
        return parsimony_k * std::pow(step.eta0, 1.5);
    }
    const double eta = step.eta(round);
    return eta * eta;
}

void ExperimentConfig::validate() const {
    std::vector<std::string> problems;
    if (loss.classes < 2) {
        problems.push_back("loss.classes must be at least 2");
    }
    try {
        kernel.validate();
    } catch (const std::invalid_argument& e) {
        problems.push_back(std::string("kernel: ") + e.what());
    }
    if (!(step.eta0 > 0.0) || !std::isfinite(step.eta0)) {
        problems.push_back("step.eta must be > 0");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        problems.push_back("lambda must be >= 0");
    } else if (!(step.eta0 * lambda < 1.0)) {
        problems.push_back("eta * lambda must be < 1");
    }
    if (!(parsimony_k >= 0.0) || !std::isfinite(parsimony_k)) {
        problems.push_back("parsimony_k must be >= 0");
    }
    if (batch_size < 1) {
        problems.push_back("batch_size must be >= 1");
    }
    if (!(penalty.c0 >= 0.0) || !std::isfinite(penalty.c0)) {
        problems.push_back("penalty.c0 must be >= 0");
    }
    if (penalty.kind == PenaltySchedule::Kind::Doubling && penalty.interval_samples < 1) {
        problems.push_back("penalty.interval_samples must be >= 1");
    }
    if (!(penalty.c_max > 0.0)) {
        problems.push_back("penalty.c_max must be > 0");
    }
    if (rounds < 0) {
        problems.push_back("rounds must be >= 0");
    }
    if (graph.num_agents < 1) {
        problems.push_back("graph.num_agents must be >= 1");
    }
    if (!(graph.edge_prob > 0.0) || graph.edge_prob > 1.0) {
        problems.push_back("graph.edge_prob must be in (0, 1]");
    }
    if (eval_every < 1) {
        problems.push_back("eval_every must be >= 1");
    }
    if (!(ball_radius >= 0.0)) {
        problems.push_back("ball_radius must be >= 0");
    }
    if (threads < 1) {
        problems.push_back("threads must be >= 1");
    }
    if (!(jitter >= 0.0)) {
        problems.push_back("jitter must be >= 0");
    }
    if (!problems.empty()) {
        throw ConfigError(std::move(problems));
    }
}

void to_json(nlohmann::json& j, const ExperimentConfig& cfg) {
    j = nlohmann::json{
        {"loss", cfg.loss},
        {"kernel", cfg.kernel},
        {"step",
         {{"schedule",
           cfg.step.kind == StepSchedule::Kind::Constant ? "constant" : "diminishing"},
          {"eta", cfg.step.eta0}}},
        {"lambda", cfg.lambda},
        {"parsimony_k", cfg.parsimony_k},
        {"batch_size", cfg.batch_size},
        {"rounds", cfg.rounds},
        {"graph", {{"num_agents", cfg.graph.num_agents}, {"edge_prob", cfg.graph.edge_prob}}},
        {"seed", cfg.seed},
        {"eval_every", cfg.eval_every},
        {"ball_radius", cfg.ball_radius},
        {"threads", cfg.threads},
        {"check_budget", cfg.check_budget},
        {"jitter", cfg.jitter},
    };
    if (cfg.penalty.kind == PenaltySchedule::Kind::Fixed) {
        j["penalty"] = {{"schedule", "fixed"}, {"c0", cfg.penalty.c0}};
    } else {
        j["penalty"] = {{"schedule", "doubling"},
                        {"c0", cfg.penalty.c0},
                        {"interval_samples", cfg.penalty.interval_samples}};
        if (std::isfinite(cfg.penalty.c_max)) {
            j["penalty"]["c_max"] = cfg.penalty.c_max;
        }
    }
}

void from_json(const nlohmann::json& j, ExperimentConfig& cfg) {
    std::vector<std::string> problems;
    const auto known = {"loss",       "kernel",     "step",        "lambda",
                        "parsimony_k", "batch_size", "penalty",     "rounds",
                        "graph",      "seed",       "eval_every",  "ball_radius",
                        "threads",    "check_budget", "jitter"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            problems.push_back("unknown config key: " + key);
        }
    }
    if (!problems.empty()) {
        throw ConfigError(std::move(problems));
    }

    cfg.loss = j.at("loss").get<LossSpec>();
    cfg.kernel = j.at("kernel").get<KernelSpec>();
    const auto& step = j.at("step");
    const std::string schedule = step.at("schedule").get<std::string>();
    if (schedule == "constant") {
        cfg.step.kind = StepSchedule::Kind::Constant;
    } else if (schedule == "diminishing") {
        cfg.step.kind = StepSchedule::Kind::Diminishing;
    } else {
        throw ConfigError({"step.schedule must be 'constant' or 'diminishing'"});
    }
    cfg.step.eta0 = step.at("eta").get<double>();
    cfg.lambda = j.at("lambda").get<double>();
    cfg.parsimony_k = j.at("parsimony_k").get<double>();
    cfg.batch_size = j.at("batch_size").get<int>();
    const auto& penalty = j.at("penalty");
    const std::string pkind = penalty.at("schedule").get<std::string>();
    if (pkind == "fixed") {
        cfg.penalty.kind = PenaltySchedule::Kind::Fixed;
    } else if (pkind == "doubling") {
        cfg.penalty.kind = PenaltySchedule::Kind::Doubling;
    } else {
        throw ConfigError({"penalty.schedule must be 'fixed' or 'doubling'"});
    }
    cfg.penalty.c0 = penalty.at("c0").get<double>();
    if (cfg.penalty.kind == PenaltySchedule::Kind::Doubling) {
        cfg.penalty.interval_samples = penalty.at("interval_samples").get<std::int64_t>();
        cfg.penalty.c_max = penalty.value("c_max", std::numeric_limits<double>::infinity());
    }
    cfg.rounds = j.at("rounds").get<int>();
    cfg.graph.num_agents = j.at("graph").at("num_agents").get<int>();
    cfg.graph.edge_prob = j.at("graph").at("edge_prob").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.eval_every = j.value("eval_every", 10);
    cfg.ball_radius = j.value("ball_radius", 0.0);
    cfg.threads = j.value("threads", 1);
    cfg.check_budget = j.value("check_budget", false);
    cfg.jitter = j.value("jitter", 1e-10);
    cfg.validate();
}

std::string metrics_header(int num_agents) {
    std::string header =
        "round,samples,objective,penalty,disagreement,constraint_violation,c,comm_scalars";
    for (int i = 1; i <= num_agents; ++i) {
        header += ",order_" + std::to_string(i);
    }
    for (int i = 1; i <= num_agents; ++i) {
        header += ",accuracy_" + std::to_string(i);
    }
    return header;
}

std::string metrics_to_csv(const std::vector<MetricsRow>& rows, int num_agents) {
    std::string csv = metrics_header(num_agents) + "\n";
    for (const auto& row : rows) {
        csv += std::to_string(row.round);
        csv += ',' + std::to_string(row.samples);
        csv += ',' + format_double(row.objective);
        csv += ',' + format_double(row.penalty);
        csv += ',' + format_double(row.disagreement);
        csv += ',' + format_double(row.constraint_violation);
        csv += ',' + format_double(row.c);
        csv += ',' + std::to_string(row.comm_scalars);
        for (int order : row.model_orders) {
            csv += ',' + std::to_string(order);
        }
        for (double acc : row.accuracies) {
            csv += ',' + format_double(acc);
        }
        csv += '\n';
    }
    return csv;
}

std::vector<int> agent_stream(std::uint64_t run_seed, int agent, int n) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(run_seed, kAgentStreamBase + static_cast<std::uint64_t>(agent)));
    rng.shuffle(order);
    return order;
}

std::uint64_t graph_seed(std::uint64_t run_seed) { return derive_seed(run_seed, kGraphStream); }

double eval_objective(const std::vector<FunctionExpansion>& models, const LossSpec& loss,
                      const Dataset& test) {
    if (test.size() < 1) {
        throw std::invalid_argument("eval_objective: empty test set");
    }
    double total = 0.0;
    for (const auto& model : models) {
        double agent_sum = 0.0;
        for (int n = 0; n < test.size(); ++n) {
            agent_sum +=
                dkl::loss(loss, evaluate(model, test.features.row(n).transpose()), test.labels[n]);
        }
        total += agent_sum;
    }
    return total / test.size();
}

double eval_disagreement(const std::vector<FunctionExpansion>& models, const Graph& graph) {
    double total = 0.0;
    for (const auto& [i, j] : graph.edges) {
        total += hilbert_dist_sq(models[i], models[j]);
    }
    return total;
}

double eval_constraint_violation(const std::vector<FunctionExpansion>& models,
                                 const Dataset& test, const Graph& graph) {
    if (test.size() < 1) {
        throw std::invalid_argument("eval_constraint_violation: empty test set");
    }
    double total = 0.0;
    for (const auto& [i, j] : graph.edges) {
        double pair_sum = 0.0;
        for (int n = 0; n < test.size(); ++n) {
            const Eigen::VectorXd x = test.features.row(n).transpose();
            pair_sum += (evaluate(models[i], x) - evaluate(models[j], x)).squaredNorm();
        }
        // Each unordered edge appears twice in the directed double sum and
        // the definition halves it, so it counts once here.
        total += pair_sum / test.size();
    }
    return total;
}

double eval_penalty(const std::vector<FunctionExpansion>& models, const LossSpec& loss,
                    const Dataset& test, const Graph& graph, double lambda, double c) {
    double reg = 0.0;
    for (const auto& model : models) {
        reg += 0.5 * lambda * hilbert_norm_sq(model);
    }
    return eval_objective(models, loss, test) + reg +
           c * eval_constraint_violation(models, test, graph);
}

double eval_accuracy(const FunctionExpansion& model, const Dataset& test) {
    if (test.size() < 1) {
        throw std::invalid_argument("eval_accuracy: empty test set");
    }
    int hits = 0;
    for (int n = 0; n < test.size(); ++n) {
        if (predict(evaluate(model, test.features.row(n).transpose())) == test.labels[n]) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / test.size();
}

double convergence_radius(double eta, double lambda, double parsimony_k, int num_agents,
                          double sigma) {
    if (!(eta > 0.0) || !(lambda > 0.0) || !(eta * lambda < 1.0) || !(parsimony_k >= 0.0) ||
        num_agents < 1 || !(sigma >= 0.0)) {
        throw std::invalid_argument(
            "convergence_radius: requires eta > 0, lambda > 0, eta*lambda < 1, K >= 0, V >= 1, "
            "sigma >= 0");
    }
    const double kv = parsimony_k * num_agents;
    return (std::sqrt(eta) / lambda) * (kv + std::sqrt(kv * kv + lambda * sigma * sigma));
}

namespace {

MetricsRow evaluate_round(const ExperimentConfig& cfg, const std::vector<AgentState>& agents,
                          const Dataset& test, const Graph& graph, int round,
                          std::int64_t samples, double c_current, std::int64_t comm_scalars) {
    const int num_agents = static_cast<int>(agents.size());
    const int n = test.size();

    std::vector<Eigen::MatrixXd> acts(num_agents);
    parallel_for(cfg.threads, num_agents,
                 [&](int i) { acts[i] = activations_on(agents[i].f, test); });

    MetricsRow row;
    row.round = round;
    row.samples = samples;
    row.c = c_current;
    row.comm_scalars = comm_scalars;
    row.model_orders.resize(num_agents);
    row.accuracies.resize(num_agents);

    double objective = 0.0;
    for (int i = 0; i < num_agents; ++i) {
        row.model_orders[i] = agents[i].f.model_order();
        double loss_sum = 0.0;
        int hits = 0;
        for (int s = 0; s < n; ++s) {
            loss_sum += loss(cfg.loss, acts[i].row(s).transpose(), test.labels[s]);
            if (predict(acts[i].row(s).transpose()) == test.labels[s]) {
                ++hits;
            }
        }
        objective += loss_sum;
        row.accuracies[i] = static_cast<double>(hits) / n;
    }
    row.objective = objective / n;

    double disagreement = 0.0;
    double violation = 0.0;
    for (const auto& [i, j] : graph.edges) {
        disagreement += hilbert_dist_sq(agents[i].f, agents[j].f);
        violation += (acts[i] - acts[j]).squaredNorm() / n;
    }
    row.disagreement = disagreement;
    row.constraint_violation = violation;

    double reg = 0.0;
    for (int i = 0; i < num_agents; ++i) {
        reg += 0.5 * cfg.lambda * hilbert_norm_sq(agents[i].f);
    }
    row.penalty = row.objective + reg + c_current * violation;
    return row;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const Dataset& train, const Dataset& test) {
    cfg.validate();
    check_dataset(train, cfg.loss.classes, "train");
    check_dataset(test, cfg.loss.classes, "test");
    if (test.size() < 1) {
        throw std::invalid_argument("run_experiment: empty test set");
    }
    if (cfg.rounds > 0 && train.size() < 1) {
        throw std::invalid_argument("run_experiment: empty training set");
    }
    if (train.size() > 0 && train.dim() != test.dim()) {
        throw std::invalid_argument("run_experiment: train/test dimension mismatch");
    }
    const int dim = test.dim();
    const int num_agents = cfg.graph.num_agents;
    const int batch = cfg.batch_size;

    RunResult result;
    result.graph = random_connected_graph(num_agents, cfg.graph.edge_prob, graph_seed(cfg.seed));

    std::vector<AgentState> agents(num_agents);
    for (int i = 0; i < num_agents; ++i) {
        agents[i] = AgentState{i, FunctionExpansion::zero(cfg.kernel, dim, cfg.loss.classes),
                               result.graph.adjacency[i]};
    }

    std::vector<std::vector<int>> streams(num_agents);
    if (cfg.rounds > 0) {
        for (int i = 0; i < num_agents; ++i) {
            streams[i] = agent_stream(cfg.seed, i, train.size());
        }
    }

    double c_current = cfg.penalty.c0;
    std::int64_t samples_per_agent = 0;
    std::int64_t next_doubling = cfg.penalty.interval_samples;

    result.metrics.push_back(evaluate_round(cfg, agents, test, result.graph, 0, 0, c_current,
                                            result.comm.scalars_returned));

    for (int t = 0; t < cfg.rounds && !result.diverged; ++t) {
        std::vector<Batch> batches(num_agents);
        for (int i = 0; i < num_agents; ++i) {
            Batch& b = batches[i];
            b.points.resize(dim, batch);
            b.labels.resize(batch);
            for (int k = 0; k < batch; ++k) {
                const int idx =
                    streams[i][(static_cast<std::int64_t>(t) * batch + k) % train.size()];
                b.points.col(k) = train.features.row(idx).transpose();
                b.labels[k] = train.labels[idx];
            }
        }

        const std::vector<NeighborEvals> tables = exchange_round(agents, batches, &result.comm);
        const StepParams params{cfg.step.eta(t), cfg.lambda,  c_current,
                                cfg.epsilon(t),  cfg.jitter, cfg.ball_radius};

        std::vector<AgentState> next(num_agents);
        std::vector<double> proj_dist_sq(num_agents, 0.0);
        parallel_for(cfg.threads, num_agents, [&](int i) {
            next[i] = agent_round(agents[i], cfg.loss, batches[i], tables[i], params,
                                  cfg.check_budget ? &proj_dist_sq[i] : nullptr);
        });

        if (cfg.check_budget) {
            for (int i = 0; i < num_agents; ++i) {
                const double dist = std::sqrt(proj_dist_sq[i]);
                ++result.budget_checks;
                result.max_budget_excess =
                    std::max(result.max_budget_excess, dist - params.epsilon);
                if (dist > params.epsilon + 1e-10) {
                    ++result.budget_violations;
                }
            }
        }

        agents = std::move(next);

        for (int i = 0; i < num_agents && !result.diverged; ++i) {
            std::string reason;
            if (!agents[i].f.weights.allFinite()) {
                reason = "non-finite weights";
            } else {
                try {
                    const double norm_sq = hilbert_norm_sq(agents[i].f);
                    if (!(norm_sq <= kDivergenceNormCap * kDivergenceNormCap)) {
                        reason = "Hilbert norm above " + format_double(kDivergenceNormCap);
                    }
                } catch (const NumericalError& e) {
                    reason = e.what();
                }
            }
            if (!reason.empty()) {
                result.diverged = true;
                result.divergence_round = t + 1;
                result.divergence_reason =
                    "agent " + std::to_string(i + 1) + " diverged in round " +
                    std::to_string(t + 1) + ": " + reason;
            }
        }
        if (result.diverged) {
            break;
        }

        samples_per_agent += batch;
        if (cfg.penalty.kind == PenaltySchedule::Kind::Doubling) {
            while (samples_per_agent >= next_doubling) {
                c_current = std::min(c_current * 2.0, cfg.penalty.c_max);
                next_doubling += cfg.penalty.interval_samples;
            }
        }

        const int completed = t + 1;
        if (completed % cfg.eval_every == 0 || completed == cfg.rounds) {
            result.metrics.push_back(evaluate_round(cfg, agents, test, result.graph, completed,
                                                    samples_per_agent, c_current,
                                                    result.comm.scalars_returned));
        }
    }

    result.models.reserve(num_agents);
    for (auto& agent : agents) {
        result.models.push_back(std::move(agent.f));
    }
    return result;
}

}  // namespace dkl
