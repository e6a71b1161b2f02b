#include <cmath>
#include <cstring>
#include <limits>

#include "dkl/agent.hpp"
#include "dkl/errors.hpp"
#include "dkl/experiment.hpp"
#include "dkl/gmm.hpp"
#include "dkl/komp.hpp"
#include "dkl/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using dkl::ExperimentConfig;
using dkl::FunctionExpansion;
using dkl::KernelSpec;
using dkl::LossKind;
using dkl::LossSpec;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.loss = {LossKind::Logistic, 5};
    cfg.kernel = KernelSpec::gaussian(0.6);
    cfg.step = {dkl::StepSchedule::Kind::Constant, 3.0};
    cfg.lambda = 1e-6;
    cfg.parsimony_k = 0.04;
    cfg.batch_size = 8;
    cfg.penalty = {dkl::PenaltySchedule::Kind::Doubling, 0.01, 200};
    cfg.rounds = 12;
    cfg.graph = {6, 0.4};
    cfg.seed = 99;
    cfg.eval_every = 3;
    return cfg;
}

dkl::Dataset tiny_gmm(int n, std::uint64_t seed) {
    dkl::GmmSpec spec;  // 5 classes, planar
    return dkl::sample_gmm(spec, n, seed);
}

// Single-agent penalized-descent reference: the plain loss-only weight rule
// with compression, bypassing the network machinery entirely.
FunctionExpansion single_agent_reference(const ExperimentConfig& cfg, const dkl::Dataset& train,
                                         int agent) {
    const auto stream = dkl::agent_stream(cfg.seed, agent, train.size());
    auto f = FunctionExpansion::zero(cfg.kernel, train.dim(), cfg.loss.classes);
    for (int t = 0; t < cfg.rounds; ++t) {
        const int batch = cfg.batch_size;
        Eigen::MatrixXd points(train.dim(), batch);
        Eigen::MatrixXd new_weights(batch, cfg.loss.classes);
        for (int k = 0; k < batch; ++k) {
            const int idx = stream[(static_cast<std::int64_t>(t) * batch + k) % train.size()];
            points.col(k) = train.features.row(idx).transpose();
        }
        for (int k = 0; k < batch; ++k) {
            const int idx = stream[(static_cast<std::int64_t>(t) * batch + k) % train.size()];
            const Eigen::VectorXd own = evaluate(f, points.col(k));
            new_weights.row(k) =
                (-(cfg.step.eta(t) / batch) *
                 dkl::loss_grad(cfg.loss, own, train.labels[idx]))
                    .transpose();
        }
        const auto stepped =
            append_atoms(f, points, new_weights, 1.0 - cfg.step.eta(t) * cfg.lambda);
        f = dkl::komp(stepped, dkl::KompBudget{cfg.epsilon(t), cfg.jitter});
    }
    return f;
}

bool bit_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_CASE("zero rounds produce a single metrics row at the zero function") {
    auto cfg = small_config();
    cfg.rounds = 0;
    const auto train = tiny_gmm(64, 4);
    const auto test = tiny_gmm(200, 5);
    const auto result = dkl::run_experiment(cfg, train, test);

    REQUIRE(result.metrics.size() == 1);
    const auto& row = result.metrics.front();
    CHECK(row.round == 0);
    CHECK(row.objective == doctest::Approx(6.0 * std::log(5.0)).epsilon(1e-12));
    CHECK(row.disagreement == 0.0);
    CHECK(row.constraint_violation == 0.0);

    int label_one = 0;
    for (int label : test.labels) {
        label_one += label == 1 ? 1 : 0;
    }
    for (double acc : row.accuracies) {
        CHECK(acc == doctest::Approx(static_cast<double>(label_one) / test.size()));
    }
    for (const auto& model : result.models) {
        CHECK(model.model_order() == 0);
    }
}

TEST_CASE("metrics cadence always includes round zero and the final round") {
    auto cfg = small_config();
    cfg.rounds = 11;  // not a multiple of eval_every
    const auto train = tiny_gmm(96, 6);
    const auto test = tiny_gmm(100, 7);
    const auto result = dkl::run_experiment(cfg, train, test);

    REQUIRE(result.metrics.size() >= 2);
    CHECK(result.metrics.front().round == 0);
    CHECK(result.metrics.back().round == 11);
    for (std::size_t i = 1; i + 1 < result.metrics.size(); ++i) {
        CHECK(result.metrics[i].round % cfg.eval_every == 0);
    }
}

TEST_CASE("doubling schedule advances on per-agent samples") {
    auto cfg = small_config();
    cfg.batch_size = 32;
    cfg.rounds = 14;
    cfg.eval_every = 1;
    cfg.penalty = {dkl::PenaltySchedule::Kind::Doubling, 0.01, 200};
    const auto train = tiny_gmm(512, 8);
    const auto test = tiny_gmm(100, 9);
    const auto result = dkl::run_experiment(cfg, train, test);

    for (const auto& row : result.metrics) {
        // thresholds at 200, 400: crossings after rounds 7 (224) and 13 (416)
        const double expected = row.round < 7 ? 0.01 : (row.round < 13 ? 0.02 : 0.04);
        CHECK(row.c == doctest::Approx(expected));
        CHECK(row.samples == static_cast<std::int64_t>(row.round) * 32);
    }
}

TEST_CASE("identical runs are byte identical across thread counts") {
    auto cfg = small_config();
    const auto train = tiny_gmm(128, 10);
    const auto test = tiny_gmm(150, 11);

    cfg.threads = 1;
    const auto serial = dkl::run_experiment(cfg, train, test);
    cfg.threads = 4;
    const auto parallel = dkl::run_experiment(cfg, train, test);

    CHECK(dkl::metrics_to_csv(serial.metrics, cfg.graph.num_agents) ==
          dkl::metrics_to_csv(parallel.metrics, cfg.graph.num_agents));
    for (int i = 0; i < cfg.graph.num_agents; ++i) {
        CHECK(bit_equal(serial.models[i].weights, parallel.models[i].weights));
        CHECK(bit_equal(serial.models[i].dictionary, parallel.models[i].dictionary));
    }
}

TEST_CASE("a zero penalty decouples the network into single agents") {
    auto cfg = small_config();
    cfg.penalty = {dkl::PenaltySchedule::Kind::Fixed, 0.0, 200};
    cfg.graph = {3, 1.0};
    cfg.rounds = 6;
    const auto train = tiny_gmm(80, 12);
    const auto test = tiny_gmm(60, 13);
    const auto result = dkl::run_experiment(cfg, train, test);

    for (int i = 0; i < 3; ++i) {
        const auto reference = single_agent_reference(cfg, train, i);
        CHECK(bit_equal(result.models[i].weights, reference.weights));
        CHECK(bit_equal(result.models[i].dictionary, reference.dictionary));
    }
}

TEST_CASE("a single-agent network ignores the penalty coefficient") {
    auto cfg = small_config();
    cfg.penalty = {dkl::PenaltySchedule::Kind::Fixed, 123.0, 200};
    cfg.graph = {1, 1.0};
    cfg.rounds = 6;
    const auto train = tiny_gmm(80, 14);
    const auto test = tiny_gmm(60, 15);
    const auto result = dkl::run_experiment(cfg, train, test);
    const auto reference = single_agent_reference(cfg, train, 0);
    CHECK(bit_equal(result.models[0].weights, reference.weights));
    CHECK(bit_equal(result.models[0].dictionary, reference.dictionary));
}

TEST_CASE("evaluation helpers") {
    const KernelSpec kernel = KernelSpec::gaussian(0.6);
    const LossSpec logistic{LossKind::Logistic, 5};
    const auto test = tiny_gmm(120, 16);

    SUBCASE("objective of zero models is V log D for logistic, V for hinge") {
        std::vector<FunctionExpansion> zeros(20, FunctionExpansion::zero(kernel, 2, 5));
        CHECK(dkl::eval_objective(zeros, logistic, test) ==
              doctest::Approx(20.0 * std::log(5.0)).epsilon(1e-12));
        CHECK(dkl::eval_objective(zeros, LossSpec{LossKind::Hinge, 5}, test) ==
              doctest::Approx(20.0).epsilon(1e-12));
        CHECK_THROWS_AS(dkl::eval_objective(zeros, logistic, dkl::Dataset{}),
                        std::invalid_argument);
    }

    SUBCASE("single-sample objective equals the direct loss sum") {
        dkl::Rng rng(17);
        std::vector<FunctionExpansion> models;
        for (int i = 0; i < 3; ++i) {
            auto f = oracles::random_expansion(rng, 5, 2, 5);
            f.kernel = kernel;
            models.push_back(f);
        }
        dkl::Dataset one;
        one.features = test.features.topRows(1);
        one.labels = {test.labels[0]};
        double direct = 0.0;
        for (const auto& model : models) {
            direct += dkl::loss(logistic, evaluate(model, one.features.row(0).transpose()),
                                one.labels[0]);
        }
        CHECK(dkl::eval_objective(models, logistic, one) == doctest::Approx(direct));
    }

    SUBCASE("disagreement closed form on a two-agent edge") {
        FunctionExpansion f;
        f.kernel = kernel;
        f.dictionary.resize(2, 1);
        f.dictionary << 0.4, -0.3;
        f.weights.resize(1, 1);
        f.weights << 1.0;
        const auto zero = FunctionExpansion::zero(kernel, 2, 1);
        const dkl::Graph two(2, {{0, 1}});
        CHECK(dkl::eval_disagreement({f, zero}, two) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dkl::eval_disagreement({f, f}, two) == 0.0);
    }

    SUBCASE("constraint violation vanishes for identical models and is bounded by "
            "disagreement for gaussian kernels") {
        dkl::Rng rng(18);
        auto f = oracles::random_expansion(rng, 6, 2, 2);
        f.kernel = kernel;
        auto g = oracles::random_expansion(rng, 6, 2, 2);
        g.kernel = kernel;
        const dkl::Graph two(2, {{0, 1}});
        dkl::Dataset feat;
        feat.features = test.features;
        feat.labels = std::vector<int>(test.labels.size(), 1);

        CHECK(dkl::eval_constraint_violation({f, f}, feat, two) == 0.0);
        // sup-norm bound: |h(x)| <= |h|_H sqrt(k(x,x)) = |h|_H
        const double violation = dkl::eval_constraint_violation({f, g}, feat, two);
        const double disagreement = dkl::eval_disagreement({f, g}, two);
        CHECK(violation <= disagreement + 1e-9);
    }
}

TEST_CASE("convergence radius closed forms") {
    CHECK(dkl::convergence_radius(3.0, 1e-6, 0.0, 20, 1.0) ==
          doctest::Approx(std::sqrt(3.0 / 1e-6)).epsilon(1e-12));
    CHECK(dkl::convergence_radius(3.0, 1e-6, 0.04, 20, 0.0) ==
          doctest::Approx(2.0 * 0.04 * 20.0 * std::sqrt(3.0) / 1e-6).epsilon(1e-12));
    const double expected =
        std::sqrt(3.0) / 1e-6 * (0.8 + std::sqrt(0.8 * 0.8 + 1e-6 * 1.0));
    CHECK(dkl::convergence_radius(3.0, 1e-6, 0.04, 20, 1.0) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK_THROWS_AS(dkl::convergence_radius(3.0, 0.0, 0.04, 20, 1.0), std::invalid_argument);
}

TEST_CASE("an absurd fixed penalty trips the divergence guard") {
    auto cfg = small_config();
    cfg.penalty = {dkl::PenaltySchedule::Kind::Fixed, 1e9, 200};
    cfg.rounds = 30;
    cfg.eval_every = 30;
    const auto train = tiny_gmm(96, 19);
    const auto test = tiny_gmm(50, 20);
    const auto result = dkl::run_experiment(cfg, train, test);
    CHECK(result.diverged);
    CHECK(result.divergence_round >= 1);
    CHECK(result.divergence_round <= 30);
    CHECK(!result.divergence_reason.empty());
}

TEST_CASE("budget checks pass on an ordinary run") {
    auto cfg = small_config();
    cfg.check_budget = true;
    const auto train = tiny_gmm(96, 21);
    const auto test = tiny_gmm(50, 22);
    const auto result = dkl::run_experiment(cfg, train, test);
    CHECK(result.budget_checks == static_cast<std::int64_t>(cfg.rounds) * 6);
    CHECK(result.budget_violations == 0);
}

TEST_CASE("config json round trips and validation lists every violation") {
    auto cfg = small_config();
    nlohmann::json j = cfg;
    const auto back = j.get<ExperimentConfig>();
    nlohmann::json j2 = back;
    CHECK(j == j2);

    auto bad = small_config();
    bad.step.eta0 = 2e6;  // eta * lambda >= 1
    bad.batch_size = 0;
    bad.graph.edge_prob = 0.0;
    try {
        bad.validate();
        FAIL("expected ConfigError");
    } catch (const dkl::ConfigError& e) {
        CHECK(e.violations.size() == 3);
    }

    nlohmann::json unknown = j;
    unknown["mystery"] = 1;
    CHECK_THROWS_AS(unknown.get<ExperimentConfig>(), dkl::ConfigError);
}

TEST_CASE("metrics csv header and shape") {
    const std::string header = dkl::metrics_header(3);
    CHECK(header ==
          "round,samples,objective,penalty,disagreement,constraint_violation,c,comm_scalars,"
          "order_1,order_2,order_3,accuracy_1,accuracy_2,accuracy_3");

    dkl::MetricsRow row;
    row.round = 2;
    row.samples = 64;
    row.objective = 1.5;
    row.penalty = 1.75;
    row.disagreement = 0.25;
    row.constraint_violation = 0.125;
    row.c = 0.01;
    row.comm_scalars = 640;
    row.model_orders = {3, 4, 5};
    row.accuracies = {0.5, 0.25, 0.75};
    const std::string csv = dkl::metrics_to_csv({row}, 3);
    CHECK(csv == header + "\n2,64,1.5,1.75,0.25,0.125,0.01,640,3,4,5,0.5,0.25,0.75\n");
}

TEST_CASE("agent streams are permutations and differ across agents") {
    const auto a = dkl::agent_stream(7, 0, 100);
    const auto b = dkl::agent_stream(7, 1, 100);
    CHECK(a != b);
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 100; ++i) {
        CHECK(sorted[i] == i);
    }
    CHECK(dkl::agent_stream(7, 0, 100) == a);
}

TEST_CASE("diminishing schedule uses eta0/(1+t) and budget eta_t squared") {
    auto cfg = small_config();
    cfg.step = {dkl::StepSchedule::Kind::Diminishing, 2.0};
    CHECK(cfg.step.eta(0) == 2.0);
    CHECK(cfg.step.eta(3) == 0.5);
    CHECK(cfg.epsilon(0) == 4.0);
    CHECK(cfg.epsilon(3) == 0.25);

    cfg.rounds = 6;
    cfg.penalty = {dkl::PenaltySchedule::Kind::Fixed, 0.05, 200,
                   std::numeric_limits<double>::infinity()};
    const auto train = tiny_gmm(64, 23);
    const auto test = tiny_gmm(50, 24);
    const auto result = dkl::run_experiment(cfg, train, test);
    CHECK(!result.diverged);
    CHECK(result.metrics.back().round == 6);
}

TEST_CASE("ball radius carries through the experiment loop") {
    auto cfg = small_config();
    cfg.ball_radius = 0.05;
    cfg.rounds = 4;
    const auto train = tiny_gmm(64, 25);
    const auto test = tiny_gmm(50, 26);
    const auto result = dkl::run_experiment(cfg, train, test);
    for (const auto& model : result.models) {
        CHECK(std::sqrt(hilbert_norm_sq(model)) <= 0.05 * (1.0 + 1e-12));
    }
}
