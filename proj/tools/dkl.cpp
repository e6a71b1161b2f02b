// Command-line front end: synthetic data generation, training runs, and
// checkpoint evaluation for the decentralized kernel learning simulator.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dkl/errors.hpp"
#include "dkl/experiment.hpp"
#include "dkl/gmm.hpp"
#include "dkl/text.hpp"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;

std::string fnv1a64_hex(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buffer[1 << 16];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

std::string model_file_name(int agent, int num_agents) {
    const int width = static_cast<int>(std::to_string(num_agents).size());
    std::string number = std::to_string(agent + 1);
    number.insert(0, width - number.size(), '0');
    return "model_agent_" + number + ".json";
}

struct GenDataArgs {
    int classes = 5;
    int modes = 3;
    double radius = 1.0;
    double sigma_data = 0.2;
    double sigma_centers = 1.0;
    int n_train = 5000;
    int n_test = 2500;
    std::uint64_t seed = 1;
    std::string out_dir;
};

int run_gen_data(const GenDataArgs& args) {
    dkl::GmmSpec spec;
    spec.classes = args.classes;
    spec.modes_per_class = args.modes;
    spec.class_center_radius = args.radius;
    spec.sigma_sq_data = args.sigma_data;
    spec.sigma_sq_centers = args.sigma_centers;

    // Train and test come from one stream so they share the mode centers.
    const dkl::Dataset all = dkl::sample_gmm(spec, args.n_train + args.n_test, args.seed);
    dkl::Dataset train;
    train.features = all.features.topRows(args.n_train);
    train.labels.assign(all.labels.begin(), all.labels.begin() + args.n_train);
    dkl::Dataset test;
    test.features = all.features.bottomRows(args.n_test);
    test.labels.assign(all.labels.begin() + args.n_train, all.labels.end());

    fs::create_directories(args.out_dir);
    dkl::save_csv(train, fs::path(args.out_dir) / "train.csv");
    dkl::save_csv(test, fs::path(args.out_dir) / "test.csv");

    std::map<int, int> train_counts;
    std::map<int, int> test_counts;
    for (int label : train.labels) {
        ++train_counts[label];
    }
    for (int label : test.labels) {
        ++test_counts[label];
    }
    std::cout << "wrote " << train.size() << " train and " << test.size() << " test samples to "
              << args.out_dir << "\n";
    for (int y = 1; y <= spec.classes; ++y) {
        std::cout << "  class " << y << ": " << train_counts[y] << " train, " << test_counts[y]
                  << " test\n";
    }
    return kExitOk;
}

struct TrainArgs {
    std::string config_path;
    std::string train_path;
    std::string test_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

int run_train(const TrainArgs& args) {
    dkl::ExperimentConfig cfg;
    try {
        std::ifstream in(args.config_path);
        if (!in) {
            std::cerr << "cannot open config " << args.config_path << "\n";
            return kExitIo;
        }
        json j;
        in >> j;
        cfg = j.get<dkl::ExperimentConfig>();
    } catch (const dkl::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const json::exception& e) {
        std::cerr << "config parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration:\n  - " << e.what() << "\n";
        return kExitUsage;
    }
    if (args.seed_set) {
        cfg.seed = args.seed;
    }
    if (args.threads > 0) {
        cfg.threads = args.threads;
    }
    try {
        cfg.validate();
    } catch (const dkl::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    dkl::Dataset train;
    dkl::Dataset test;
    try {
        train = dkl::load_csv(args.train_path);
        test = dkl::load_csv(args.test_path);
    } catch (const std::exception& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return kExitIo;
    }

    const auto start = std::chrono::steady_clock::now();
    dkl::RunResult result;
    try {
        result = dkl::run_experiment(cfg, train, test);
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid run: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return kExitIo;
    }
    const double duration =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    try {
        fs::create_directories(args.out_dir);
        const fs::path out_dir(args.out_dir);

        const fs::path metrics_path = out_dir / "metrics.csv";
        {
            std::ofstream out(metrics_path);
            out << dkl::metrics_to_csv(result.metrics, cfg.graph.num_agents);
            if (!out) {
                throw std::runtime_error("write failed: " + metrics_path.string());
            }
        }

        const fs::path graph_path = out_dir / "graph.txt";
        dkl::save_graph(result.graph, graph_path);

        std::vector<std::string> model_files;
        for (int i = 0; i < cfg.graph.num_agents; ++i) {
            const std::string name = model_file_name(i, cfg.graph.num_agents);
            dkl::save_expansion(result.models[i], out_dir / name);
            model_files.push_back(name);
        }

        json edges = json::array();
        for (const auto& [i, j] : result.graph.edges) {
            edges.push_back({i + 1, j + 1});
        }
        json manifest = {
            {"config", cfg},
            {"derived_seeds", {{"graph", dkl::graph_seed(cfg.seed)}}},
            {"datasets",
             {{"train", {{"path", args.train_path}, {"fnv1a64", fnv1a64_hex(args.train_path)}}},
              {"test", {{"path", args.test_path}, {"fnv1a64", fnv1a64_hex(args.test_path)}}}}},
            {"graph", {{"num_agents", result.graph.num_agents}, {"edges", edges}}},
            {"outputs",
             {{"metrics", "metrics.csv"}, {"graph", "graph.txt"}, {"models", model_files}}},
            {"duration_seconds", duration},
            {"diverged", result.diverged},
        };
        if (result.diverged) {
            manifest["divergence_round"] = result.divergence_round;
            manifest["divergence_reason"] = result.divergence_reason;
        }
        if (cfg.check_budget) {
            manifest["budget_checks"] = result.budget_checks;
            manifest["budget_violations"] = result.budget_violations;
            manifest["max_budget_excess"] = result.max_budget_excess;
        }
        std::ofstream out(out_dir / "manifest.json");
        out << manifest.dump(1) << "\n";
        if (!out) {
            throw std::runtime_error("write failed: manifest.json");
        }
    } catch (const std::exception& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return kExitIo;
    }

    if (result.diverged) {
        std::cerr << "divergence: " << result.divergence_reason << "\n";
        return kExitDiverged;
    }
    const auto& final_row = result.metrics.back();
    std::cout << "completed " << cfg.rounds << " rounds in " << dkl::format_double(duration)
              << "s; final objective " << dkl::format_double(final_row.objective) << "\n";
    return kExitOk;
}

struct EvaluateArgs {
    std::string models_dir;
    std::string test_path;
    std::string graph_path;
};

int run_evaluate(const EvaluateArgs& args) {
    try {
        const dkl::Graph graph = dkl::load_graph(args.graph_path);
        const dkl::Dataset test = dkl::load_csv(args.test_path);

        std::vector<dkl::FunctionExpansion> models;
        for (int i = 0; i < graph.num_agents; ++i) {
            const fs::path path =
                fs::path(args.models_dir) / model_file_name(i, graph.num_agents);
            if (!fs::exists(path)) {
                std::cerr << "missing checkpoint " << path.string() << "\n";
                return kExitIo;
            }
            models.push_back(dkl::load_expansion(path));
        }

        int classes = models.front().classes();
        dkl::LossSpec logistic{dkl::LossKind::Logistic, classes};

        json per_agent = json::array();
        for (const auto& model : models) {
            per_agent.push_back(dkl::eval_accuracy(model, test));
        }
        json out = {
            {"per_agent_accuracy", per_agent},
            {"objective", dkl::eval_objective(models, logistic, test)},
            {"disagreement", dkl::eval_disagreement(models, graph)},
            {"constraint_violation", dkl::eval_constraint_violation(models, test, graph)},
        };
        std::cout << out.dump(1) << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "evaluate failed: " << e.what() << "\n";
        return kExitIo;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decentralized online kernel classification simulator"};
    app.require_subcommand(1);

    GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "generate a Gaussian-mixture dataset");
    gen_cmd->add_option("--classes", gen.classes, "number of classes")->capture_default_str();
    gen_cmd->add_option("--modes", gen.modes, "mixture modes per class")->capture_default_str();
    gen_cmd->add_option("--radius", gen.radius, "class-anchor circle radius")
        ->capture_default_str();
    gen_cmd->add_option("--sigma-data", gen.sigma_data, "within-mode variance")
        ->capture_default_str();
    gen_cmd->add_option("--sigma-centers", gen.sigma_centers, "mode-center variance")
        ->capture_default_str();
    gen_cmd->add_option("--n-train", gen.n_train, "training samples")->capture_default_str();
    gen_cmd->add_option("--n-test", gen.n_test, "test samples")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
    gen_cmd->add_option("--out-dir", gen.out_dir, "output directory")->required();

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "run a training experiment");
    train_cmd->add_option("--config", train.config_path, "experiment config JSON")->required();
    train_cmd->add_option("--train", train.train_path, "training CSV")->required();
    train_cmd->add_option("--test", train.test_path, "test CSV")->required();
    train_cmd->add_option("--out-dir", train.out_dir, "output directory")->required();
    train_cmd->add_option("--seed", train.seed, "override the config seed")
        ->each([&train](const std::string&) { train.seed_set = true; });
    train_cmd->add_option("--threads", train.threads, "override the config worker count");

    EvaluateArgs eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate saved checkpoints");
    eval_cmd->add_option("--models", eval.models_dir, "directory of model checkpoints")
        ->required();
    eval_cmd->add_option("--test", eval.test_path, "test CSV")->required();
    eval_cmd->add_option("--graph", eval.graph_path, "graph edge-list file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (gen_cmd->parsed()) {
        try {
            return run_gen_data(gen);
        } catch (const std::invalid_argument& e) {
            std::cerr << "invalid arguments: " << e.what() << "\n";
            return kExitUsage;
        } catch (const std::exception& e) {
            std::cerr << "gen-data failed: " << e.what() << "\n";
            return kExitIo;
        }
    }
    if (train_cmd->parsed()) {
        return run_train(train);
    }
    if (eval_cmd->parsed()) {
        return run_evaluate(eval);
    }
    return kExitUsage;
}
