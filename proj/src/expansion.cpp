#include "dkl/expansion.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "dkl/errors.hpp"

namespace dkl {

namespace {

// Clamp a PSD quadratic form against round-off: values in [-tol, 0) become 0
// with tol = 1e-8 * max(1, scale), anything more negative indicates a broken
// Gram matrix. `scale` is the absolute-sum bound of the accumulated terms.
double clamp_quadratic(double value, double scale, const char* what) {
    if (value >= 0.0) {
        return value;
    }
    const double tol = 1e-8 * std::max(1.0, scale);
    if (value >= -tol) {
        return 0.0;
    }
    throw NumericalError(std::string(what) + ": quadratic form is negative beyond tolerance (" +
                         std::to_string(value) + ")");
}

}  // namespace

void FunctionExpansion::validate() const {
    kernel.validate();
    if (weights.rows() != dictionary.cols()) {
        throw std::invalid_argument("expansion: weight rows (" + std::to_string(weights.rows()) +
                                    ") must match dictionary atoms (" +
                                    std::to_string(dictionary.cols()) + ")");
    }
    if (weights.cols() < 1) {
        throw std::invalid_argument("expansion: needs at least one class column");
    }
    if (!dictionary.allFinite() || !weights.allFinite()) {
        throw std::invalid_argument("expansion: non-finite entries");
    }
}

FunctionExpansion FunctionExpansion::zero(const KernelSpec& kernel, int dim, int classes) {
    FunctionExpansion f;
    f.kernel = kernel;
    f.dictionary = Eigen::MatrixXd(dim, 0);
    f.weights = Eigen::MatrixXd(0, classes);
    return f;
}

Eigen::VectorXd evaluate(const FunctionExpansion& f, const Eigen::Ref<const Eigen::VectorXd>& x) {
    const int m = f.model_order();
    if (m == 0) {
        return Eigen::VectorXd::Zero(f.classes());
    }
    if (x.size() != f.dictionary.rows()) {
        throw std::invalid_argument("evaluate: point dimension mismatch");
    }
    Eigen::VectorXd k(m);
    for (int i = 0; i < m; ++i) {
        k(i) = kernel_eval(f.kernel, f.dictionary.col(i), x);
    }
    return f.weights.transpose() * k;
}

double hilbert_norm_sq(const FunctionExpansion& f) {
    if (f.model_order() == 0) {
        return 0.0;
    }
    const Eigen::MatrixXd gram = gram_matrix(f.kernel, f.dictionary);
    const double value = (f.weights.array() * (gram * f.weights).array()).sum();
    const double scale =
        (f.weights.array().abs() * (gram.cwiseAbs() * f.weights.cwiseAbs()).array()).sum();
    return clamp_quadratic(value, scale, "hilbert_norm_sq");
}

double hilbert_dist_sq(const FunctionExpansion& f, const FunctionExpansion& g) {
    if (f.kernel != g.kernel) {
        throw std::invalid_argument("hilbert_dist_sq: kernel mismatch");
    }
    if (f.classes() != g.classes()) {
        throw std::invalid_argument("hilbert_dist_sq: class count mismatch");
    }
    if (f.model_order() == 0 && g.model_order() == 0) {
        return 0.0;
    }
    if (f.model_order() == 0) {
        return hilbert_norm_sq(g);
    }
    if (g.model_order() == 0) {
        return hilbert_norm_sq(f);
    }
    const Eigen::MatrixXd gram_ff = gram_matrix(f.kernel, f.dictionary);
    const Eigen::MatrixXd gram_gg = gram_matrix(f.kernel, g.dictionary);
    const Eigen::MatrixXd gram_fg = cross_kernel(f.kernel, f.dictionary, g.dictionary);
    const double ff = (f.weights.array() * (gram_ff * f.weights).array()).sum();
    const double gg = (g.weights.array() * (gram_gg * g.weights).array()).sum();
    const double fg = (f.weights.array() * (gram_fg * g.weights).array()).sum();
    const double scale = std::abs(ff) + std::abs(gg) + 2.0 * std::abs(fg);
    return clamp_quadratic(ff - 2.0 * fg + gg, scale, "hilbert_dist_sq");
}

FunctionExpansion append_atoms(const FunctionExpansion& f,
                               const Eigen::Ref<const Eigen::MatrixXd>& points,
                               const Eigen::Ref<const Eigen::MatrixXd>& new_weights,
                               double scale_existing) {
    if (points.cols() != new_weights.rows()) {
        throw std::invalid_argument("append_atoms: points/weights count mismatch");
    }
    if (new_weights.rows() > 0 && new_weights.cols() != f.classes()) {
        throw std::invalid_argument("append_atoms: class count mismatch");
    }
    if (points.cols() > 0 && points.rows() != f.dictionary.rows()) {
        throw std::invalid_argument("append_atoms: point dimension mismatch");
    }
    FunctionExpansion out;
    out.kernel = f.kernel;
    out.dictionary.resize(f.dim(), f.model_order() + points.cols());
    out.dictionary << f.dictionary, points;
    out.weights.resize(f.model_order() + new_weights.rows(), f.classes());
    out.weights << scale_existing * f.weights, new_weights;
    return out;
}

nlohmann::json expansion_to_json(const FunctionExpansion& f) {
    nlohmann::json j;
    j["kernel"] = f.kernel;
    j["p"] = f.dim();
    j["M"] = f.model_order();
    j["D"] = f.classes();
    auto rows = nlohmann::json::array();
    for (int m = 0; m < f.model_order(); ++m) {
        auto atom = nlohmann::json::array();
        for (int i = 0; i < f.dim(); ++i) {
            atom.push_back(f.dictionary(i, m));
        }
        rows.push_back(std::move(atom));
    }
    j["dictionary"] = std::move(rows);
    auto wrows = nlohmann::json::array();
    for (int m = 0; m < f.model_order(); ++m) {
        auto row = nlohmann::json::array();
        for (int d = 0; d < f.classes(); ++d) {
            row.push_back(f.weights(m, d));
        }
        wrows.push_back(std::move(row));
    }
    j["weights"] = std::move(wrows);
    return j;
}

FunctionExpansion expansion_from_json(const nlohmann::json& j) {
    FunctionExpansion f;
    f.kernel = j.at("kernel").get<KernelSpec>();
    const int p = j.at("p").get<int>();
    const int m = j.at("M").get<int>();
    const int d = j.at("D").get<int>();
    f.dictionary.resize(p, m);
    f.weights.resize(m, d);
    const auto& atoms = j.at("dictionary");
    const auto& weight_rows = j.at("weights");
    if (static_cast<int>(atoms.size()) != m || static_cast<int>(weight_rows.size()) != m) {
        throw ParseError("expansion checkpoint: row count does not match M");
    }
    for (int a = 0; a < m; ++a) {
        if (static_cast<int>(atoms[a].size()) != p || static_cast<int>(weight_rows[a].size()) != d) {
            throw ParseError("expansion checkpoint: ragged row at atom " + std::to_string(a));
        }
        for (int i = 0; i < p; ++i) {
            f.dictionary(i, a) = atoms[a][i].get<double>();
        }
        for (int c = 0; c < d; ++c) {
            f.weights(a, c) = weight_rows[a][c].get<double>();
        }
    }
    f.validate();
    return f;
}

void save_expansion(const FunctionExpansion& f, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << expansion_to_json(f).dump(1) << '\n';
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

FunctionExpansion load_expansion(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
        return expansion_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("corrupt checkpoint " + path.string() + ": " + e.what());
    }
}

}  // namespace dkl
