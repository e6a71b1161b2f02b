#pragma once

#include <filesystem>

#include <Eigen/Dense>

#include "dkl/kernel.hpp"
#include "json.hpp"

namespace dkl {

/// Kernel expansion f(.) = sum_m weights(m, :) * k(d_m, .): one shared
/// dictionary of atoms (columns of `dictionary`) and one weight column per
/// class. An empty dictionary with 0 x D weights is the zero function.
/// Treated as an immutable value after construction.
struct FunctionExpansion {
    KernelSpec kernel;
    Eigen::MatrixXd dictionary;  // p x M, atoms as columns
    Eigen::MatrixXd weights;     // M x D

    int model_order() const { return static_cast<int>(dictionary.cols()); }
    int dim() const { return static_cast<int>(dictionary.rows()); }
    int classes() const { return static_cast<int>(weights.cols()); }

    void validate() const;  // shape consistency + finite entries

    static FunctionExpansion zero(const KernelSpec& kernel, int dim, int classes);
};

/// Per-class activations at x: weights^T * [k(d_m, x)]_m. The zero function
/// returns a zero vector.
Eigen::VectorXd evaluate(const FunctionExpansion& f, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Squared Hilbert norm sum_d w_d^T K w_d over the product space of class
/// functions. Round-off negatives within tolerance are clamped to 0; larger
/// negatives throw NumericalError since the Gram quadratic form is PSD.
double hilbert_norm_sq(const FunctionExpansion& f);

/// Squared Hilbert distance between two expansions over possibly different
/// dictionaries (same kernel and class count). Symmetric, clamped at 0.
double hilbert_dist_sq(const FunctionExpansion& f, const FunctionExpansion& g);

/// New expansion with `points` appended to the dictionary, the existing
/// weight rows scaled by `scale_existing`, and `new_weights` rows appended.
FunctionExpansion append_atoms(const FunctionExpansion& f,
                               const Eigen::Ref<const Eigen::MatrixXd>& points,
                               const Eigen::Ref<const Eigen::MatrixXd>& new_weights,
                               double scale_existing);

/// Checkpoint document {kernel, p, M, D, dictionary, weights}. Doubles are
/// emitted with shortest round-trip precision, so load(save(f)) reproduces
/// every entry bit for bit.
nlohmann::json expansion_to_json(const FunctionExpansion& f);
FunctionExpansion expansion_from_json(const nlohmann::json& j);

void save_expansion(const FunctionExpansion& f, const std::filesystem::path& path);
FunctionExpansion load_expansion(const std::filesystem::path& path);

}  // namespace dkl
