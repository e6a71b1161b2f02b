#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dkl/expansion.hpp"

namespace dkl {

/// Compression parameters: Hilbert-norm budget and the relative diagonal
/// regularization applied to reduced Gram systems (gaussian Gram matrices
/// with near-duplicate atoms are near-singular).
struct KompBudget {
    double epsilon = 0.0;
    double jitter = 1e-10;

    void validate() const;
};

/// One pruning sweep: the candidate atoms (original input indices), their
/// removal errors, and the atom removed (-1 when the sweep terminated).
struct KompSweep {
    std::vector<int> candidates;
    std::vector<double> gammas;
    int removed = -1;
};

struct KompTrace {
    std::vector<KompSweep> sweeps;
};

/// Removal error gamma_j: the minimal product-space Hilbert distance between
/// f_tilde and any expansion over its dictionary with atom j deleted. Solved
/// through the normal equations with jitter * mean(diag) regularization.
double prune_error(const FunctionExpansion& f_tilde, int j, double jitter = 1e-10);

/// Least-squares weights representing `target` over the atom subset `kept`
/// (indices into target's dictionary). Returns an |kept| x D weight matrix.
Eigen::MatrixXd refit(const FunctionExpansion& target, std::span<const int> kept,
                      double jitter = 1e-10);

/// Overload taking the kept atoms as a p x M' matrix whose columns must each
/// match a distinct column of target's dictionary.
Eigen::MatrixXd refit(const FunctionExpansion& target,
                      const Eigen::Ref<const Eigen::MatrixXd>& kept_dictionary,
                      double jitter = 1e-10);

/// Destructive kernel orthogonal matching pursuit with pre-fitting: while
/// the cheapest atom removal keeps the approximation error within epsilon,
/// drop that atom (lowest index on ties) and refit all weights against the
/// original input. The result uses a subset of the input atoms and satisfies
/// |f_out - f_tilde|_H <= epsilon.
FunctionExpansion komp(const FunctionExpansion& f_tilde, const KompBudget& budget,
                       KompTrace* trace = nullptr);

}  // namespace dkl
