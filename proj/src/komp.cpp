#include "dkl/komp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dkl/errors.hpp"

namespace dkl {

namespace {

// Residuals are differences of O(scale) quadratic-form terms, so anything
// below this relative level is cancellation noise, not signal. Flooring it
// to zero keeps exactly redundant atoms removable under a zero budget.
constexpr double kResidualNoiseFloor = 100.0 * std::numeric_limits<double>::epsilon();

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& gram, std::span<const int> rows,
                          std::span<const int> cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(i, j) = gram(rows[i], cols[j]);
        }
    }
    return out;
}

// Solve (K_rr + jitter * mean(diag K_rr) I) W = K_r. * W_full for the
// least-squares weights over the kept atoms.
Eigen::MatrixXd solve_restricted(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& full_weights,
                                 std::span<const int> kept, double jitter) {
    const Eigen::Index m = static_cast<Eigen::Index>(kept.size());
    if (m == 0) {
        return Eigen::MatrixXd(0, full_weights.cols());
    }
    Eigen::MatrixXd reduced = submatrix(gram, kept, kept);
    Eigen::MatrixXd rhs(m, full_weights.cols());
    for (Eigen::Index i = 0; i < m; ++i) {
        rhs.row(i) = gram.row(kept[i]) * full_weights;
    }
    const double ridge = jitter * reduced.diagonal().mean();
    reduced.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> solver(reduced);
    Eigen::MatrixXd solution;
    if (solver.info() == Eigen::Success) {
        solution = solver.solve(rhs);
    }
    if (solver.info() != Eigen::Success || !solution.allFinite()) {
        const double dmin = reduced.diagonal().minCoeff();
        const double dmax = reduced.diagonal().maxCoeff();
        throw NumericalError("komp: reduced Gram system of size " + std::to_string(m) +
                             " is singular after jitter " + std::to_string(ridge) +
                             " (diag range [" + std::to_string(dmin) + ", " +
                             std::to_string(dmax) + "])");
    }
    return solution;
}

// Product-space residual norm of approximating (gram, full_weights) by
// kept_weights over the kept atoms: sqrt of sum over classes of
// |f_d|^2 - 2 w'^T b_d + w'^T K_rr w', floored against cancellation noise.
double residual_norm(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& full_weights,
                     const Eigen::VectorXd& class_norms_sq, std::span<const int> kept,
                     const Eigen::MatrixXd& kept_weights) {
    const Eigen::Index classes = full_weights.cols();
    if (kept.empty()) {
        double total = 0.0;
        for (Eigen::Index d = 0; d < classes; ++d) {
            total += std::max(0.0, class_norms_sq(d));
        }
        return std::sqrt(total);
    }
    const Eigen::MatrixXd reduced = submatrix(gram, kept, kept);
    Eigen::MatrixXd cross(kept.size(), classes);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        cross.row(i) = gram.row(kept[i]) * full_weights;
    }
    double total = 0.0;
    for (Eigen::Index d = 0; d < classes; ++d) {
        const double fit = kept_weights.col(d).dot(cross.col(d));
        const double self = kept_weights.col(d).dot(reduced * kept_weights.col(d));
        const double res = class_norms_sq(d) - 2.0 * fit + self;
        const double scale =
            std::abs(class_norms_sq(d)) + 2.0 * std::abs(fit) + std::abs(self);
        if (res > kResidualNoiseFloor * scale) {
            total += res;
        }
    }
    return std::sqrt(total);
}

Eigen::VectorXd per_class_norms_sq(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& weights) {
    Eigen::VectorXd norms(weights.cols());
    for (Eigen::Index d = 0; d < weights.cols(); ++d) {
        norms(d) = weights.col(d).dot(gram * weights.col(d));
    }
    return norms;
}

std::vector<int> erase_index(std::vector<int> values, std::size_t position) {
    values.erase(values.begin() + static_cast<std::ptrdiff_t>(position));
    return values;
}

}  // namespace

void KompBudget::validate() const {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw std::invalid_argument("komp: epsilon must be >= 0");
    }
    if (!(jitter >= 0.0) || !std::isfinite(jitter)) {
        throw std::invalid_argument("komp: jitter must be >= 0");
    }
}

double prune_error(const FunctionExpansion& f_tilde, int j, double jitter) {
    const int m = f_tilde.model_order();
    if (j < 0 || j >= m) {
        throw std::invalid_argument("prune_error: index " + std::to_string(j) +
                                    " out of range for model order " + std::to_string(m));
    }
    const Eigen::MatrixXd gram = gram_matrix(f_tilde.kernel, f_tilde.dictionary);
    const Eigen::VectorXd norms = per_class_norms_sq(gram, f_tilde.weights);
    std::vector<int> kept(m);
    std::iota(kept.begin(), kept.end(), 0);
    kept.erase(kept.begin() + j);
    const Eigen::MatrixXd candidate = solve_restricted(gram, f_tilde.weights, kept, jitter);
    return residual_norm(gram, f_tilde.weights, norms, kept, candidate);
}

Eigen::MatrixXd refit(const FunctionExpansion& target, std::span<const int> kept, double jitter) {
    for (int idx : kept) {
        if (idx < 0 || idx >= target.model_order()) {
            throw std::invalid_argument("refit: atom index out of range");
        }
    }
    const Eigen::MatrixXd gram = gram_matrix(target.kernel, target.dictionary);
    return solve_restricted(gram, target.weights, kept, jitter);
}

Eigen::MatrixXd refit(const FunctionExpansion& target,
                      const Eigen::Ref<const Eigen::MatrixXd>& kept_dictionary, double jitter) {
    std::vector<int> kept;
    std::vector<bool> used(target.model_order(), false);
    for (Eigen::Index c = 0; c < kept_dictionary.cols(); ++c) {
        int match = -1;
        for (int a = 0; a < target.model_order(); ++a) {
            if (!used[a] && target.dictionary.col(a) == kept_dictionary.col(c)) {
                match = a;
                break;
            }
        }
        if (match < 0) {
            throw std::invalid_argument("refit: kept column " + std::to_string(c) +
                                        " is not an atom of the target dictionary");
        }
        used[match] = true;
        kept.push_back(match);
    }
    return refit(target, kept, jitter);
}

FunctionExpansion komp(const FunctionExpansion& f_tilde, const KompBudget& budget,
                       KompTrace* trace) {
    budget.validate();
    f_tilde.validate();
    const int m = f_tilde.model_order();
    if (trace != nullptr) {
        trace->sweeps.clear();
    }
    if (m == 0) {
        return f_tilde;
    }

    const Eigen::MatrixXd gram = gram_matrix(f_tilde.kernel, f_tilde.dictionary);
    const Eigen::VectorXd norms = per_class_norms_sq(gram, f_tilde.weights);

    std::vector<int> keep(m);
    std::iota(keep.begin(), keep.end(), 0);
    Eigen::MatrixXd current_weights = f_tilde.weights;
    bool removed_any = false;

    while (!keep.empty()) {
        KompSweep sweep;
        sweep.candidates = keep;
        sweep.gammas.resize(keep.size());

        std::size_t best = 0;
        double best_gamma = std::numeric_limits<double>::infinity();
        Eigen::MatrixXd best_weights;
        for (std::size_t q = 0; q < keep.size(); ++q) {
            const std::vector<int> reduced = erase_index(keep, q);
            const Eigen::MatrixXd candidate =
                solve_restricted(gram, f_tilde.weights, reduced, budget.jitter);
            const double gamma =
                residual_norm(gram, f_tilde.weights, norms, reduced, candidate);
            sweep.gammas[q] = gamma;
            if (gamma < best_gamma) {
                best_gamma = gamma;
                best = q;
                best_weights = candidate;
            }
        }

        const bool stop = best_gamma > budget.epsilon;
        sweep.removed = stop ? -1 : keep[best];
        if (trace != nullptr) {
            trace->sweeps.push_back(std::move(sweep));
        }
        if (stop) {
            break;
        }
        keep = erase_index(std::move(keep), best);
        current_weights = std::move(best_weights);
        removed_any = true;
    }

    if (!removed_any) {
        return f_tilde;
    }
    FunctionExpansion out;
    out.kernel = f_tilde.kernel;
    out.dictionary.resize(f_tilde.dim(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.dictionary.col(static_cast<Eigen::Index>(i)) = f_tilde.dictionary.col(keep[i]);
    }
    out.weights = keep.empty() ? Eigen::MatrixXd(0, f_tilde.classes()) : current_weights;
    return out;
}

}  // namespace dkl
