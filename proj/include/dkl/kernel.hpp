#pragma once

#include <Eigen/Dense>

#include "json.hpp"

namespace dkl {

enum class KernelKind { Gaussian, Polynomial };

/// Positive-semidefinite kernel. Gaussian: exp(-|x-y|^2 / (2 bandwidth^2)).
/// Polynomial: (x.y + offset)^degree.
struct KernelSpec {
    KernelKind kind = KernelKind::Gaussian;
    double bandwidth = 1.0;  // gaussian only, > 0
    double offset = 0.0;     // polynomial only, >= 0
    int degree = 1;          // polynomial only, >= 1

    void validate() const;  // throws std::invalid_argument
    bool operator==(const KernelSpec&) const = default;

    static KernelSpec gaussian(double bandwidth) {
        return {KernelKind::Gaussian, bandwidth, 0.0, 1};
    }
    static KernelSpec polynomial(double offset, int degree) {
        return {KernelKind::Polynomial, 1.0, offset, degree};
    }
};

void to_json(nlohmann::json& j, const KernelSpec& spec);
void from_json(const nlohmann::json& j, KernelSpec& spec);

/// k(x, y). Evaluation is symmetric term by term, so swapping the arguments
/// returns the identical double.
double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y);

/// Gram matrix of the columns of X (p x M): entry (m, n) = k(x_m, x_n).
/// Built entrywise from kernel_eval with the upper triangle mirrored, so the
/// result is exactly symmetric.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Cross-kernel matrix between the columns of X (p x M) and Y (p x N):
/// entry (m, n) = k(x_m, y_n).
Eigen::MatrixXd cross_kernel(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const Eigen::Ref<const Eigen::MatrixXd>& Y);

/// Diagnostic bound sup sqrt(k(x, x)) over the given points. Gaussian
/// kernels return 1 regardless of the points; polynomial kernels take the
/// maximum over the supplied columns (0 when empty).
double kernel_self_bound(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& points);

}  // namespace dkl
