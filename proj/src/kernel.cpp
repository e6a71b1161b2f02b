#include "dkl/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dkl {

namespace {

// x^n for small integer n by repeated multiplication, so the same inputs
// always produce the same double.
double int_pow(double x, int n) {
    double result = 1.0;
    for (int i = 0; i < n; ++i) {
        result *= x;
    }
    return result;
}

void check_same_dim(Eigen::Index a, Eigen::Index b) {
    if (a != b) {
        throw std::invalid_argument("kernel_eval: dimension mismatch (" + std::to_string(a) +
                                    " vs " + std::to_string(b) + ")");
    }
}

}  // namespace

void KernelSpec::validate() const {
    switch (kind) {
        case KernelKind::Gaussian:
            if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
                throw std::invalid_argument("gaussian kernel requires bandwidth > 0");
            }
            break;
        case KernelKind::Polynomial:
            if (!(offset >= 0.0) || !std::isfinite(offset)) {
                throw std::invalid_argument("polynomial kernel requires offset >= 0");
            }
            if (degree < 1) {
                throw std::invalid_argument("polynomial kernel requires degree >= 1");
            }
            break;
    }
}

void to_json(nlohmann::json& j, const KernelSpec& spec) {
    switch (spec.kind) {
        case KernelKind::Gaussian:
            j = {{"kind", "gaussian"}, {"bandwidth", spec.bandwidth}};
            break;
        case KernelKind::Polynomial:
            j = {{"kind", "polynomial"}, {"offset", spec.offset}, {"degree", spec.degree}};
            break;
    }
}

void from_json(const nlohmann::json& j, KernelSpec& spec) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian") {
        spec = KernelSpec::gaussian(j.at("bandwidth").get<double>());
    } else if (kind == "polynomial") {
        spec = KernelSpec::polynomial(j.at("offset").get<double>(), j.at("degree").get<int>());
    } else {
        throw std::invalid_argument("unknown kernel kind: " + kind);
    }
    spec.validate();
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
    check_same_dim(x.size(), y.size());
    if (x.size() < 1) {
        throw std::invalid_argument("kernel_eval: empty vectors");
    }
    switch (spec.kind) {
        case KernelKind::Gaussian: {
            const double sq = (x - y).squaredNorm();
            return std::exp(-sq / (2.0 * spec.bandwidth * spec.bandwidth));
        }
        case KernelKind::Polynomial:
            return int_pow(x.dot(y) + spec.offset, spec.degree);
    }
    throw std::invalid_argument("kernel_eval: unknown kernel kind");
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& X) {
    const Eigen::Index m = X.cols();
    Eigen::MatrixXd gram(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i; j < m; ++j) {
            const double value = kernel_eval(spec, X.col(i), X.col(j));
            gram(i, j) = value;
            gram(j, i) = value;
        }
    }
    return gram;
}

Eigen::MatrixXd cross_kernel(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const Eigen::Ref<const Eigen::MatrixXd>& Y) {
    if (X.cols() > 0 && Y.cols() > 0) {
        check_same_dim(X.rows(), Y.rows());
    }
    Eigen::MatrixXd cross(X.cols(), Y.cols());
    for (Eigen::Index i = 0; i < X.cols(); ++i) {
        for (Eigen::Index j = 0; j < Y.cols(); ++j) {
            cross(i, j) = kernel_eval(spec, X.col(i), Y.col(j));
        }
    }
    return cross;
}

double kernel_self_bound(const KernelSpec& spec,
                         const Eigen::Ref<const Eigen::MatrixXd>& points) {
    if (spec.kind == KernelKind::Gaussian) {
        return 1.0;
    }
    double bound = 0.0;
    for (Eigen::Index i = 0; i < points.cols(); ++i) {
        bound = std::max(bound, std::sqrt(kernel_eval(spec, points.col(i), points.col(i))));
    }
    return bound;
}

}  // namespace dkl
