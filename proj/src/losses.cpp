#include "dkl/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dkl {

namespace {

void check_label(const LossSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& activations,
                 int label) {
    if (activations.size() != spec.classes) {
        throw std::invalid_argument("loss: activation length does not match class count");
    }
    if (label < 1 || label > spec.classes) {
        throw std::invalid_argument("loss: label " + std::to_string(label) + " outside {1.." +
                                    std::to_string(spec.classes) + "}");
    }
}

Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& activations) {
    const Eigen::VectorXd shifted = activations.array() - activations.maxCoeff();
    const Eigen::VectorXd exps = shifted.array().exp();
    return exps / exps.sum();
}

// Largest competitor index (0-based) among d != y, lowest index on ties.
int hinge_rival(const Eigen::Ref<const Eigen::VectorXd>& activations, int y_index) {
    int rival = y_index == 0 ? 1 : 0;
    for (int d = 0; d < activations.size(); ++d) {
        if (d != y_index && activations(d) > activations(rival)) {
            rival = d;
        }
    }
    return rival;
}

}  // namespace

void LossSpec::validate() const {
    if (classes < 2) {
        throw std::invalid_argument("loss requires at least 2 classes");
    }
}

void to_json(nlohmann::json& j, const LossSpec& spec) {
    j = {{"kind", spec.kind == LossKind::Logistic ? "logistic" : "hinge"},
         {"classes", spec.classes}};
}

void from_json(const nlohmann::json& j, LossSpec& spec) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "logistic") {
        spec.kind = LossKind::Logistic;
    } else if (kind == "hinge") {
        spec.kind = LossKind::Hinge;
    } else {
        throw std::invalid_argument("unknown loss kind: " + kind);
    }
    spec.classes = j.at("classes").get<int>();
    spec.validate();
}

double loss(const LossSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& activations,
            int label) {
    check_label(spec, activations, label);
    const int y = label - 1;
    switch (spec.kind) {
        case LossKind::Logistic: {
            const double shift = activations.maxCoeff();
            const double log_sum = std::log((activations.array() - shift).exp().sum());
            return std::max(0.0, log_sum - (activations(y) - shift));
        }
        case LossKind::Hinge: {
            const int r = hinge_rival(activations, y);
            return std::max(0.0, 1.0 + activations(r) - activations(y));
        }
    }
    throw std::invalid_argument("loss: unknown kind");
}

Eigen::VectorXd loss_grad(const LossSpec& spec,
                          const Eigen::Ref<const Eigen::VectorXd>& activations, int label) {
    check_label(spec, activations, label);
    const int y = label - 1;
    switch (spec.kind) {
        case LossKind::Logistic: {
            Eigen::VectorXd grad = softmax(activations);
            grad(y) -= 1.0;
            return grad;
        }
        case LossKind::Hinge: {
            Eigen::VectorXd grad = Eigen::VectorXd::Zero(spec.classes);
            const int r = hinge_rival(activations, y);
            if (1.0 + activations(r) - activations(y) > 0.0) {
                grad(r) = 1.0;
                grad(y) = -1.0;
            }
            return grad;
        }
    }
    throw std::invalid_argument("loss_grad: unknown kind");
}

int predict(const Eigen::Ref<const Eigen::VectorXd>& activations) {
    if (activations.size() < 1) {
        throw std::invalid_argument("predict: empty activations");
    }
    int best = 0;
    for (int d = 1; d < activations.size(); ++d) {
        if (activations(d) > activations(best)) {
            best = d;
        }
    }
    return best + 1;
}

}  // namespace dkl
