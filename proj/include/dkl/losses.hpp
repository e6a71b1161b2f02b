#pragma once

#include <Eigen/Dense>

#include "json.hpp"

namespace dkl {

enum class LossKind { Logistic, Hinge };

/// Multi-class instantaneous loss over activation vectors. Class labels are
/// 1-based throughout (class d corresponds to activation index d-1).
struct LossSpec {
    LossKind kind = LossKind::Logistic;
    int classes = 2;

    void validate() const;
    bool operator==(const LossSpec&) const = default;
};

void to_json(nlohmann::json& j, const LossSpec& spec);
void from_json(const nlohmann::json& j, LossSpec& spec);

/// Logistic: -log softmax(a)[y], computed with max-subtraction.
/// Hinge: max(0, 1 + a_r - a_y) with r = argmax over d != y (lowest index on
/// ties). Both are nonnegative.
double loss(const LossSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& activations, int label);

/// Derivative of the loss in activation space. Logistic: softmax(a) -
/// onehot(y). Hinge subgradient: +1 at r and -1 at y while the margin term is
/// strictly positive, zero vector otherwise.
Eigen::VectorXd loss_grad(const LossSpec& spec,
                          const Eigen::Ref<const Eigen::VectorXd>& activations, int label);

/// 1-based argmax with ties broken toward the lowest index.
int predict(const Eigen::Ref<const Eigen::VectorXd>& activations);

}  // namespace dkl
