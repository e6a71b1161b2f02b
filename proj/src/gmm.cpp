#include "dkl/gmm.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dkl/rng.hpp"

namespace dkl {

void GmmSpec::validate() const {
    if (classes < 1) {
        throw std::invalid_argument("gmm: classes must be >= 1");
    }
    if (dim != 2) {
        throw std::invalid_argument("gmm: the unit-circle construction requires dim == 2");
    }
    if (modes_per_class < 1) {
        throw std::invalid_argument("gmm: modes_per_class must be >= 1");
    }
    if (!(class_center_radius > 0.0)) {
        throw std::invalid_argument("gmm: class_center_radius must be > 0");
    }
    if (!(sigma_sq_centers > 0.0) || !(sigma_sq_data > 0.0)) {
        throw std::invalid_argument("gmm: variances must be > 0");
    }
}

Dataset sample_gmm(const GmmSpec& spec, int n, std::uint64_t seed) {
    spec.validate();
    if (n < 0) {
        throw std::invalid_argument("gmm: sample count must be >= 0");
    }
    Rng rng(seed);
    const double center_sd = std::sqrt(spec.sigma_sq_centers);
    const double data_sd = std::sqrt(spec.sigma_sq_data);

    // Mode centers are drawn once, before any sample, so streams with the
    // same seed agree on every prefix.
    std::vector<Eigen::Vector2d> centers(
        static_cast<std::size_t>(spec.classes) * spec.modes_per_class);
    for (int y = 1; y <= spec.classes; ++y) {
        const double angle = 2.0 * std::numbers::pi * y / spec.classes;
        const Eigen::Vector2d anchor(spec.class_center_radius * std::cos(angle),
                                     spec.class_center_radius * std::sin(angle));
        for (int j = 0; j < spec.modes_per_class; ++j) {
            Eigen::Vector2d noise;
            noise.x() = rng.normal();
            noise.y() = rng.normal();
            centers[static_cast<std::size_t>(y - 1) * spec.modes_per_class + j] =
                anchor + center_sd * noise;
        }
    }

    Dataset ds;
    ds.features.resize(n, 2);
    ds.labels.resize(n);
    for (int row = 0; row < n; ++row) {
        const int y = 1 + static_cast<int>(rng.uniform_int(spec.classes));
        const int j = static_cast<int>(rng.uniform_int(spec.modes_per_class));
        const auto& mu = centers[static_cast<std::size_t>(y - 1) * spec.modes_per_class + j];
        ds.features(row, 0) = mu.x() + data_sd * rng.normal();
        ds.features(row, 1) = mu.y() + data_sd * rng.normal();
        ds.labels[row] = y;
    }
    ds.validate();
    return ds;
}

}  // namespace dkl
