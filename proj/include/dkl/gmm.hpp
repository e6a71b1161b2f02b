#pragma once

#include <cstdint>

#include "dkl/dataset.hpp"

namespace dkl {

/// Planar Gaussian mixture with class anchors equitably spaced on a circle:
/// anchor theta_y = radius * (cos 2*pi*y/D, sin 2*pi*y/D), mode centers
/// mu_{y,j} ~ N(theta_y, sigma_sq_centers I) drawn once per dataset, samples
/// x ~ N(mu_{y,j}, sigma_sq_data I) with y and j uniform.
struct GmmSpec {
    int classes = 5;
    int dim = 2;  // the circle construction is planar; other dims rejected
    int modes_per_class = 3;
    double class_center_radius = 1.0;
    double sigma_sq_centers = 1.0;
    double sigma_sq_data = 0.2;

    void validate() const;
};

/// Deterministic for a given seed, and prefix-consistent: the same seed with
/// a larger n extends the sample stream without changing earlier rows.
Dataset sample_gmm(const GmmSpec& spec, int n, std::uint64_t seed);

}  // namespace dkl
