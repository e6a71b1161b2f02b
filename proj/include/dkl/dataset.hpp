#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace dkl {

/// Labeled samples: one feature row per sample, 1-based class labels.
struct Dataset {
    Eigen::MatrixXd features;  // N x p
    std::vector<int> labels;   // values in {1..D}

    int size() const { return static_cast<int>(features.rows()); }
    int dim() const { return static_cast<int>(features.cols()); }

    /// Row counts match, labels >= 1, all features finite.
    void validate() const;
};

/// CSV with header "f1,...,fp,label". Features round-trip at full double
/// precision (shortest exact representation).
void save_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset load_csv(const std::filesystem::path& path);

}  // namespace dkl
