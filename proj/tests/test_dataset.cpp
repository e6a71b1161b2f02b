#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "dkl/dataset.hpp"
#include "dkl/errors.hpp"
#include "dkl/gmm.hpp"
#include "dkl/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

namespace fs = std::filesystem;

TEST_CASE("csv round trip preserves every bit") {
    dkl::Rng rng(55);
    dkl::Dataset ds;
    ds.features.resize(40, 3);
    ds.labels.resize(40);
    for (int n = 0; n < 40; ++n) {
        for (int j = 0; j < 3; ++j) {
            ds.features(n, j) = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform() * 12 - 6);
        }
        ds.labels[n] = 1 + static_cast<int>(rng.uniform_int(5));
    }
    const auto path = fs::temp_directory_path() / "dkl_csv_roundtrip.csv";
    dkl::save_csv(ds, path);
    const dkl::Dataset loaded = dkl::load_csv(path);
    fs::remove(path);

    REQUIRE(loaded.size() == ds.size());
    REQUIRE(loaded.dim() == ds.dim());
    CHECK(std::memcmp(loaded.features.data(), ds.features.data(),
                      sizeof(double) * ds.features.size()) == 0);
    CHECK(loaded.labels == ds.labels);
}

TEST_CASE("header-only csv loads as an empty dataset") {
    const auto path = fs::temp_directory_path() / "dkl_csv_empty.csv";
    {
        std::ofstream out(path);
        out << "f1,f2,label\n";
    }
    const dkl::Dataset ds = dkl::load_csv(path);
    fs::remove(path);
    CHECK(ds.size() == 0);
    CHECK(ds.dim() == 2);
}

TEST_CASE("csv errors name the offending line") {
    const auto path = fs::temp_directory_path() / "dkl_csv_bad.csv";
    {
        std::ofstream out(path);
        out << "f1,f2,label\n0.5,0.25,1\n0.5,oops,2\n";
    }
    try {
        dkl::load_csv(path);
        FAIL("expected a parse error");
    } catch (const dkl::ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    fs::remove(path);

    {
        std::ofstream out(path);
        out << "f1,g2,label\n";
    }
    CHECK_THROWS_AS(dkl::load_csv(path), dkl::ParseError);
    fs::remove(path);
}

TEST_CASE("gmm spec validation") {
    dkl::GmmSpec spec;
    spec.dim = 3;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.dim = 2;
    spec.sigma_sq_data = 0.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("single-class gmm labels everything 1") {
    dkl::GmmSpec spec;
    spec.classes = 1;
    const dkl::Dataset ds = dkl::sample_gmm(spec, 50, 3);
    for (int label : ds.labels) {
        CHECK(label == 1);
    }
}

TEST_CASE("vanishing variances collapse samples onto the class anchors") {
    dkl::GmmSpec spec;
    spec.classes = 4;
    spec.sigma_sq_centers = 1e-30;
    spec.sigma_sq_data = 1e-30;
    const dkl::Dataset ds = dkl::sample_gmm(spec, 200, 9);
    for (int n = 0; n < ds.size(); ++n) {
        const double angle = 2.0 * std::numbers::pi * ds.labels[n] / spec.classes;
        CHECK(ds.features(n, 0) == doctest::Approx(std::cos(angle)).epsilon(1e-12));
        CHECK(ds.features(n, 1) == doctest::Approx(std::sin(angle)).epsilon(1e-12));
    }
}

TEST_CASE("class draw is uniform by a chi-square test") {
    dkl::GmmSpec spec;  // 5 classes
    const dkl::Dataset ds = dkl::sample_gmm(spec, 5000, 20260811);
    std::vector<int> counts(5, 0);
    for (int label : ds.labels) {
        ++counts[label - 1];
    }
    // chi-square critical value at significance 0.001 with 4 dof
    CHECK(oracles::chi_square_uniform(counts) < 18.467);
}

TEST_CASE("gmm generation is deterministic and prefix consistent") {
    dkl::GmmSpec spec;
    const dkl::Dataset a = dkl::sample_gmm(spec, 120, 77);
    const dkl::Dataset b = dkl::sample_gmm(spec, 120, 77);
    CHECK(std::memcmp(a.features.data(), b.features.data(), sizeof(double) * a.features.size()) ==
          0);
    CHECK(a.labels == b.labels);

    const dkl::Dataset shorter = dkl::sample_gmm(spec, 60, 77);
    for (int n = 0; n < 60; ++n) {
        CHECK(shorter.features(n, 0) == a.features(n, 0));
        CHECK(shorter.features(n, 1) == a.features(n, 1));
        CHECK(shorter.labels[n] == a.labels[n]);
    }
}

TEST_CASE("generated features are finite and labels in range") {
    dkl::GmmSpec spec;
    spec.classes = 3;
    const dkl::Dataset ds = dkl::sample_gmm(spec, 500, 5);
    CHECK(ds.features.allFinite());
    for (int label : ds.labels) {
        CHECK(label >= 1);
        CHECK(label <= 3);
    }
}
