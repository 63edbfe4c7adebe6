#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "tkl/data.hpp"
#include "tkl/model.hpp"
#include "tkl/trainer.hpp"

using namespace tkl;

#ifndef FIXTURE_DIR
#define FIXTURE_DIR "tests/fixtures"
#endif

namespace {

std::string fixture(const char* name) { return std::string(FIXTURE_DIR) + "/" + name; }

std::string temp_path(const char* name) {
    return std::string("/tmp/tkl_test_") + name;
}

}  // namespace

TEST_CASE("sparse format parser reads the committed fixture") {
    const Dataset d = parse_sparse_svm(fixture("good.svm"));
    CHECK(d.size() == 4);
    CHECK(d.n_features() == 3);
    CHECK(d.targets[0] == 1.0);
    CHECK(d.targets[3] == -1.0);
    CHECK(d.samples[0][0] == doctest::Approx(0.5));
    CHECK(d.samples[0][2] == doctest::Approx(0.25));  // sparse gap filled with 0
    CHECK(d.samples[1][1] == doctest::Approx(0.0));
    CHECK(d.samples[2][2] == doctest::Approx(-1.5));  // comment stripped
}

TEST_CASE("sparse format parser rejects malformed rows with line numbers") {
    CHECK_THROWS_WITH_AS(parse_sparse_svm(fixture("bad_index.svm")),
                         doctest::Contains(":2:"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_sparse_svm(fixture("bad_value.svm")),
                         doctest::Contains(":3:"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_sparse_svm(fixture("bad_zero_index.svm")),
                         doctest::Contains("1-based"), std::runtime_error);
    CHECK_THROWS(parse_sparse_svm(fixture("does_not_exist.svm")));
}

TEST_CASE("csv parser auto-detects the header and label column") {
    const Dataset d = parse_csv(fixture("good.csv"));
    CHECK(d.size() == 3);
    CHECK(d.n_features() == 2);
    CHECK(d.targets[0] == doctest::Approx(1.0));
    CHECK(d.samples[0][0] == doctest::Approx(0.1));
    // explicit label column
    const Dataset d0 = parse_csv(fixture("good.csv"), 0);
    CHECK(d0.samples[0][0] == doctest::Approx(0.2));
    CHECK(d0.targets[0] == doctest::Approx(0.1));
}

TEST_CASE("csv parser rejects ragged rows") {
    CHECK_THROWS_WITH_AS(parse_csv(fixture("bad_ragged.csv")),
                         doctest::Contains("columns"), std::runtime_error);
}

TEST_CASE("scaler maps to the unit box and handles constant features") {
    std::vector<Vector> xs = {{0.0, 5.0, 2.0}, {10.0, 5.0, 4.0}, {5.0, 5.0, 3.0}};
    const FeatureScaler s = fit_scaler(xs);
    CHECK(s.apply({0.0, 5.0, 2.0})[0] == doctest::Approx(0.0));
    CHECK(s.apply({10.0, 5.0, 4.0})[0] == doctest::Approx(1.0));
    CHECK(s.apply({5.0, 5.0, 3.0})[1] == doctest::Approx(0.5));  // constant -> 0.5
    // out-of-range points clamp to the box
    CHECK(s.apply({-3.0, 5.0, 2.0})[0] == doctest::Approx(0.0));
    CHECK(s.apply({12.0, 5.0, 5.0})[0] == doctest::Approx(1.0));
}

TEST_CASE("classification auto-detection and label mapping") {
    CHECK(detect_classification({1.0, 2.0, 1.0, 2.0}));
    CHECK(!detect_classification({1.0, 2.0, 3.0}));
    CHECK(!detect_classification({1.0, 1.0, 1.0}));
    const Vector mapped = map_labels({5.0, 2.0, 5.0});
    CHECK(mapped[0] == 1.0);
    CHECK(mapped[1] == -1.0);
    CHECK_THROWS(map_labels({1.0, 2.0, 3.0}));
}

TEST_CASE("model round-trips through save/load bit-equivalently") {
    std::vector<Vector> X;
    Vector t;
    fixtures::checkerboard(40, 31, X, t);
    TrainConfig cfg;
    cfg.task = Task::classification;
    cfg.C = 10.0;
    cfg.maxit = 20;
    const FitOutput out = fit(X, t, cfg);

    const std::string path = temp_path("roundtrip.model");
    out.model.save(path);
    const TKPredictor loaded = TKPredictor::load(path);

    CHECK(loaded.task == out.model.task);
    CHECK(loaded.support_count() == out.model.support_count());
    CHECK(loaded.bias == out.model.bias);
    std::mt19937 rng(32);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Vector z{unit(rng), unit(rng)};
        CHECK(loaded.decision_value(z) == out.model.decision_value(z));
    }
    std::remove(path.c_str());
}

TEST_CASE("golden model fixture still loads and predicts as recorded") {
    const TKPredictor m = TKPredictor::load(fixture("golden.model"));
    CHECK(m.task == Task::classification);
    const Dataset probes = parse_csv(fixture("golden_probes.csv"));
    for (std::size_t i = 0; i < probes.size(); ++i)
        CHECK(m.decision_value(probes.samples[i]) ==
              doctest::Approx(probes.targets[i]).epsilon(1e-12));
}

TEST_CASE("model loader rejects corruption and version drift") {
    std::vector<Vector> X;
    Vector t;
    fixtures::checkerboard(20, 33, X, t);
    TrainConfig cfg;
    cfg.task = Task::classification;
    cfg.maxit = 5;
    const FitOutput out = fit(X, t, cfg);
    const std::string path = temp_path("corrupt.model");
    out.model.save(path);

    SUBCASE("bit flip fails the checksum") {
        std::ifstream in(path);
        std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        in.close();
        const auto pos = body.find("bias ");
        body[pos + 5] = body[pos + 5] == '5' ? '6' : '5';
        std::ofstream(path) << body;
        CHECK_THROWS_WITH_AS(TKPredictor::load(path), doctest::Contains("checksum"),
                             std::runtime_error);
    }
    SUBCASE("future version is refused") {
        std::ifstream in(path);
        std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        in.close();
        body.replace(body.find("version 1"), 9, "version 9");
        std::ofstream(path) << body;
        CHECK_THROWS_WITH_AS(TKPredictor::load(path), doctest::Contains("version"),
                             std::runtime_error);
    }
    SUBCASE("truncation is detected") {
        std::ifstream in(path);
        std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        in.close();
        std::ofstream(path) << body.substr(0, body.size() / 2);
        CHECK_THROWS(TKPredictor::load(path));
    }
    std::remove(path.c_str());
}

TEST_CASE("k-fold split is deterministic, partitioning, and stratified") {
    Vector labels(20);
    for (std::size_t i = 0; i < 20; ++i) labels[i] = i < 14 ? 1.0 : -1.0;
    const auto a = kfold_indices(20, 4, 7, &labels);
    const auto b = kfold_indices(20, 4, 7, &labels);
    REQUIRE(a.size() == 4);
    std::vector<int> seen(20, 0);
    for (std::size_t f = 0; f < 4; ++f) {
        CHECK(a[f] == b[f]);  // deterministic
        int neg = 0;
        for (std::size_t idx : a[f]) {
            ++seen[idx];
            if (labels[idx] < 0) ++neg;
        }
        CHECK(neg >= 1);  // stratification: each fold sees the minority class
    }
    for (int c : seen) CHECK(c == 1);  // exact partition
    CHECK_THROWS(kfold_indices(5, 6, 0, nullptr));
    CHECK_THROWS(kfold_indices(5, 1, 0, nullptr));
}

TEST_CASE("cross-validation selects deterministically with tie-break to smaller C") {
    std::vector<Vector> X;
    Vector t;
    fixtures::checkerboard(40, 34, X, t);
    TrainConfig cfg;
    cfg.task = Task::classification;
    cfg.maxit = 10;
    const CVResult r1 = kfold_cv(X, t, cfg, {1.0, 10.0}, {0.5}, 2, 5);
    const CVResult r2 = kfold_cv(X, t, cfg, {10.0, 1.0}, {0.5}, 2, 5);
    CHECK(r1.C == r2.C);
    CHECK(r1.score == r2.score);
    CHECK(r1.table.size() == 2);
}
