#include <cmath>
#include <random>

#include "doctest.h"

#include "cardiotox/error.hpp"
#include "cardiotox/eval.hpp"
#include "oracles.hpp"

using namespace cardiotox;

namespace {

std::vector<double> v(std::initializer_list<double> xs) { return xs; }

void random_instance(std::mt19937_64& g, std::vector<double>& s, std::vector<double>& y) {
    std::uniform_int_distribution<int> size(2, 200);
    std::uniform_int_distribution<int> level(0, 9);
    const int n = size(g);
    s.assign(n, 0.0);
    y.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        s[i] = level(g) * 0.1;
        y[i] = (level(g) < 4) ? 1.0 : 0.0;
    }
    y[0] = 1.0;
    y[1] = 0.0;
}

}  // namespace

TEST_CASE("auc examples") {
    CHECK(auc(v({0.9, 0.8, 0.2, 0.1}), v({1, 1, 0, 0})) == 1.0);
    CHECK(auc(v({0.4, 0.4, 0.4, 0.4}), v({1, 0, 1, 0})) == 0.5);
    CHECK(auc(v({0.7, 0.7, 0.3}), v({1, 0, 0})) == 0.75);
    CHECK_THROWS_AS(auc(v({0.1, 0.2}), v({1, 1})), Error);
    CHECK_THROWS_AS(auc(v({0.1, 0.2}), v({1})), Error);
}

TEST_CASE("auc properties on random tied instances") {
    std::mt19937_64 g(17);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> s, y;
        random_instance(g, s, y);
        const double a = auc(s, y);
        CHECK(std::fabs(a - oracle::brute_auc(s, y)) < 1e-12);

        std::vector<double> neg(s.size()), mono(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            neg[i] = -s[i];
            mono[i] = std::exp(3.0 * s[i]) - 7.0;
        }
        CHECK(a + auc(neg, y) == 1.0);
        CHECK(auc(mono, y) == a);

        const auto curve = roc_curve(s, y);
        CHECK(std::fabs(trapezoid_area(curve) - a) < 1e-12);
        CHECK(curve.points.front().fpr == 0.0);
        CHECK(curve.points.front().tpr == 0.0);
        CHECK(curve.points.back().fpr == 1.0);
        CHECK(curve.points.back().tpr == 1.0);
        for (std::size_t i = 1; i < curve.points.size(); ++i) {
            CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
            CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
        }
    }
}

TEST_CASE("roc curve shapes") {
    const auto perfect = roc_curve(v({0.9, 0.8, 0.2, 0.1}), v({1, 1, 0, 0}));
    bool corner = false;
    for (const auto& p : perfect.points) corner |= (p.fpr == 0.0 && p.tpr == 1.0);
    CHECK(corner);
    const auto flat = roc_curve(v({0.3, 0.3, 0.3}), v({1, 0, 0}));
    REQUIRE(flat.points.size() == 2);
    CHECK(flat.points[1].fpr == 1.0);
    CHECK(flat.points[1].tpr == 1.0);
    CHECK(std::isinf(flat.points[0].threshold));
}

TEST_CASE("stratified folds") {
    const auto labels = v({1, 0, 1, 0, 0, 1, 0, 0, 1, 0});
    const auto a = stratified_kfold(labels, 5, 99);
    CHECK(a == stratified_kfold(labels, 5, 99));
    std::vector<int> size(5, 0), pos(5, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        REQUIRE((a[i] >= 0 && a[i] < 5));
        ++size[static_cast<std::size_t>(a[i])];
        if (labels[i] == 1.0) ++pos[static_cast<std::size_t>(a[i])];
    }
    CHECK(size == std::vector<int>{2, 2, 2, 2, 2});
    std::sort(pos.begin(), pos.end());
    CHECK(pos == std::vector<int>{0, 1, 1, 1, 1});

    try {
        stratified_kfold(labels, 11, 1);
        FAIL("expected BAD_K");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::bad_k);
    }
    CHECK_THROWS_AS(stratified_kfold(labels, 1, 1), Error);

    const auto plain = plain_kfold(13, 4, 3);
    std::vector<int> counts(4, 0);
    for (int f : plain) ++counts[static_cast<std::size_t>(f)];
    std::sort(counts.begin(), counts.end());
    CHECK(counts == std::vector<int>{3, 3, 3, 4});
}

TEST_CASE("outcome equal to a binary feature") {
    FeatureMatrix x;
    x.column_names = {"intercept", "flag", "noise"};
    const int n = 100;
    x.rows.resize(n, 3);
    x.outcome.resize(n);
    std::mt19937_64 g(2);
    std::normal_distribution<double> z;
    for (int i = 0; i < n; ++i) {
        const double flag = (i % 3 == 0) ? 1.0 : 0.0;
        x.rows.row(i) << 1.0, flag, z(g);
        x.outcome(i) = flag;
        x.row_ids.push_back(std::to_string(i));
    }
    // the feature itself scores every fold perfectly
    std::vector<double> y(x.outcome.data(), x.outcome.data() + n);
    const auto folds = stratified_kfold(y, 5, 7);
    for (int f = 0; f < 5; ++f) {
        std::vector<double> s, l;
        for (int i = 0; i < n; ++i)
            if (folds[static_cast<std::size_t>(i)] == f) {
                s.push_back(x.rows(i, 1));
                l.push_back(y[static_cast<std::size_t>(i)]);
            }
        CHECK(auc(s, l) == 1.0);
    }
    // the maximum-likelihood fit diverges, which is surfaced rather than patched
    CvOptions o;
    o.seed = 7;
    o.alpha_stay.reset();
    try {
        cross_validated_auc(x, o);
        FAIL("expected SEPARATION_DETECTED");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::separation_detected);
        CHECK(std::string(e.what()).find("fold") != std::string::npos);
    }
}

TEST_CASE("cross-validation report is deterministic and consistent") {
    FeatureMatrix x;
    x.column_names = {"intercept", "a", "b"};
    const int n = 400;
    x.rows.resize(n, 3);
    x.outcome.resize(n);
    std::mt19937_64 g(12);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u;
    for (int i = 0; i < n; ++i) {
        const double a = z(g), b = z(g);
        x.rows.row(i) << 1.0, a, b;
        x.outcome(i) = u(g) < oracle::logistic(-0.5 + 1.2 * a) ? 1.0 : 0.0;
        x.row_ids.push_back(std::to_string(i));
    }
    CvOptions o;
    o.k = 5;
    o.seed = 31;
    o.alpha_stay.reset();
    const auto r1 = cross_validated_auc(x, o);
    const auto r2 = cross_validated_auc(x, o);
    CHECK(r1.per_fold_auc == r2.per_fold_auc);
    CHECK(r1.pooled_auc == r2.pooled_auc);
    REQUIRE(r1.per_fold_auc.size() == 5);
    double sum = 0;
    for (const auto& a : r1.per_fold_auc) sum += a.value();
    CHECK(std::fabs(r1.mean_auc - sum / 5.0) < 1e-15);
    std::vector<double> y(x.outcome.data(), x.outcome.data() + n);
    CHECK(std::fabs(r1.pooled_auc - auc(r1.held_out_scores, y)) < 1e-15);
    CHECK(r1.mean_auc > 0.7);

    o.alpha_stay = 0.15;
    const auto r3 = cross_validated_auc(x, o);
    CHECK(r3.folds == r1.folds);
    CHECK(r3.pooled_auc == cross_validated_auc(x, o).pooled_auc);
}

TEST_CASE("cv csv rows") {
    CvReport r;
    r.k = 2;
    r.per_fold_auc = {0.75, std::nullopt};
    r.mean_auc = 0.75;
    r.pooled_auc = 0.7;
    std::vector<std::vector<std::string>> rows;
    append_cv_rows(rows, "CHF", r);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"CHF", "1", "0.75"});
    CHECK(rows[1] == std::vector<std::string>{"CHF", "2", "NONE"});
    CHECK(rows[2] == std::vector<std::string>{"CHF", "MEAN", "0.75"});
    CHECK(rows[3] == std::vector<std::string>{"CHF", "POOLED", "0.7"});
}
