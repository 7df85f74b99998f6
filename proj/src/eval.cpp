#include "cardiotox/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "cardiotox/csv.hpp"
#include "cardiotox/error.hpp"
#include "cardiotox/rng.hpp"

namespace cardiotox {

namespace {

struct TieGroup {
    double score;
    std::uint64_t positives;
    std::uint64_t negatives;
};

/// Distinct scores in descending order with class counts per score.
std::vector<TieGroup> tie_groups(std::span<const double> scores, std::span<const double> labels) {
    if (scores.size() != labels.size())
        throw Error(ErrorCode::dimension_mismatch, "scores and labels differ in length");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (std::isnan(scores[i])) throw std::invalid_argument("NaN score");
        if (labels[i] != 0.0 && labels[i] != 1.0)
            throw Error(ErrorCode::dimension_mismatch, "labels must be 0/1");
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<TieGroup> groups;
    for (auto i : order) {
        if (groups.empty() || groups.back().score != scores[i]) groups.push_back({scores[i], 0, 0});
        if (labels[i] == 1.0)
            ++groups.back().positives;
        else
            ++groups.back().negatives;
    }
    std::uint64_t pos = 0, neg = 0;
    for (const auto& g : groups) {
        pos += g.positives;
        neg += g.negatives;
    }
    if (pos == 0 || neg == 0) throw Error(ErrorCode::one_class_only, "labels contain one class");
    return groups;
}

void fisher_yates(std::vector<std::size_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace

double auc(std::span<const double> scores, std::span<const double> labels) {
    const auto groups = tie_groups(scores, labels);
    // Pair counts are exact integers: 2C + T and 2D + T with C + D + T = P N.
    std::uint64_t pos = 0, neg = 0, pos_above = 0;
    std::uint64_t concordant2 = 0, discordant2 = 0, ties = 0;
    for (const auto& g : groups) {
        pos += g.positives;
        neg += g.negatives;
    }
    std::uint64_t neg_above = 0;
    for (const auto& g : groups) {
        // groups arrive in descending score order
        discordant2 += 2 * g.positives * neg_above;
        concordant2 += 2 * g.negatives * pos_above;
        ties += g.positives * g.negatives;
        pos_above += g.positives;
        neg_above += g.negatives;
    }
    const double denom = 2.0 * static_cast<double>(pos) * static_cast<double>(neg);
    const std::uint64_t up = concordant2 + ties;
    const std::uint64_t down = discordant2 + ties;
    // Evaluate from the smaller tail so auc(s) + auc(-s) == 1 holds exactly.
    if (up <= down) return static_cast<double>(up) / denom;
    return 1.0 - static_cast<double>(down) / denom;
}

RocCurve roc_curve(std::span<const double> scores, std::span<const double> labels) {
    const auto groups = tie_groups(scores, labels);
    std::uint64_t pos = 0, neg = 0;
    for (const auto& g : groups) {
        pos += g.positives;
        neg += g.negatives;
    }
    RocCurve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::uint64_t tp = 0, fp = 0;
    for (const auto& g : groups) {
        tp += g.positives;
        fp += g.negatives;
        curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                                static_cast<double>(tp) / static_cast<double>(pos), g.score});
    }
    curve.auc = auc(scores, labels);
    return curve;
}

double trapezoid_area(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    return area;
}

std::vector<int> stratified_kfold(std::span<const double> labels, int k, std::uint64_t seed) {
    const auto n = labels.size();
    if (k < 2 || static_cast<std::size_t>(k) > n)
        throw Error(ErrorCode::bad_k, "k = " + std::to_string(k) + " with n = " + std::to_string(n));
    std::vector<std::size_t> positives, negatives;
    for (std::size_t i = 0; i < n; ++i) (labels[i] == 1.0 ? positives : negatives).push_back(i);

    Rng rng(seed);
    fisher_yates(positives, rng);
    fisher_yates(negatives, rng);

    std::vector<int> fold(n, 0);
    std::size_t deal = 0;
    for (const auto* group : {&positives, &negatives})
        for (auto i : *group) fold[i] = static_cast<int>(deal++ % static_cast<std::size_t>(k));
    return fold;
}

std::vector<int> plain_kfold(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2 || static_cast<std::size_t>(k) > n)
        throw Error(ErrorCode::bad_k, "k = " + std::to_string(k) + " with n = " + std::to_string(n));
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    Rng rng(seed);
    fisher_yates(rows, rng);
    std::vector<int> fold(n, 0);
    for (std::size_t d = 0; d < n; ++d) fold[rows[d]] = static_cast<int>(d % static_cast<std::size_t>(k));
    return fold;
}

CvReport cross_validated_auc(const FeatureMatrix& x, const CvOptions& options) {
    std::span<const double> labels(x.outcome.data(), static_cast<std::size_t>(x.n()));
    CvReport report;
    report.k = options.k;
    report.seed = options.seed;
    report.folds = options.stratified
                       ? stratified_kfold(labels, options.k, options.seed)
                       : plain_kfold(static_cast<std::size_t>(x.n()), options.k, options.seed);
    report.held_out_scores.assign(static_cast<std::size_t>(x.n()), 0.0);

    for (int f = 0; f < options.k; ++f) {
        std::vector<Eigen::Index> train, test;
        for (Eigen::Index i = 0; i < x.n(); ++i)
            (report.folds[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
        const auto train_x = x.select_rows(train);

        LogisticModel model;
        try {
            model = options.alpha_stay
                        ? backward_eliminate(train_x, *options.alpha_stay, options.fit).final_model
                        : fit_logistic(train_x, options.fit);
        } catch (const Error& e) {
            throw Error(e.code(), "fold " + std::to_string(f + 1) + ": " + e.detail());
        }

        std::vector<Eigen::Index> cols;
        for (const auto& name : model.column_names) cols.push_back(x.column(name));
        const auto test_x = x.select_rows(test).select_columns(cols);
        const Eigen::VectorXd scores = predict_probs(model, test_x.rows);

        for (std::size_t t = 0; t < test.size(); ++t)
            report.held_out_scores[static_cast<std::size_t>(test[t])] = scores(static_cast<Eigen::Index>(t));

        const auto positives = test_x.outcome.sum();
        if (positives > 0 && positives < static_cast<double>(test.size()))
            report.per_fold_auc.push_back(
                auc(std::span<const double>(scores.data(), test.size()),
                    std::span<const double>(test_x.outcome.data(), test.size())));
        else
            report.per_fold_auc.push_back(std::nullopt);
    }

    double sum = 0.0;
    int present = 0;
    for (const auto& a : report.per_fold_auc)
        if (a) {
            sum += *a;
            ++present;
        }
    report.mean_auc = present ? sum / present : std::numeric_limits<double>::quiet_NaN();
    report.pooled_auc = auc(report.held_out_scores, labels);
    return report;
}

void append_cv_rows(std::vector<std::vector<std::string>>& rows, const std::string& outcome,
                    const CvReport& report) {
    for (std::size_t f = 0; f < report.per_fold_auc.size(); ++f) {
        const auto& a = report.per_fold_auc[f];
        rows.push_back({outcome, std::to_string(f + 1), a ? csv::format_real(*a) : "NONE"});
    }
    rows.push_back({outcome, "MEAN", csv::format_real(report.mean_auc)});
    rows.push_back({outcome, "POOLED", csv::format_real(report.pooled_auc)});
}

void append_roc_rows(std::vector<std::vector<std::string>>& rows, const std::string& outcome,
                     const RocCurve& curve) {
    for (const auto& p : curve.points)
        rows.push_back({outcome, csv::format_real(p.fpr), csv::format_real(p.tpr),
                        csv::format_real(p.threshold)});
}

}  // namespace cardiotox
