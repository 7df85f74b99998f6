#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cardiotox/feature_matrix.hpp"
#include "cardiotox/glm.hpp"

namespace cardiotox {

/// Mann-Whitney AUC with half credit for ties. Labels must be 0/1.
/// Errors: dimension_mismatch, one_class_only.
double auc(std::span<const double> scores, std::span<const double> labels);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    /// Rows with score >= threshold are called positive; +inf for the origin.
    double threshold = std::numeric_limits<double>::infinity();
};

struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0.5;
};

/// One point per distinct score plus the origin; ends at (1, 1).
RocCurve roc_curve(std::span<const double> scores, std::span<const double> labels);

/// Trapezoidal area under the curve's points.
double trapezoid_area(const RocCurve& curve);

/// Fold index per row. Within each class (positives first) rows are shuffled
/// with the seeded generator and dealt round-robin, continuing the deal across
/// classes. Throws Error(bad_k) when k < 2 or k > n.
std::vector<int> stratified_kfold(std::span<const double> labels, int k, std::uint64_t seed);

/// Unstratified variant: one shuffle, dealt round-robin.
std::vector<int> plain_kfold(std::size_t n, int k, std::uint64_t seed);

struct CvOptions {
    int k = 5;
    std::uint64_t seed = 0;
    /// Backward elimination inside each training fold when set.
    std::optional<double> alpha_stay = 0.15;
    bool stratified = true;
    FitOptions fit;
};

struct CvReport {
    int k = 0;
    /// nullopt for a held-out fold that lacks one of the classes.
    std::vector<std::optional<double>> per_fold_auc;
    double mean_auc = 0.0;
    double pooled_auc = 0.0;
    std::uint64_t seed = 0;
    std::vector<int> folds;
    /// Held-out score of every row (row order of the input matrix).
    std::vector<double> held_out_scores;
};

CvReport cross_validated_auc(const FeatureMatrix& x, const CvOptions& options);

/// cv_report.csv body rows for one outcome (header: outcome,fold,auc).
void append_cv_rows(std::vector<std::vector<std::string>>& rows, const std::string& outcome,
                    const CvReport& report);

/// roc_points.csv body rows for one outcome (header: outcome,fpr,tpr,threshold).
void append_roc_rows(std::vector<std::vector<std::string>>& rows, const std::string& outcome,
                     const RocCurve& curve);

}  // namespace cardiotox
