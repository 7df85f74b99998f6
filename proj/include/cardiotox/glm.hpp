#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cardiotox/feature_matrix.hpp"

namespace cardiotox {

struct FitOptions {
    int max_iterations = 100;
    /// Optional ridge added to the information diagonal. Only for diagnosing
    /// near-collinearity; zero reproduces the plain maximum-likelihood fit.
    double ridge = 0.0;
};

/// Maximum-likelihood logistic regression on the log-odds scale.
struct LogisticModel {
    std::vector<std::string> column_names;
    Eigen::VectorXd beta;
    Eigen::VectorXd se;
    Eigen::MatrixXd covariance;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    Eigen::Index n = 0;
    /// max_j |X^T (y - p)|_j at the returned coefficients.
    double max_abs_score = 0.0;
};

/// IRLS (Newton) with step-halving.
///
/// Converges when max |delta beta| < 1e-8 or the relative deviance change
/// drops below 1e-10 while the score is below 1e-6; at most
/// `max_iterations` iterations. Errors: degenerate_outcome, too_few_rows,
/// singular_information (names the dependent columns), separation_detected,
/// not_converged.
LogisticModel fit_logistic(const FeatureMatrix& x, const FitOptions& options = {});

LogisticModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           std::vector<std::string> column_names, const FitOptions& options = {});

/// Fitted probability for one feature row. Throws Error(dimension_mismatch).
double predict_prob(const LogisticModel& m, std::span<const double> row);

/// Fitted probabilities for every row of `x`.
Eigen::VectorXd predict_probs(const LogisticModel& m, const Eigen::MatrixXd& x);

struct WaldTest {
    double z = 0.0;
    double p_value = 1.0;
};

/// Two-sided Wald test of column j. Throws Error(zero_se).
WaldTest wald(const LogisticModel& m, Eigen::Index j);

struct EliminationStep {
    std::string removed_column;
    double p_value = 0.0;
};

struct EliminationTrace {
    std::vector<EliminationStep> steps;
    LogisticModel final_model;
};

/// Backward elimination on Wald p-values; the intercept is never removed and
/// ties go to the later column.
EliminationTrace backward_eliminate(const FeatureMatrix& x, double alpha_stay = 0.15,
                                    const FitOptions& options = {});

/// beta_j times the sample sd (n - 1) of column j in `x`, per model column.
Eigen::VectorXd normalized_coefficients(const LogisticModel& m, const FeatureMatrix& x);

/// variable,coefficient,std_error,std_dev,normalized_coefficient,z,p_value
std::string coefficient_report_csv(const LogisticModel& m, const FeatureMatrix& x);

/// step,removed_column,p_value
std::string elimination_trace_csv(const EliminationTrace& trace);

}  // namespace cardiotox
