#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cardiotox/cohort.hpp"
#include "cardiotox/error.hpp"
#include "cardiotox/glm.hpp"
#include "cardiotox/preprocess.hpp"

namespace cardiotox {

enum class Estimand { ate, att };
std::string_view to_string(Estimand e);

/// Risk difference of `treatment` versus radiation for one outcome.
struct EffectEstimate {
    Therapy treatment = Therapy::chemotherapy;
    Outcome outcome = Outcome::chf;
    Estimand estimand = Estimand::ate;
    double point = 0.0;
    double boot_se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n_boot_requested = 0;
    int n_boot_succeeded = 0;
    std::uint64_t seed = 0;
};

struct CausalOptions {
    /// Average the ATE over the two compared arms only instead of everyone.
    bool arms_only_ate = false;
    FitOptions fit;
};

/// Outcome-model design: intercept, chemotherapy, targeted, then covariates.
struct GComputationDesign {
    std::vector<std::string> column_names;
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<Therapy> arm;
    Outcome outcome = Outcome::chf;
};

/// Treatment dummies in `covariates` are dropped (they are always present).
/// Throws Error(unknown_feature).
GComputationDesign make_design(std::span<const BaselineFeatures> features, Outcome outcome,
                               const std::vector<std::string>& covariates);

/// Counterfactual contrasts for fixed outcome-model coefficients, in the order
/// chemo ATE, chemo ATT, targeted ATE, targeted ATT.
std::array<double, 4> counterfactual_effects(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                                             std::span<const Therapy> arm,
                                             const CausalOptions& options = {});

/// Fits the outcome model on the design and returns the four contrasts.
/// Errors: missing_arm, plus anything fit_logistic throws.
std::array<double, 4> point_effects(const GComputationDesign& design,
                                    const CausalOptions& options = {});

/// g-computation point estimates (bootstrap fields left at zero).
std::vector<EffectEstimate> estimate_effects(std::span<const BaselineFeatures> features,
                                             Outcome outcome,
                                             const std::vector<std::string>& covariates,
                                             const CausalOptions& options = {});

struct BootstrapOptions {
    int replicates = 1000;
    std::uint64_t seed = 0;
    double min_success_fraction = 0.95;
    /// 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;
    CausalOptions causal;
};

struct BootstrapResult {
    std::vector<EffectEstimate> estimates;
    /// Failed replicates by error kind.
    std::map<ErrorCode, int> failures;
};

/// Patient-level resampling with replacement; resample indices for all
/// replicates are drawn up front from `seed`. Failed replicates are skipped and
/// counted. Throws Error(too_many_boot_failures) below the success floor.
BootstrapResult bootstrap_effects(std::span<const BaselineFeatures> features, Outcome outcome,
                                  const std::vector<std::string>& covariates,
                                  const BootstrapOptions& options);

/// Same, on a prepared design.
BootstrapResult bootstrap_effects(const GComputationDesign& design, const BootstrapOptions& options);

/// effects.csv: treatment,outcome,estimand,point,boot_se,ci_low,ci_high,n_boot_succeeded,seed
std::string effects_csv(std::span<const EffectEstimate> estimates);

}  // namespace cardiotox
