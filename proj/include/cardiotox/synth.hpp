#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cardiotox/cohort.hpp"

namespace cardiotox::synth {

enum class Distribution { normal, bernoulli, lognormal };

/// One sampled baseline variable. `name` is a feature name the event layout
/// knows how to place: age, a lab, troponin, a condition or a drug class.
struct Covariate {
    std::string name;
    Distribution distribution = Distribution::normal;
    double mu = 0.0;     // normal/lognormal location
    double sigma = 1.0;  // normal/lognormal scale
    double p = 0.0;      // bernoulli
};

/// intercept + sum of coefficient * value; names refer to covariates or, in
/// outcome models, the dummies "chemotherapy" and "targeted".
struct LinearPredictor {
    double intercept = 0.0;
    std::map<std::string, double> coefficients;
};

/// Either a fixed three-arm lottery or two sequential logits: chemotherapy
/// versus the rest, then targeted versus radiation among the rest.
struct TreatmentModel {
    bool randomized = true;
    double p_chemo = 1.0 / 3.0;
    double p_targeted = 1.0 / 3.0;
    LinearPredictor chemo_vs_rest;
    LinearPredictor targeted_vs_radiation;
};

struct EventLayout {
    Date index_start{2012, 1, 1};
    Date index_end{2018, 12, 31};
    Date end_of_data{2020, 12, 31};
    int observation_offset_days = 14;   // labs sit this many days before index
    int precondition_offset_days = 30;  // condition diagnoses before index
    int medication_offset_days = 7;     // prescriptions after index
    int outcome_window_days = 365;      // outcomes fall 1..window days after index
    /// Fill undeclared labs and flags from built-in cohort-like marginals.
    bool background = true;
    std::string id_prefix = "P";
};

struct SyntheticSpec {
    int n = 0;
    std::uint64_t seed = 0;
    std::vector<Covariate> covariates;
    TreatmentModel treatment;
    std::map<Outcome, LinearPredictor> outcome_models;
    EventLayout layout;
    /// Monte Carlo draws behind truth.csv.
    int truth_draws = 1000000;
};

/// Checks every invariant; throws Error(invalid_spec).
void validate(const SyntheticSpec& spec);

/// JSON spec file (see configs/synth_example.json). Throws Error(invalid_spec).
SyntheticSpec parse_spec(std::string_view json_text);
SyntheticSpec load_spec(const std::filesystem::path& path);

/// Names the event layout can place.
const std::vector<std::string>& layout_names();

struct SyntheticUnit {
    std::string patient_id;
    /// Values in spec covariate order, as recovered by preprocessing.
    std::vector<double> covariates;
    Therapy arm = Therapy::radiation;
    std::array<bool, 4> outcomes{};
};

struct SyntheticCohort {
    Cohort cohort;
    std::vector<SyntheticUnit> units;
};

/// Deterministic in spec.seed. Throws Error(invalid_spec).
SyntheticCohort generate(const SyntheticSpec& spec);

struct TruthValue {
    double value = 0.0;
    double mc_se = 0.0;
};

/// Population ATE of `treatment` versus radiation under the true outcome
/// model. Closed form (mc_se 0) when no covariate enters that model.
TruthValue true_ate(const SyntheticSpec& spec, Therapy treatment, Outcome outcome, int n_mc,
                    std::uint64_t mc_seed);

/// Population ATT: counterfactual differences weighted by P(arm = treatment | x).
TruthValue true_att(const SyntheticSpec& spec, Therapy treatment, Outcome outcome, int n_mc,
                    std::uint64_t mc_seed);

/// AUC of the true linear predictor (treatment included) against the outcome,
/// ties at half credit. mc_se from 20 batch estimates.
TruthValue true_auc(const SyntheticSpec& spec, Outcome outcome, int n_mc, std::uint64_t mc_seed);

/// Plug-in truth averaged over the generated units; the ATT averages over
/// units whose sampled arm is `treatment`.
double sample_ate(const SyntheticSpec& spec, const SyntheticCohort& sample, Therapy treatment,
                  Outcome outcome);
double sample_att(const SyntheticSpec& spec, const SyntheticCohort& sample, Therapy treatment,
                  Outcome outcome);

/// Seed for truth.csv's Monte Carlo stream, derived from the spec seed.
std::uint64_t truth_seed(const SyntheticSpec& spec);

/// truth.csv: estimand,treatment,outcome,value,mc_se; per declared outcome the
/// ATE/ATT rows of both treatments, then an AUC row with treatment ALL.
std::string truth_csv(const SyntheticSpec& spec);

/// Writes the five cohort tables and truth.csv into `dir`.
void write_outputs(const SyntheticSpec& spec, const SyntheticCohort& sample,
                   const std::filesystem::path& dir);

}  // namespace cardiotox::synth
