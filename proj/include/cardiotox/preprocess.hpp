#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cardiotox/cohort.hpp"
#include "cardiotox/feature_matrix.hpp"

namespace cardiotox {

enum class ExclusionReason {
    not_female_adult,
    no_treatment,
    prior_cancer,
    prior_heart_disease,
    insufficient_followup,
    multiple_treatment_types,
};

std::string_view to_string(ExclusionReason r);

struct EligibilityReport {
    std::vector<std::string> included;
    std::vector<std::pair<std::string, ExclusionReason>> excluded;
};

/// Knobs for baseline summarization. Defaults reproduce the published protocol.
struct PreprocessConfig {
    Date end_of_data;
    /// Outcomes counted only within this many days after index (full follow-up when unset).
    std::optional<int> outcome_horizon_days;
    /// When set, the troponin flag requires a pre-index value strictly above it.
    std::optional<double> troponin_threshold;
    std::vector<DrugClass> antihypertensive_classes{
        DrugClass::ace_inhibitor, DrugClass::arb,          DrugClass::beta_blocker,
        DrugClass::calcium_blocker, DrugClass::diuretic,   DrugClass::vasodilator,
        DrugClass::antihypertensive_combination};
    std::vector<DrugClass> antihyperlipidemia_classes{DrugClass::statin,
                                                      DrugClass::antihyperlipidemic_other};
};

/// Continuous lab/vital fields in declaration order.
enum class LabField { sbp, dbp, bmi, hdl, ldl, hba1c, triglyceride };
inline constexpr std::size_t kLabFieldCount = 7;
std::string_view field_name(LabField f);

/// Baseline snapshot before imputation: labs may be missing.
struct PartialFeatures {
    std::string patient_id;
    double age = 0.0;
    std::array<std::optional<double>, kLabFieldCount> labs{};
    bool troponin_flag = false;
    bool hypertension = false;
    bool diabetes = false;
    bool hyperlipidemia = false;
    std::array<bool, 12> medications{};
    Therapy treatment = Therapy::radiation;
    std::array<bool, 4> outcomes{};
    /// Fields already filled by an earlier imputation pass (keeps impute idempotent).
    std::vector<std::string> imputed;

    std::optional<double>& lab(LabField f) { return labs[static_cast<std::size_t>(f)]; }
    const std::optional<double>& lab(LabField f) const { return labs[static_cast<std::size_t>(f)]; }
};

struct BaselineFeatures {
    std::string patient_id;
    double age = 0.0;
    double sbp = 0.0;
    double dbp = 0.0;
    double bmi = 0.0;
    double hdl = 0.0;
    double ldl = 0.0;
    double hba1c = 0.0;
    double triglyceride = 0.0;
    bool troponin_flag = false;
    bool abnormal_blood_pressure = false;
    bool abnormal_blood_lipid = false;
    bool hypertension = false;
    bool diabetes = false;
    bool hyperlipidemia = false;
    std::array<bool, 12> medications{};
    bool antihypertensive_medication = false;
    bool antihyperlipidemia_medication = false;
    Therapy treatment = Therapy::radiation;
    std::array<bool, 4> outcomes{};
    /// Imputed field names in declaration order.
    std::vector<std::string> imputed;

    bool medication(DrugClass c) const { return medications[static_cast<std::size_t>(c)]; }
    bool outcome(Outcome o) const { return outcomes[static_cast<std::size_t>(o)]; }
    double lab(LabField f) const;

    bool operator==(const BaselineFeatures&) const = default;
};

/// Cohort means of the mean-imputed fields (triglyceride, bmi, dbp, sbp).
struct CohortMeans {
    std::optional<double> sbp, dbp, bmi, triglyceride;
};

/// First treatment date; nullopt when the patient has no treatment events.
std::optional<Date> index_date(const PatientRecord& p);

/// Applies exclusion rules in fixed precedence (first match recorded):
/// no treatment, not a female adult, multiple treatment types, prior cancer,
/// prior heart disease, insufficient follow-up.
EligibilityReport apply_eligibility(const Cohort& cohort, const CodeMap& codes, Date end_of_data);

PartialFeatures summarize_baseline(const PatientRecord& p, Date index, const CodeMap& codes,
                                   const PreprocessConfig& config);

CohortMeans cohort_means(std::span<const PartialFeatures> population);

/// Fills missing labs (means for sbp/dbp/bmi/triglyceride; 55, 115, 6.0 for
/// hdl/ldl/hba1c) and derives the abnormality and medication-group flags.
BaselineFeatures impute(const PartialFeatures& partial, const CohortMeans& means,
                        const PreprocessConfig& config);

/// Inverse view of an imputed row, used to re-run imputation.
PartialFeatures to_partial(const BaselineFeatures& f);

struct PreprocessResult {
    EligibilityReport eligibility;
    CohortMeans means;
    std::vector<BaselineFeatures> features;  // included patients, ascending patient_id
};

/// Eligibility, summarization and imputation over the whole cohort.
PreprocessResult preprocess(const Cohort& cohort, const CodeMap& codes,
                            const PreprocessConfig& config);

// ---------------------------------------------------------------------------
// Feature sets and matrix assembly

enum class FeatureSetId { outcome_model, baseline_health, medication_model };

std::string_view to_string(FeatureSetId id);
std::optional<FeatureSetId> parse_feature_set(std::string_view name);

/// Predictor names of a built-in feature set, in declaration order.
const std::vector<std::string>& builtin_feature_set(FeatureSetId id);

/// Every name accepted by build_matrix (outcomes are not features).
const std::vector<std::string>& known_features();

/// Numeric value of a named feature, nullopt for unknown names.
std::optional<double> feature_value(const BaselineFeatures& f, std::string_view name);

/// Arm-restricted comparison: outcome is 1 for `treated`, 0 for `reference`.
struct TreatmentContrast {
    Therapy treated = Therapy::chemotherapy;
    Therapy reference = Therapy::radiation;
};

using Target = std::variant<Outcome, TreatmentContrast>;

/// Rows sorted by patient_id; intercept column first, then `features` in order.
/// Throws Error(unknown_feature).
FeatureMatrix build_matrix(std::span<const BaselineFeatures> rows,
                           const std::vector<std::string>& features, const Target& target);

// ---------------------------------------------------------------------------
// Reports

/// features.csv: one row per patient, booleans 0/1, reals at 10 significant digits.
std::string features_csv(std::span<const BaselineFeatures> rows);

/// exclusions.csv: patient_id,reason in patient_id order.
std::string exclusions_csv(const EligibilityReport& report);

}  // namespace cardiotox
