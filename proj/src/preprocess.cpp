#include "cardiotox/preprocess.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "cardiotox/csv.hpp"
#include "cardiotox/error.hpp"

namespace cardiotox {

namespace {

// Normal-value constants for hdl, ldl and hba1c.
constexpr double kHdlDefault = 55.0;
constexpr double kLdlDefault = 115.0;
constexpr double kHba1cDefault = 6.0;

constexpr std::array<std::string_view, kLabFieldCount> kLabNames{
    "sbp", "dbp", "bmi", "hdl", "ldl", "hba1c", "triglyceride"};

constexpr std::array<LabField, kLabFieldCount> kLabFields{
    LabField::sbp, LabField::dbp,   LabField::bmi,         LabField::hdl,
    LabField::ldl, LabField::hba1c, LabField::triglyceride};

ObservationKind observation_kind(LabField f) {
    switch (f) {
    case LabField::sbp: return ObservationKind::sbp;
    case LabField::dbp: return ObservationKind::dbp;
    case LabField::bmi: return ObservationKind::bmi;
    case LabField::hdl: return ObservationKind::hdl;
    case LabField::ldl: return ObservationKind::ldl;
    case LabField::hba1c: return ObservationKind::hba1c;
    case LabField::triglyceride: return ObservationKind::triglyceride;
    }
    return ObservationKind::sbp;
}

bool is_heart_disease(Category c) {
    return c == Category::chf || c == Category::cad || c == Category::cm || c == Category::mi;
}

bool any_in(const std::array<bool, 12>& meds, const std::vector<DrugClass>& group) {
    return std::any_of(group.begin(), group.end(),
                       [&](DrugClass c) { return meds[static_cast<std::size_t>(c)]; });
}

}  // namespace

std::string_view to_string(ExclusionReason r) {
    switch (r) {
    case ExclusionReason::not_female_adult: return "NOT_FEMALE_ADULT";
    case ExclusionReason::no_treatment: return "NO_TREATMENT";
    case ExclusionReason::prior_cancer: return "PRIOR_CANCER";
    case ExclusionReason::prior_heart_disease: return "PRIOR_HEART_DISEASE";
    case ExclusionReason::insufficient_followup: return "INSUFFICIENT_FOLLOWUP";
    case ExclusionReason::multiple_treatment_types: return "MULTIPLE_TREATMENT_TYPES";
    }
    return "UNKNOWN";
}

std::string_view field_name(LabField f) { return kLabNames[static_cast<std::size_t>(f)]; }

double BaselineFeatures::lab(LabField f) const {
    switch (f) {
    case LabField::sbp: return sbp;
    case LabField::dbp: return dbp;
    case LabField::bmi: return bmi;
    case LabField::hdl: return hdl;
    case LabField::ldl: return ldl;
    case LabField::hba1c: return hba1c;
    case LabField::triglyceride: return triglyceride;
    }
    return 0.0;
}

std::optional<Date> index_date(const PatientRecord& p) {
    if (p.treatments.empty()) return std::nullopt;
    auto it = std::min_element(p.treatments.begin(), p.treatments.end(),
                               [](const auto& a, const auto& b) { return a.date < b.date; });
    return it->date;
}

EligibilityReport apply_eligibility(const Cohort& cohort, const CodeMap& codes, Date end_of_data) {
    EligibilityReport report;
    for (const auto& p : cohort.patients) {
        auto reason = [&]() -> std::optional<ExclusionReason> {
            auto index = index_date(p);
            if (!index) return ExclusionReason::no_treatment;
            if (p.sex != Sex::f || whole_years(p.birth_date, *index) < 18)
                return ExclusionReason::not_female_adult;
            auto first = p.treatments.front().treatment;
            for (const auto& t : p.treatments)
                if (t.treatment != first) return ExclusionReason::multiple_treatment_types;
            for (const auto& d : p.diagnoses)
                if (d.date < *index && classify_diagnosis(d, codes) == Category::prior_cancer_excluding)
                    return ExclusionReason::prior_cancer;
            for (const auto& d : p.diagnoses) {
                auto c = classify_diagnosis(d, codes);
                if (d.date <= *index && c && is_heart_disease(*c))
                    return ExclusionReason::prior_heart_disease;
            }
            if (days_between(*index, end_of_data) < 365) return ExclusionReason::insufficient_followup;
            return std::nullopt;
        }();
        if (reason)
            report.excluded.emplace_back(p.patient_id, *reason);
        else
            report.included.push_back(p.patient_id);
    }
    return report;
}

PartialFeatures summarize_baseline(const PatientRecord& p, Date index, const CodeMap& codes,
                                   const PreprocessConfig& config) {
    PartialFeatures out;
    out.patient_id = p.patient_id;
    out.age = whole_years(p.birth_date, index);

    for (auto field : kLabFields) {
        const auto kind = observation_kind(field);
        std::optional<Date> latest;
        double sum = 0.0;
        int count = 0;
        for (const auto& o : p.observations) {
            if (o.kind != kind || !(o.date < index)) continue;
            if (!latest || latest < o.date) {
                latest = o.date;
                sum = 0.0;
                count = 0;
            }
            if (o.date == *latest) {
                sum += o.value;
                ++count;
            }
        }
        if (count > 0) out.lab(field) = sum / count;
    }

    for (const auto& o : p.observations) {
        if (o.kind != ObservationKind::troponin || !(o.date < index)) continue;
        if (!config.troponin_threshold || o.value > *config.troponin_threshold)
            out.troponin_flag = true;
    }

    std::optional<Date> horizon_end;
    if (config.outcome_horizon_days) horizon_end = index.plus_days(*config.outcome_horizon_days);

    for (const auto& d : p.diagnoses) {
        auto c = classify_diagnosis(d, codes);
        if (!c) continue;
        if (d.date < index) {
            if (*c == Category::hypertension) out.hypertension = true;
            if (*c == Category::diabetes) out.diabetes = true;
            if (*c == Category::hyperlipidemia) out.hyperlipidemia = true;
        }
        if (index < d.date && d.date <= config.end_of_data &&
            (!horizon_end || d.date <= *horizon_end)) {
            for (auto o : kOutcomes)
                if (category_of(o) == *c) out.outcomes[static_cast<std::size_t>(o)] = true;
        }
    }

    for (const auto& m : p.medications)
        if (!(m.date < index) && m.date <= config.end_of_data)
            out.medications[static_cast<std::size_t>(m.drug_class)] = true;

    if (!p.treatments.empty()) {
        auto it = std::min_element(p.treatments.begin(), p.treatments.end(),
                                   [](const auto& a, const auto& b) { return a.date < b.date; });
        out.treatment = it->treatment;
    }
    return out;
}

CohortMeans cohort_means(std::span<const PartialFeatures> population) {
    auto mean_of = [&](LabField f) -> std::optional<double> {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& p : population) {
            if (const auto& v = p.lab(f)) {
                sum += *v;
                ++count;
            }
        }
        if (count == 0) return std::nullopt;
        return sum / static_cast<double>(count);
    };
    return {mean_of(LabField::sbp), mean_of(LabField::dbp), mean_of(LabField::bmi),
            mean_of(LabField::triglyceride)};
}

BaselineFeatures impute(const PartialFeatures& partial, const CohortMeans& means,
                        const PreprocessConfig& config) {
    std::set<std::string_view> imputed(partial.imputed.begin(), partial.imputed.end());

    auto fill = [&](LabField f) -> double {
        if (const auto& v = partial.lab(f)) return *v;
        imputed.insert(field_name(f));
        auto from_mean = [&](const std::optional<double>& m) {
            if (!m)
                throw Error(ErrorCode::empty_cohort_mean,
                            std::string(field_name(f)) + " has no observed values in the cohort");
            return *m;
        };
        switch (f) {
        case LabField::sbp: return from_mean(means.sbp);
        case LabField::dbp: return from_mean(means.dbp);
        case LabField::bmi: return from_mean(means.bmi);
        case LabField::triglyceride: return from_mean(means.triglyceride);
        case LabField::hdl: return kHdlDefault;
        case LabField::ldl: return kLdlDefault;
        case LabField::hba1c: return kHba1cDefault;
        }
        return 0.0;
    };

    BaselineFeatures f;
    f.patient_id = partial.patient_id;
    f.age = partial.age;
    f.sbp = fill(LabField::sbp);
    f.dbp = fill(LabField::dbp);
    f.bmi = fill(LabField::bmi);
    f.hdl = fill(LabField::hdl);
    f.ldl = fill(LabField::ldl);
    f.hba1c = fill(LabField::hba1c);
    f.triglyceride = fill(LabField::triglyceride);
    f.troponin_flag = partial.troponin_flag;
    f.abnormal_blood_pressure = f.sbp > 130.0 || f.dbp > 80.0;
    f.abnormal_blood_lipid = f.ldl > 130.0 || f.hdl < 50.0 || f.triglyceride > 150.0;
    f.hypertension = partial.hypertension;
    f.diabetes = partial.diabetes;
    f.hyperlipidemia = partial.hyperlipidemia;
    f.medications = partial.medications;
    f.antihypertensive_medication = any_in(partial.medications, config.antihypertensive_classes);
    f.antihyperlipidemia_medication = any_in(partial.medications, config.antihyperlipidemia_classes);
    f.treatment = partial.treatment;
    f.outcomes = partial.outcomes;
    for (auto field : kLabFields)
        if (imputed.count(field_name(field))) f.imputed.emplace_back(field_name(field));
    return f;
}

PartialFeatures to_partial(const BaselineFeatures& f) {
    PartialFeatures p;
    p.patient_id = f.patient_id;
    p.age = f.age;
    for (auto field : kLabFields) p.lab(field) = f.lab(field);
    p.troponin_flag = f.troponin_flag;
    p.hypertension = f.hypertension;
    p.diabetes = f.diabetes;
    p.hyperlipidemia = f.hyperlipidemia;
    p.medications = f.medications;
    p.treatment = f.treatment;
    p.outcomes = f.outcomes;
    p.imputed = f.imputed;
    return p;
}

PreprocessResult preprocess(const Cohort& cohort, const CodeMap& codes,
                            const PreprocessConfig& config) {
    PreprocessResult result;
    result.eligibility = apply_eligibility(cohort, codes, config.end_of_data);

    std::vector<PartialFeatures> partials;
    partials.reserve(result.eligibility.included.size());
    for (const auto& id : result.eligibility.included) {
        const auto* p = cohort.find(id);
        partials.push_back(summarize_baseline(*p, *index_date(*p), codes, config));
    }
    result.means = cohort_means(partials);
    result.features.reserve(partials.size());
    for (const auto& p : partials) result.features.push_back(impute(p, result.means, config));
    std::sort(result.features.begin(), result.features.end(),
              [](const auto& a, const auto& b) { return a.patient_id < b.patient_id; });
    return result;
}

// ---------------------------------------------------------------------------
// Feature registry

namespace {

using Accessor = std::function<double(const BaselineFeatures&)>;

const std::vector<std::pair<std::string, Accessor>>& registry() {
    static const auto table = [] {
        std::vector<std::pair<std::string, Accessor>> t{
            {"age", [](const BaselineFeatures& f) { return f.age; }},
            {"sbp", [](const BaselineFeatures& f) { return f.sbp; }},
            {"dbp", [](const BaselineFeatures& f) { return f.dbp; }},
            {"bmi", [](const BaselineFeatures& f) { return f.bmi; }},
            {"hdl", [](const BaselineFeatures& f) { return f.hdl; }},
            {"ldl", [](const BaselineFeatures& f) { return f.ldl; }},
            {"hba1c", [](const BaselineFeatures& f) { return f.hba1c; }},
            {"triglyceride", [](const BaselineFeatures& f) { return f.triglyceride; }},
            {"troponin", [](const BaselineFeatures& f) { return f.troponin_flag ? 1.0 : 0.0; }},
            {"abnormal_blood_pressure",
             [](const BaselineFeatures& f) { return f.abnormal_blood_pressure ? 1.0 : 0.0; }},
            {"abnormal_blood_lipid",
             [](const BaselineFeatures& f) { return f.abnormal_blood_lipid ? 1.0 : 0.0; }},
            {"hypertension", [](const BaselineFeatures& f) { return f.hypertension ? 1.0 : 0.0; }},
            {"diabetes", [](const BaselineFeatures& f) { return f.diabetes ? 1.0 : 0.0; }},
            {"hyperlipidemia",
             [](const BaselineFeatures& f) { return f.hyperlipidemia ? 1.0 : 0.0; }},
        };
        for (auto c : kDrugClasses)
            t.emplace_back(feature_name(c), [c](const BaselineFeatures& f) {
                return f.medication(c) ? 1.0 : 0.0;
            });
        t.emplace_back("antihypertensive_medication", [](const BaselineFeatures& f) {
            return f.antihypertensive_medication ? 1.0 : 0.0;
        });
        t.emplace_back("antihyperlipidemia_medication", [](const BaselineFeatures& f) {
            return f.antihyperlipidemia_medication ? 1.0 : 0.0;
        });
        t.emplace_back("chemotherapy", [](const BaselineFeatures& f) {
            return f.treatment == Therapy::chemotherapy ? 1.0 : 0.0;
        });
        t.emplace_back("targeted", [](const BaselineFeatures& f) {
            return f.treatment == Therapy::targeted ? 1.0 : 0.0;
        });
        return t;
    }();
    return table;
}

const Accessor* find_accessor(std::string_view name) {
    for (const auto& [n, a] : registry())
        if (n == name) return &a;
    return nullptr;
}

}  // namespace

const std::vector<std::string>& known_features() {
    static const auto names = [] {
        std::vector<std::string> v;
        for (const auto& entry : registry()) v.push_back(entry.first);
        return v;
    }();
    return names;
}

std::optional<double> feature_value(const BaselineFeatures& f, std::string_view name) {
    const auto* a = find_accessor(name);
    if (!a) return std::nullopt;
    return (*a)(f);
}

std::string_view to_string(FeatureSetId id) {
    switch (id) {
    case FeatureSetId::outcome_model: return "OUTCOME_MODEL";
    case FeatureSetId::baseline_health: return "BASELINE_HEALTH";
    case FeatureSetId::medication_model: return "MEDICATION_MODEL";
    }
    return "UNKNOWN";
}

std::optional<FeatureSetId> parse_feature_set(std::string_view name) {
    for (auto id : {FeatureSetId::outcome_model, FeatureSetId::baseline_health,
                    FeatureSetId::medication_model})
        if (to_string(id) == name) return id;
    return std::nullopt;
}

const std::vector<std::string>& builtin_feature_set(FeatureSetId id) {
    // Every feature-table variable except the outcomes.
    static const std::vector<std::string> outcome_model{
        "sbp", "dbp", "bmi", "hdl", "ldl", "hba1c", "troponin", "triglyceride",
        "abnormal_blood_pressure", "abnormal_blood_lipid", "hyperlipidemia", "diabetes",
        "hypertension", "insulin", "metformin", "statin", "ace_inhibitor", "arb",
        "antihypertensive_combination", "vasodilator", "antiarrhythmic", "beta_blocker",
        "calcium_blocker", "chemotherapy", "targeted", "age"};
    static const std::vector<std::string> baseline_health{
        "age", "sbp", "dbp", "bmi", "ldl", "hdl", "hba1c", "triglyceride", "troponin",
        "abnormal_blood_pressure", "hypertension", "hyperlipidemia", "abnormal_blood_lipid",
        "diabetes"};
    static const std::vector<std::string> medication_model{
        "age", "sbp", "dbp", "bmi", "ldl", "hdl", "hba1c", "troponin", "triglyceride",
        "abnormal_blood_pressure", "abnormal_blood_lipid", "hyperlipidemia", "diabetes",
        "hypertension", "metformin", "insulin", "statin", "ace_inhibitor", "arb", "vasodilator",
        "antiarrhythmic", "beta_blocker", "calcium_blocker", "diuretic",
        "antihypertensive_medication", "antihyperlipidemia_medication"};
    switch (id) {
    case FeatureSetId::outcome_model: return outcome_model;
    case FeatureSetId::baseline_health: return baseline_health;
    case FeatureSetId::medication_model: return medication_model;
    }
    return outcome_model;
}

FeatureMatrix build_matrix(std::span<const BaselineFeatures> rows,
                           const std::vector<std::string>& features, const Target& target) {
    std::vector<const Accessor*> accessors;
    for (const auto& name : features) {
        const auto* a = find_accessor(name);
        if (!a) throw Error(ErrorCode::unknown_feature, name);
        accessors.push_back(a);
    }

    std::vector<const BaselineFeatures*> selected;
    for (const auto& f : rows) {
        if (const auto* c = std::get_if<TreatmentContrast>(&target))
            if (f.treatment != c->treated && f.treatment != c->reference) continue;
        selected.push_back(&f);
    }
    std::stable_sort(selected.begin(), selected.end(),
                     [](const auto* a, const auto* b) { return a->patient_id < b->patient_id; });

    FeatureMatrix m;
    m.column_names.emplace_back(kInterceptName);
    m.column_names.insert(m.column_names.end(), features.begin(), features.end());
    const auto n = static_cast<Eigen::Index>(selected.size());
    m.rows.resize(n, static_cast<Eigen::Index>(features.size()) + 1);
    m.outcome.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& f = *selected[static_cast<std::size_t>(i)];
        m.rows(i, 0) = 1.0;
        for (std::size_t j = 0; j < accessors.size(); ++j)
            m.rows(i, static_cast<Eigen::Index>(j) + 1) = (*accessors[j])(f);
        if (const auto* o = std::get_if<Outcome>(&target))
            m.outcome(i) = f.outcome(*o) ? 1.0 : 0.0;
        else
            m.outcome(i) = f.treatment == std::get<TreatmentContrast>(target).treated ? 1.0 : 0.0;
        m.row_ids.push_back(f.patient_id);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Reports

std::string features_csv(std::span<const BaselineFeatures> rows) {
    std::vector<std::string> header{"patient_id", "age", "sbp", "dbp", "bmi", "hdl", "ldl",
                                    "hba1c", "triglyceride", "troponin",
                                    "abnormal_blood_pressure", "abnormal_blood_lipid",
                                    "hypertension", "diabetes", "hyperlipidemia"};
    for (auto c : kDrugClasses) header.push_back(feature_name(c));
    for (const char* h : {"antihypertensive_medication", "antihyperlipidemia_medication",
                          "treatment", "chf", "cad", "cm", "mi", "imputed"})
        header.emplace_back(h);

    csv::Writer out(header);
    auto flag = [](bool b) { return std::string(b ? "1" : "0"); };
    for (const auto& f : rows) {
        std::vector<std::string> r{f.patient_id,
                                   csv::format_real(f.age),
                                   csv::format_real(f.sbp),
                                   csv::format_real(f.dbp),
                                   csv::format_real(f.bmi),
                                   csv::format_real(f.hdl),
                                   csv::format_real(f.ldl),
                                   csv::format_real(f.hba1c),
                                   csv::format_real(f.triglyceride),
                                   flag(f.troponin_flag),
                                   flag(f.abnormal_blood_pressure),
                                   flag(f.abnormal_blood_lipid),
                                   flag(f.hypertension),
                                   flag(f.diabetes),
                                   flag(f.hyperlipidemia)};
        for (auto c : kDrugClasses) r.push_back(flag(f.medication(c)));
        r.push_back(flag(f.antihypertensive_medication));
        r.push_back(flag(f.antihyperlipidemia_medication));
        r.emplace_back(to_string(f.treatment));
        for (auto o : kOutcomes) r.push_back(flag(f.outcome(o)));
        std::string imputed;
        for (const auto& name : f.imputed) imputed += (imputed.empty() ? "" : ";") + name;
        r.push_back(imputed);
        out.row(r);
    }
    return out.str();
}

std::string exclusions_csv(const EligibilityReport& report) {
    auto rows = report.excluded;
    std::sort(rows.begin(), rows.end());
    csv::Writer out({"patient_id", "reason"});
    for (const auto& [id, reason] : rows) out.row({id, std::string(to_string(reason))});
    return out.str();
}

}  // namespace cardiotox
