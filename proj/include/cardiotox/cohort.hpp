#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cardiotox/date.hpp"

namespace cardiotox {

enum class Sex { f, m, other };

enum class ObservationKind { sbp, dbp, bmi, hdl, ldl, hba1c, triglyceride, troponin };

enum class CodeSystem { icd9, icd10 };

enum class DrugClass {
    insulin,
    metformin,
    statin,
    ace_inhibitor,
    arb,
    antihypertensive_combination,
    vasodilator,
    antiarrhythmic,
    beta_blocker,
    calcium_blocker,
    diuretic,
    antihyperlipidemic_other,
};

enum class Therapy { chemotherapy, targeted, radiation };

enum class Category {
    breast_cancer,
    prior_cancer_excluding,
    prior_cancer_allowed,
    chf,
    cad,
    cm,
    mi,
    hypertension,
    diabetes,
    hyperlipidemia,
    radiation_procedure,
};

enum class Outcome { chf, cad, cm, mi };

inline constexpr std::array<ObservationKind, 8> kObservationKinds{
    ObservationKind::sbp,   ObservationKind::dbp,   ObservationKind::bmi,
    ObservationKind::hdl,   ObservationKind::ldl,   ObservationKind::hba1c,
    ObservationKind::triglyceride, ObservationKind::troponin};

inline constexpr std::array<DrugClass, 12> kDrugClasses{
    DrugClass::insulin,      DrugClass::metformin,
    DrugClass::statin,       DrugClass::ace_inhibitor,
    DrugClass::arb,          DrugClass::antihypertensive_combination,
    DrugClass::vasodilator,  DrugClass::antiarrhythmic,
    DrugClass::beta_blocker, DrugClass::calcium_blocker,
    DrugClass::diuretic,     DrugClass::antihyperlipidemic_other};

inline constexpr std::array<Outcome, 4> kOutcomes{Outcome::chf, Outcome::cad, Outcome::cm,
                                                  Outcome::mi};

inline constexpr std::array<Therapy, 3> kTherapies{Therapy::chemotherapy, Therapy::targeted,
                                                   Therapy::radiation};

// Canonical upper-case spellings used in every file format.
std::string_view to_string(Sex v);
std::string_view to_string(ObservationKind v);
std::string_view to_string(CodeSystem v);
std::string_view to_string(DrugClass v);
std::string_view to_string(Therapy v);
std::string_view to_string(Category v);
std::string_view to_string(Outcome v);

template <class E>
std::optional<E> parse_enum(std::string_view text);

/// Lower-case feature name of a drug class ("ace_inhibitor", ...).
std::string feature_name(DrugClass v);

Category category_of(Outcome o);

struct Observation {
    Date date;
    ObservationKind kind{};
    double value = 0.0;
    bool operator==(const Observation&) const = default;
};

struct DiagnosisEvent {
    Date date;
    CodeSystem code_system{};
    std::string code;
    bool operator==(const DiagnosisEvent&) const = default;
};

struct MedicationEvent {
    Date date;
    DrugClass drug_class{};
    bool operator==(const MedicationEvent&) const = default;
};

struct TreatmentEvent {
    Date date;
    Therapy treatment{};
    bool operator==(const TreatmentEvent&) const = default;
};

struct PatientRecord {
    std::string patient_id;
    Date birth_date;
    Sex sex = Sex::f;
    std::vector<Observation> observations;
    std::vector<DiagnosisEvent> diagnoses;
    std::vector<MedicationEvent> medications;
    std::vector<TreatmentEvent> treatments;

    bool operator==(const PatientRecord&) const = default;

    /// Sorts each event list into canonical (date, kind, value) order.
    void canonicalize();
};

/// Patients in ascending patient_id order with canonically sorted events.
struct Cohort {
    std::vector<PatientRecord> patients;
    bool operator==(const Cohort&) const = default;

    const PatientRecord* find(std::string_view patient_id) const;
    std::size_t event_count() const;
};

/// Prefix table from (code system, code prefix) to a diagnosis category.
class CodeMap {
public:
    CodeMap() = default;

    /// Throws Error(malformed_row) on a duplicate prefix within a code system.
    void add(CodeSystem system, std::string prefix, Category category);

    /// Longest matching prefix wins; nullopt when nothing matches.
    std::optional<Category> classify(CodeSystem system, std::string_view code) const;

    std::size_t size() const { return entries_[0].size() + entries_[1].size(); }

    static CodeMap from_csv(const std::filesystem::path& path);
    static CodeMap from_csv_text(std::string_view text, const std::string& source_name);

    /// The illustrative table shipped as data/code_map_default.csv.
    static const CodeMap& builtin();
    static std::string_view builtin_csv();

private:
    std::array<std::map<std::string, Category>, 2> entries_;
};

std::optional<Category> classify_diagnosis(const DiagnosisEvent& event, const CodeMap& map);

struct CohortPaths {
    std::filesystem::path patients;
    std::filesystem::path observations;
    std::filesystem::path diagnoses;
    std::filesystem::path medications;
    std::filesystem::path treatments;

    /// The five canonical file names inside `dir`.
    static CohortPaths in_directory(const std::filesystem::path& dir);
};

/// Loads the five event tables. Errors: malformed_row (file, line, column,
/// reason), unknown_patient, duplicate_patient, io_error.
Cohort load_cohort(const CohortPaths& paths);

/// Writes the five tables in the canonical layout load_cohort reads.
void write_cohort(const Cohort& cohort, const std::filesystem::path& dir);

}  // namespace cardiotox
