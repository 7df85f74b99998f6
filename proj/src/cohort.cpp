#include "cardiotox/cohort.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <span>
#include <tuple>
#include <unordered_map>

#include "cardiotox/csv.hpp"
#include "cardiotox/error.hpp"

namespace cardiotox {

namespace {

constexpr std::array<std::string_view, 3> kSexNames{"F", "M", "OTHER"};
constexpr std::array<std::string_view, 8> kObservationNames{
    "SBP", "DBP", "BMI", "HDL", "LDL", "HBA1C", "TRIGLYCERIDE", "TROPONIN"};
constexpr std::array<std::string_view, 2> kCodeSystemNames{"ICD9", "ICD10"};
constexpr std::array<std::string_view, 12> kDrugNames{
    "INSULIN",      "METFORMIN",      "STATIN",          "ACE_INHIBITOR",
    "ARB",          "ANTIHYPERTENSIVE_COMBINATION",      "VASODILATOR",
    "ANTIARRHYTHMIC", "BETA_BLOCKER", "CALCIUM_BLOCKER", "DIURETIC",
    "ANTIHYPERLIPIDEMIC_OTHER"};
constexpr std::array<std::string_view, 3> kTherapyNames{"CHEMOTHERAPY", "TARGETED", "RADIATION"};
constexpr std::array<std::string_view, 11> kCategoryNames{
    "BREAST_CANCER", "PRIOR_CANCER_EXCLUDING", "PRIOR_CANCER_ALLOWED", "CHF", "CAD", "CM", "MI",
    "HYPERTENSION",  "DIABETES",               "HYPERLIPIDEMIA",       "RADIATION_PROCEDURE"};
constexpr std::array<std::string_view, 4> kOutcomeNames{"CHF", "CAD", "CM", "MI"};

template <class E, std::size_t N>
std::optional<E> lookup(std::string_view text, const std::array<std::string_view, N>& names) {
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == text) return static_cast<E>(i);
    return std::nullopt;
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    return out;
}

}  // namespace

std::string_view to_string(Sex v) { return kSexNames[static_cast<int>(v)]; }
std::string_view to_string(ObservationKind v) { return kObservationNames[static_cast<int>(v)]; }
std::string_view to_string(CodeSystem v) { return kCodeSystemNames[static_cast<int>(v)]; }
std::string_view to_string(DrugClass v) { return kDrugNames[static_cast<int>(v)]; }
std::string_view to_string(Therapy v) { return kTherapyNames[static_cast<int>(v)]; }
std::string_view to_string(Category v) { return kCategoryNames[static_cast<int>(v)]; }
std::string_view to_string(Outcome v) { return kOutcomeNames[static_cast<int>(v)]; }

template <>
std::optional<Sex> parse_enum<Sex>(std::string_view t) { return lookup<Sex>(t, kSexNames); }
template <>
std::optional<ObservationKind> parse_enum<ObservationKind>(std::string_view t) {
    return lookup<ObservationKind>(t, kObservationNames);
}
template <>
std::optional<CodeSystem> parse_enum<CodeSystem>(std::string_view t) {
    return lookup<CodeSystem>(t, kCodeSystemNames);
}
template <>
std::optional<DrugClass> parse_enum<DrugClass>(std::string_view t) {
    return lookup<DrugClass>(t, kDrugNames);
}
template <>
std::optional<Therapy> parse_enum<Therapy>(std::string_view t) {
    return lookup<Therapy>(t, kTherapyNames);
}
template <>
std::optional<Category> parse_enum<Category>(std::string_view t) {
    return lookup<Category>(t, kCategoryNames);
}
template <>
std::optional<Outcome> parse_enum<Outcome>(std::string_view t) {
    return lookup<Outcome>(t, kOutcomeNames);
}

std::string feature_name(DrugClass v) {
    std::string s(to_string(v));
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

Category category_of(Outcome o) {
    switch (o) {
    case Outcome::chf: return Category::chf;
    case Outcome::cad: return Category::cad;
    case Outcome::cm: return Category::cm;
    case Outcome::mi: return Category::mi;
    }
    return Category::chf;
}

void PatientRecord::canonicalize() {
    std::sort(observations.begin(), observations.end(), [](const auto& a, const auto& b) {
        return std::tie(a.date, a.kind, a.value) < std::tie(b.date, b.kind, b.value);
    });
    std::sort(diagnoses.begin(), diagnoses.end(), [](const auto& a, const auto& b) {
        return std::tie(a.date, a.code_system, a.code) < std::tie(b.date, b.code_system, b.code);
    });
    std::sort(medications.begin(), medications.end(), [](const auto& a, const auto& b) {
        return std::tie(a.date, a.drug_class) < std::tie(b.date, b.drug_class);
    });
    std::sort(treatments.begin(), treatments.end(), [](const auto& a, const auto& b) {
        return std::tie(a.date, a.treatment) < std::tie(b.date, b.treatment);
    });
}

const PatientRecord* Cohort::find(std::string_view patient_id) const {
    auto it = std::lower_bound(
        patients.begin(), patients.end(), patient_id,
        [](const PatientRecord& p, std::string_view id) { return p.patient_id < id; });
    if (it == patients.end() || it->patient_id != patient_id) return nullptr;
    return &*it;
}

std::size_t Cohort::event_count() const {
    std::size_t n = 0;
    for (const auto& p : patients)
        n += p.observations.size() + p.diagnoses.size() + p.medications.size() +
             p.treatments.size();
    return n;
}

// ---------------------------------------------------------------------------
// CodeMap

void CodeMap::add(CodeSystem system, std::string prefix, Category category) {
    prefix = upper(prefix);
    auto& table = entries_[static_cast<int>(system)];
    if (prefix.empty())
        throw Error(ErrorCode::malformed_row, "empty code prefix");
    if (!table.emplace(prefix, category).second)
        throw Error(ErrorCode::malformed_row, "duplicate code prefix " +
                                                  std::string(to_string(system)) + " " + prefix);
}

std::optional<Category> CodeMap::classify(CodeSystem system, std::string_view code) const {
    const auto& table = entries_[static_cast<int>(system)];
    std::string key = upper(code);
    for (std::size_t len = key.size(); len > 0; --len) {
        auto it = table.find(key.substr(0, len));
        if (it != table.end()) return it->second;
    }
    return std::nullopt;
}

CodeMap CodeMap::from_csv_text(std::string_view text, const std::string& source_name) {
    auto records = csv::parse(text, source_name);
    if (records.empty() || records[0].fields != std::vector<std::string>{"code_system", "code_prefix", "category"})
        throw Error(ErrorCode::malformed_row,
                    source_name + " line 1: expected header code_system,code_prefix,category");
    CodeMap map;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        auto where = source_name + " line " + std::to_string(rec.line);
        if (rec.fields.size() != 3)
            throw Error(ErrorCode::malformed_row, where + ": expected 3 columns");
        auto system = parse_enum<CodeSystem>(rec.fields[0]);
        if (!system) throw Error(ErrorCode::malformed_row, where + " column code_system: unknown value");
        auto category = parse_enum<Category>(rec.fields[2]);
        if (!category) throw Error(ErrorCode::malformed_row, where + " column category: unknown value");
        try {
            map.add(*system, rec.fields[1], *category);
        } catch (const Error& e) {
            throw Error(ErrorCode::malformed_row, where + " column code_prefix: " + e.detail());
        }
    }
    return map;
}

CodeMap CodeMap::from_csv(const std::filesystem::path& path) {
    return from_csv_text(csv::read_text(path), path.filename().string());
}

std::string_view CodeMap::builtin_csv() {
    return R"(code_system,code_prefix,category
ICD10,C50,BREAST_CANCER
ICD10,D05,BREAST_CANCER
ICD10,C,PRIOR_CANCER_EXCLUDING
ICD10,C44,PRIOR_CANCER_ALLOWED
ICD10,D06,PRIOR_CANCER_ALLOWED
ICD10,I50,CHF
ICD10,I11.0,CHF
ICD10,I13.0,CHF
ICD10,I20,CAD
ICD10,I24,CAD
ICD10,I25,CAD
ICD10,I21,MI
ICD10,I22,MI
ICD10,I42,CM
ICD10,I43,CM
ICD10,I10,HYPERTENSION
ICD10,I11,HYPERTENSION
ICD10,I12,HYPERTENSION
ICD10,I13,HYPERTENSION
ICD10,I15,HYPERTENSION
ICD10,E10,DIABETES
ICD10,E11,DIABETES
ICD10,E13,DIABETES
ICD10,E78,HYPERLIPIDEMIA
ICD10,Z51.0,RADIATION_PROCEDURE
ICD9,174,BREAST_CANCER
ICD9,233.0,BREAST_CANCER
ICD9,14,PRIOR_CANCER_EXCLUDING
ICD9,15,PRIOR_CANCER_EXCLUDING
ICD9,16,PRIOR_CANCER_EXCLUDING
ICD9,17,PRIOR_CANCER_EXCLUDING
ICD9,18,PRIOR_CANCER_EXCLUDING
ICD9,19,PRIOR_CANCER_EXCLUDING
ICD9,20,PRIOR_CANCER_EXCLUDING
ICD9,173,PRIOR_CANCER_ALLOWED
ICD9,233.1,PRIOR_CANCER_ALLOWED
ICD9,428,CHF
ICD9,411,CAD
ICD9,413,CAD
ICD9,414,CAD
ICD9,410,MI
ICD9,412,MI
ICD9,425,CM
ICD9,401,HYPERTENSION
ICD9,402,HYPERTENSION
ICD9,403,HYPERTENSION
ICD9,404,HYPERTENSION
ICD9,405,HYPERTENSION
ICD9,250,DIABETES
ICD9,272,HYPERLIPIDEMIA
ICD9,V58.0,RADIATION_PROCEDURE
)";
}

const CodeMap& CodeMap::builtin() {
    static const CodeMap map = from_csv_text(builtin_csv(), "builtin code map");
    return map;
}

std::optional<Category> classify_diagnosis(const DiagnosisEvent& event, const CodeMap& map) {
    return map.classify(event.code_system, event.code);
}

// ---------------------------------------------------------------------------
// Loading

CohortPaths CohortPaths::in_directory(const std::filesystem::path& dir) {
    return {dir / "patients.csv", dir / "observations.csv", dir / "diagnoses.csv",
            dir / "medications.csv", dir / "treatments.csv"};
}

namespace {

class Table {
public:
    Table(const std::filesystem::path& path, std::vector<std::string_view> columns)
        : name_(path.filename().string()), columns_(std::move(columns)) {
        records_ = csv::read_file(path);
        // a zero-byte file is an empty table
        if (records_.empty()) return;
        const auto& header = records_.front();
        bool ok = header.fields.size() == columns_.size();
        for (std::size_t i = 0; ok && i < columns_.size(); ++i) ok = header.fields[i] == columns_[i];
        if (!ok) {
            std::string expected;
            for (auto c : columns_) expected += (expected.empty() ? "" : ",") + std::string(c);
            throw Error(ErrorCode::malformed_row,
                        name_ + " line " + std::to_string(header.line) + ": expected header " + expected);
        }
        for (std::size_t r = 1; r < records_.size(); ++r)
            if (records_[r].fields.size() != columns_.size())
                throw Error(ErrorCode::malformed_row,
                            name_ + " line " + std::to_string(records_[r].line) + ": expected " +
                                std::to_string(columns_.size()) + " columns, found " +
                                std::to_string(records_[r].fields.size()));
    }

    std::span<const csv::Record> rows() const {
        if (records_.empty()) return {};
        return std::span<const csv::Record>(records_).subspan(1);
    }

    [[noreturn]] void fail(const csv::Record& rec, std::size_t col, const std::string& reason) const {
        throw Error(ErrorCode::malformed_row, name_ + " line " + std::to_string(rec.line) +
                                                  " column " + std::string(columns_[col]) + ": " +
                                                  reason);
    }

    Date date(const csv::Record& rec, std::size_t col) const {
        auto d = Date::parse(rec.fields[col]);
        if (!d) fail(rec, col, "invalid date '" + rec.fields[col] + "'");
        return *d;
    }

    template <class E>
    E enumerated(const csv::Record& rec, std::size_t col) const {
        auto v = parse_enum<E>(rec.fields[col]);
        if (!v) fail(rec, col, "unknown value '" + rec.fields[col] + "'");
        return *v;
    }

    double real(const csv::Record& rec, std::size_t col) const {
        const auto& text = rec.fields[col];
        double v = 0.0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size())
            fail(rec, col, "not a number '" + text + "'");
        if (!std::isfinite(v)) fail(rec, col, "value not finite");
        if (v < 0) fail(rec, col, "value negative");
        return v;
    }

    const std::string& name() const { return name_; }

private:
    std::string name_;
    std::vector<std::string_view> columns_;
    std::vector<csv::Record> records_;
};

}  // namespace

Cohort load_cohort(const CohortPaths& paths) {
    Table patients(paths.patients, {"patient_id", "birth_date", "sex"});
    Table observations(paths.observations, {"patient_id", "date", "kind", "value"});
    Table diagnoses(paths.diagnoses, {"patient_id", "date", "code_system", "code"});
    Table medications(paths.medications, {"patient_id", "date", "drug_class"});
    Table treatments(paths.treatments, {"patient_id", "date", "treatment"});

    Cohort cohort;
    std::unordered_map<std::string, std::size_t> slot;
    for (const auto& rec : patients.rows()) {
        const auto& id = rec.fields[0];
        if (id.empty()) patients.fail(rec, 0, "empty patient_id");
        PatientRecord p;
        p.patient_id = id;
        p.birth_date = patients.date(rec, 1);
        p.sex = patients.enumerated<Sex>(rec, 2);
        if (!slot.emplace(id, cohort.patients.size()).second)
            throw Error(ErrorCode::duplicate_patient,
                        patients.name() + " line " + std::to_string(rec.line) + ": " + id);
        cohort.patients.push_back(std::move(p));
    }

    auto owner = [&](const Table& t, const csv::Record& rec) -> PatientRecord& {
        auto it = slot.find(rec.fields[0]);
        if (it == slot.end())
            throw Error(ErrorCode::unknown_patient, t.name() + " line " + std::to_string(rec.line) +
                                                        ": " + rec.fields[0]);
        return cohort.patients[it->second];
    };

    for (const auto& rec : observations.rows()) {
        auto& p = owner(observations, rec);
        p.observations.push_back({observations.date(rec, 1),
                                  observations.enumerated<ObservationKind>(rec, 2),
                                  observations.real(rec, 3)});
    }
    for (const auto& rec : diagnoses.rows()) {
        auto& p = owner(diagnoses, rec);
        if (rec.fields[3].empty()) diagnoses.fail(rec, 3, "empty code");
        p.diagnoses.push_back(
            {diagnoses.date(rec, 1), diagnoses.enumerated<CodeSystem>(rec, 2), rec.fields[3]});
    }
    for (const auto& rec : medications.rows()) {
        auto& p = owner(medications, rec);
        p.medications.push_back({medications.date(rec, 1), medications.enumerated<DrugClass>(rec, 2)});
    }
    for (const auto& rec : treatments.rows()) {
        auto& p = owner(treatments, rec);
        p.treatments.push_back({treatments.date(rec, 1), treatments.enumerated<Therapy>(rec, 2)});
    }

    for (auto& p : cohort.patients) p.canonicalize();
    std::sort(cohort.patients.begin(), cohort.patients.end(),
              [](const auto& a, const auto& b) { return a.patient_id < b.patient_id; });
    return cohort;
}

void write_cohort(const Cohort& cohort, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    csv::Writer patients({"patient_id", "birth_date", "sex"});
    csv::Writer observations({"patient_id", "date", "kind", "value"});
    csv::Writer diagnoses({"patient_id", "date", "code_system", "code"});
    csv::Writer medications({"patient_id", "date", "drug_class"});
    csv::Writer treatments({"patient_id", "date", "treatment"});
    for (const auto& p : cohort.patients) {
        patients.row({p.patient_id, p.birth_date.iso(), std::string(to_string(p.sex))});
        for (const auto& o : p.observations)
            observations.row({p.patient_id, o.date.iso(), std::string(to_string(o.kind)),
                              csv::format_real(o.value)});
        for (const auto& d : p.diagnoses)
            diagnoses.row({p.patient_id, d.date.iso(), std::string(to_string(d.code_system)), d.code});
        for (const auto& m : p.medications)
            medications.row({p.patient_id, m.date.iso(), std::string(to_string(m.drug_class))});
        for (const auto& t : p.treatments)
            treatments.row({p.patient_id, t.date.iso(), std::string(to_string(t.treatment))});
    }
    auto paths = CohortPaths::in_directory(dir);
    patients.save(paths.patients);
    observations.save(paths.observations);
    diagnoses.save(paths.diagnoses);
    medications.save(paths.medications);
    treatments.save(paths.treatments);
}

}  // namespace cardiotox
