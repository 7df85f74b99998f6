#include "cardiotox/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <set>

#include "json.hpp"

#include "cardiotox/csv.hpp"
#include "cardiotox/error.hpp"
#include "cardiotox/rng.hpp"
#include "cardiotox/stats.hpp"

namespace cardiotox::synth {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::invalid_spec, what); }

enum class Slot { age, lab, troponin, condition, medication };

struct LayoutEntry {
    const char* name;
    Slot slot;
    int index;  // ObservationKind, condition ordinal or DrugClass
    // Background marginal: mean/sd for continuous slots, rate for binary ones.
    double mean;
    double sd;
};

// Background marginals follow the cohort summary of the reference study; the
// sbp sd is not reported there and is an assumption.
const std::vector<LayoutEntry>& layout() {
    static const std::vector<LayoutEntry> entries{
        {"age", Slot::age, 0, 57.51, 12.2547},
        {"sbp", Slot::lab, static_cast<int>(ObservationKind::sbp), 126.0, 15.0},
        {"dbp", Slot::lab, static_cast<int>(ObservationKind::dbp), 74.2, 10.2974},
        {"bmi", Slot::lab, static_cast<int>(ObservationKind::bmi), 28.7, 6.0845},
        {"hdl", Slot::lab, static_cast<int>(ObservationKind::hdl), 65.2, 28.1748},
        {"ldl", Slot::lab, static_cast<int>(ObservationKind::ldl), 111.9, 19.9402},
        {"hba1c", Slot::lab, static_cast<int>(ObservationKind::hba1c), 6.0, 0.4746},
        {"triglyceride", Slot::lab, static_cast<int>(ObservationKind::triglyceride), 128.1, 44.2198},
        {"troponin", Slot::troponin, 0, 0.0401, 0.0},
        {"hypertension", Slot::condition, 0, 0.3025, 0.0},
        {"diabetes", Slot::condition, 1, 0.1652, 0.0},
        {"hyperlipidemia", Slot::condition, 2, 0.2396, 0.0},
        {"insulin", Slot::medication, static_cast<int>(DrugClass::insulin), 0.0430, 0.0},
        {"metformin", Slot::medication, static_cast<int>(DrugClass::metformin), 0.0474, 0.0},
        {"statin", Slot::medication, static_cast<int>(DrugClass::statin), 0.2169, 0.0},
        {"ace_inhibitor", Slot::medication, static_cast<int>(DrugClass::ace_inhibitor), 0.1552, 0.0},
        {"arb", Slot::medication, static_cast<int>(DrugClass::arb), 0.0897, 0.0},
        {"antihypertensive_combination", Slot::medication,
         static_cast<int>(DrugClass::antihypertensive_combination), 0.0363, 0.0},
        {"vasodilator", Slot::medication, static_cast<int>(DrugClass::vasodilator), 0.1748, 0.0},
        {"antiarrhythmic", Slot::medication, static_cast<int>(DrugClass::antiarrhythmic), 0.0485, 0.0},
        {"beta_blocker", Slot::medication, static_cast<int>(DrugClass::beta_blocker), 0.2227, 0.0},
        {"calcium_blocker", Slot::medication, static_cast<int>(DrugClass::calcium_blocker), 0.1234, 0.0},
        // rate recovered from the reported sd 0.4095 = sqrt(p (1 - p))
        {"diuretic", Slot::medication, static_cast<int>(DrugClass::diuretic), 0.2129, 0.0},
        {"antihyperlipidemic_other", Slot::medication,
         static_cast<int>(DrugClass::antihyperlipidemic_other), 0.0167, 0.0},
    };
    return entries;
}

const LayoutEntry* find_entry(std::string_view name) {
    for (const auto& e : layout())
        if (name == e.name) return &e;
    return nullptr;
}

bool is_binary(Slot s) { return s == Slot::troponin || s == Slot::condition || s == Slot::medication; }

// Diagnosis codes the default code map classifies as the named category.
constexpr std::array<const char*, 3> kConditionCodes{"I10", "E11.9", "E78.5"};
constexpr std::array<const char*, 4> kOutcomeCodes{"I50.9", "I25.10", "I42.9", "I21.9"};
constexpr double kTroponinValue = 0.1;
constexpr int kMaxRedraws = 1000;
constexpr double kMinAge = 18.0;
constexpr double kMaxAge = 100.0;

double round10(double v) { return std::strtod(csv::format_real(v).c_str(), nullptr); }

/// Draws one value honouring the layout's bounds; continuous values are
/// rounded to the ten significant digits the CSV writer keeps.
double draw(Rng& rng, const LayoutEntry& entry, Distribution dist, double mu, double sigma, double p) {
    if (dist == Distribution::bernoulli) return rng.bernoulli(p) ? 1.0 : 0.0;
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        double v = mu + sigma * rng.normal();
        if (dist == Distribution::lognormal) v = std::exp(v);
        if (entry.slot == Slot::age) {
            v = std::floor(v);
            if (v >= kMinAge && v <= kMaxAge) return v;
        } else {
            v = round10(v);
            if (v >= 0.0 && std::isfinite(v)) return v;
        }
    }
    invalid(std::string("cannot draw an admissible value for ") + entry.name);
}

double draw_covariate(Rng& rng, const Covariate& c) {
    return draw(rng, *find_entry(c.name), c.distribution, c.mu, c.sigma, c.p);
}

double draw_background(Rng& rng, const LayoutEntry& e) {
    return is_binary(e.slot) ? draw(rng, e, Distribution::bernoulli, 0, 0, e.mean)
                             : draw(rng, e, Distribution::normal, e.mean, e.sd, 0);
}


/// Linear predictor with names resolved to covariate positions.
struct Compiled {
    double intercept = 0.0;
    std::vector<std::pair<int, double>> terms;
    double b_chemo = 0.0;
    double b_targeted = 0.0;

    double covariate_part(const std::vector<double>& x) const {
        double eta = intercept;
        for (const auto& [i, b] : terms) eta += b * x[static_cast<std::size_t>(i)];
        return eta;
    }
    double dummy(Therapy t) const {
        if (t == Therapy::chemotherapy) return b_chemo;
        if (t == Therapy::targeted) return b_targeted;
        return 0.0;
    }
};

int covariate_index(const SyntheticSpec& spec, const std::string& name) {
    for (std::size_t i = 0; i < spec.covariates.size(); ++i)
        if (spec.covariates[i].name == name) return static_cast<int>(i);
    return -1;
}

Compiled compile(const SyntheticSpec& spec, const LinearPredictor& lp, bool allow_dummies,
                 const std::string& where) {
    Compiled c;
    c.intercept = lp.intercept;
    if (!std::isfinite(lp.intercept)) invalid(where + ": intercept must be finite");
    for (const auto& [name, b] : lp.coefficients) {
        if (!std::isfinite(b)) invalid(where + ": coefficient of " + name + " must be finite");
        if (allow_dummies && name == "chemotherapy") {
            c.b_chemo = b;
        } else if (allow_dummies && name == "targeted") {
            c.b_targeted = b;
        } else {
            const int i = covariate_index(spec, name);
            if (i < 0) invalid(where + " references undeclared covariate " + name);
            c.terms.emplace_back(i, b);
        }
    }
    return c;
}

struct CompiledTreatment {
    bool randomized = true;
    double p_chemo = 0.0;
    double p_targeted = 0.0;
    Compiled chemo;
    Compiled targeted;

    /// P(arm = t | x).
    double propensity(Therapy t, const std::vector<double>& x) const {
        const double pc = randomized ? p_chemo : stats::logistic(chemo.covariate_part(x));
        if (t == Therapy::chemotherapy) return pc;
        if (randomized) return t == Therapy::targeted ? p_targeted : 1.0 - p_chemo - p_targeted;
        const double pt = stats::logistic(targeted.covariate_part(x));
        return (1.0 - pc) * (t == Therapy::targeted ? pt : 1.0 - pt);
    }

    Therapy draw_arm(Rng& rng, const std::vector<double>& x) const {
        if (randomized) {
            const double u = rng.uniform();
            if (u < p_chemo) return Therapy::chemotherapy;
            return u < p_chemo + p_targeted ? Therapy::targeted : Therapy::radiation;
        }
        if (rng.bernoulli(stats::logistic(chemo.covariate_part(x)))) return Therapy::chemotherapy;
        return rng.bernoulli(stats::logistic(targeted.covariate_part(x))) ? Therapy::targeted
                                                                          : Therapy::radiation;
    }
};

CompiledTreatment compile_treatment(const SyntheticSpec& spec) {
    CompiledTreatment t;
    t.randomized = spec.treatment.randomized;
    t.p_chemo = spec.treatment.p_chemo;
    t.p_targeted = spec.treatment.p_targeted;
    if (!t.randomized) {
        t.chemo = compile(spec, spec.treatment.chemo_vs_rest, false, "treatment chemo_vs_rest");
        t.targeted = compile(spec, spec.treatment.targeted_vs_radiation, false,
                             "treatment targeted_vs_radiation");
    }
    return t;
}

Compiled compile_outcome(const SyntheticSpec& spec, Outcome o) {
    const auto it = spec.outcome_models.find(o);
    if (it == spec.outcome_models.end())
        invalid("no outcome model for " + std::string(to_string(o)));
    return compile(spec, it->second, true, "outcome model " + std::string(to_string(o)));
}

bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

Date minus_years(Date d, int years) {
    const auto ymd = d.ymd();
    const std::chrono::year_month_day shifted{ymd.year() - std::chrono::years{years}, ymd.month(),
                                              ymd.day()};
    if (shifted.ok()) return Date{std::chrono::sys_days{shifted}};
    // 29 February into a non-leap year
    return Date{std::chrono::sys_days{shifted.year() / shifted.month() / std::chrono::last}};
}

std::string patient_id(const std::string& prefix, int i, int n) {
    const auto width = std::to_string(n).size();
    auto digits = std::to_string(i);
    return prefix + std::string(width - digits.size(), '0') + digits;
}

// ---------------------------------------------------------------------------
// JSON

template <class T>
T get(const json& j, const char* key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        invalid(where + ": missing or mistyped field '" + key + "'");
    }
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    if (!j.is_object()) invalid(where + " must be an object");
    for (const auto& [k, v] : j.items())
        if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
            invalid(where + ": unknown field '" + k + "'");
}

LinearPredictor parse_predictor(const json& j, const std::string& where) {
    only_keys(j, {"intercept", "coefficients"}, where);
    LinearPredictor lp;
    lp.intercept = get<double>(j, "intercept", where);
    if (j.contains("coefficients")) {
        const auto& c = j.at("coefficients");
        if (!c.is_object()) invalid(where + ": coefficients must be an object");
        for (const auto& [name, v] : c.items()) {
            if (!v.is_number()) invalid(where + ": coefficient " + name + " must be a number");
            lp.coefficients[name] = v.get<double>();
        }
    }
    return lp;
}

Date parse_date(const json& j, const char* key, const std::string& where) {
    const auto text = get<std::string>(j, key, where);
    const auto d = Date::parse(text);
    if (!d) invalid(where + ": bad date '" + text + "'");
    return *d;
}

// ---------------------------------------------------------------------------
// Truth

struct TruthPass {
    std::array<TruthValue, 2> ate;
    std::array<TruthValue, 2> att;
    TruthValue auc;
};

constexpr std::array<Therapy, 2> kTreated{Therapy::chemotherapy, Therapy::targeted};
constexpr int kAucBatches = 20;

/// Weighted AUC of scores against Bernoulli(p) labels over all ordered pairs of
/// distinct units. Counts ties at half credit.
double weighted_auc(std::vector<std::pair<double, double>> scored) {
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double num = 0.0, q_below = 0.0, total_p = 0.0, total_q = 0.0, self = 0.0;
    for (std::size_t i = 0; i < scored.size();) {
        std::size_t j = i;
        double pg = 0.0, qg = 0.0, selfg = 0.0;
        for (; j < scored.size() && scored[j].first == scored[i].first; ++j) {
            const double p = scored[j].second;
            pg += p;
            qg += 1.0 - p;
            selfg += p * (1.0 - p);
        }
        num += pg * q_below + 0.5 * (pg * qg - selfg);
        q_below += qg;
        total_p += pg;
        total_q += qg;
        self += selfg;
        i = j;
    }
    const double den = total_p * total_q - self;
    return den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
}

TruthPass truth_pass(const SyntheticSpec& spec, Outcome outcome, int n_mc, std::uint64_t mc_seed) {
    if (n_mc < 2 * kAucBatches) invalid("Monte Carlo truth needs at least 40 draws");
    const auto model = compile_outcome(spec, outcome);
    const auto treatment = compile_treatment(spec);

    Rng rng(mc_seed);
    const auto n = static_cast<std::size_t>(n_mc);
    std::array<std::vector<double>, 2> diff, weight;
    for (auto& v : diff) v.reserve(n);
    for (auto& v : weight) v.reserve(n);
    std::vector<std::pair<double, double>> scored;
    scored.reserve(n);

    std::vector<double> x(spec.covariates.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < x.size(); ++c) x[c] = draw_covariate(rng, spec.covariates[c]);
        const Therapy arm = treatment.draw_arm(rng, x);
        const double base = model.covariate_part(x);
        const double p_ref = stats::logistic(base);
        for (std::size_t k = 0; k < 2; ++k) {
            diff[k].push_back(stats::logistic(base + model.dummy(kTreated[k])) - p_ref);
            weight[k].push_back(treatment.propensity(kTreated[k], x));
        }
        const double eta = base + model.dummy(arm);
        scored.emplace_back(eta, stats::logistic(eta));
    }

    TruthPass out;
    const double root_n = std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k < 2; ++k) {
        if (model.terms.empty()) {
            const double closed = stats::logistic(model.intercept + model.dummy(kTreated[k])) -
                                  stats::logistic(model.intercept);
            out.ate[k] = {closed, 0.0};
            out.att[k] = {closed, 0.0};
            continue;
        }
        out.ate[k] = {stats::mean(diff[k]), stats::sample_sd(diff[k]) / root_n};
        const double w_mean = stats::mean(weight[k]);
        if (!(w_mean > 0.0)) {
            out.att[k] = {std::numeric_limits<double>::quiet_NaN(), 0.0};
            continue;
        }
        double wd = 0.0;
        for (std::size_t i = 0; i < n; ++i) wd += weight[k][i] * diff[k][i];
        const double att = wd / (w_mean * static_cast<double>(n));
        std::vector<double> resid(n);
        for (std::size_t i = 0; i < n; ++i) resid[i] = weight[k][i] * (diff[k][i] - att);
        out.att[k] = {att, stats::sample_sd(resid) / (root_n * w_mean)};
    }

    out.auc.value = weighted_auc(scored);
    std::vector<double> batch;
    const std::size_t size = n / kAucBatches;
    for (int b = 0; b < kAucBatches; ++b) {
        const auto first = scored.begin() + static_cast<std::ptrdiff_t>(size * static_cast<std::size_t>(b));
        batch.push_back(weighted_auc({first, first + static_cast<std::ptrdiff_t>(size)}));
    }
    out.auc.mc_se = stats::sample_sd(batch) / std::sqrt(static_cast<double>(kAucBatches));
    return out;
}

std::size_t treated_slot(Therapy t) {
    if (t == Therapy::radiation) invalid("radiation is the reference arm");
    return t == Therapy::chemotherapy ? 0 : 1;
}

double sample_effect(const SyntheticSpec& spec, const SyntheticCohort& sample, Therapy treatment,
                     Outcome outcome, bool treated_only) {
    treated_slot(treatment);
    const auto model = compile_outcome(spec, outcome);
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& u : sample.units) {
        if (treated_only && u.arm != treatment) continue;
        const double base = model.covariate_part(u.covariates);
        sum += stats::logistic(base + model.dummy(treatment)) - stats::logistic(base);
        ++count;
    }
    return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

const std::vector<std::string>& layout_names() {
    static const auto names = [] {
        std::vector<std::string> v;
        for (const auto& e : layout()) v.emplace_back(e.name);
        return v;
    }();
    return names;
}

void validate(const SyntheticSpec& spec) {
    if (spec.n < 1) invalid("n must be positive");
    if (spec.truth_draws < 2 * kAucBatches) invalid("truth_draws must be at least 40");
    std::set<std::string> seen;
    for (const auto& c : spec.covariates) {
        const auto* e = find_entry(c.name);
        if (!e) invalid("covariate " + c.name + " has no event layout");
        if (!seen.insert(c.name).second) invalid("duplicate covariate " + c.name);
        if (is_binary(e->slot) != (c.distribution == Distribution::bernoulli))
            invalid("covariate " + c.name + " needs a " +
                    (is_binary(e->slot) ? "BERNOULLI" : "NORMAL or LOGNORMAL") + " distribution");
        if (c.distribution == Distribution::bernoulli && !in_unit(c.p))
            invalid("covariate " + c.name + ": p outside [0, 1]");
        if (c.distribution != Distribution::bernoulli &&
            !(std::isfinite(c.mu) && std::isfinite(c.sigma) && c.sigma >= 0.0))
            invalid("covariate " + c.name + ": needs finite mu and sigma >= 0");
    }
    const auto& t = spec.treatment;
    if (t.randomized && (!in_unit(t.p_chemo) || !in_unit(t.p_targeted) ||
                         t.p_chemo + t.p_targeted > 1.0))
        invalid("treatment probabilities must lie in [0, 1] and sum to at most 1");
    compile_treatment(spec);
    for (const auto& [o, lp] : spec.outcome_models)
        compile(spec, lp, true, "outcome model " + std::string(to_string(o)));

    const auto& l = spec.layout;
    if (l.index_end < l.index_start) invalid("index_end precedes index_start");
    const long followup = days_between(l.index_end, l.end_of_data);
    if (followup < 365) invalid("end_of_data must be at least 365 days after index_end");
    if (l.observation_offset_days < 1 || l.precondition_offset_days < 1)
        invalid("pre-index offsets must be at least one day");
    if (l.medication_offset_days < 0 || l.medication_offset_days > followup)
        invalid("medication_offset_days must land within follow-up");
    if (l.outcome_window_days < 1 || l.outcome_window_days > followup)
        invalid("outcome_window_days must be in [1, follow-up days]");
    if (l.id_prefix.empty() || l.id_prefix.find_first_of(",\"\r\n") != std::string::npos)
        invalid("id_prefix must be non-empty plain text");
}

SyntheticSpec parse_spec(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        invalid(std::string("spec is not valid JSON: ") + e.what());
    }
    only_keys(root, {"n", "seed", "covariates", "treatment_model", "outcome_models", "event_layout",
                     "truth_draws"},
              "spec");
    SyntheticSpec spec;
    spec.n = get<int>(root, "n", "spec");
    if (!root.contains("seed") || !root["seed"].is_number_unsigned())
        invalid("spec: seed must be a non-negative integer");
    spec.seed = root["seed"].get<std::uint64_t>();
    if (root.contains("truth_draws")) spec.truth_draws = get<int>(root, "truth_draws", "spec");

    if (root.contains("covariates")) {
        if (!root["covariates"].is_array()) invalid("spec: covariates must be a list");
        for (const auto& c : root["covariates"]) {
            const std::string where = "covariate";
            only_keys(c, {"name", "distribution", "mu", "sigma", "p"}, where);
            Covariate cov;
            cov.name = get<std::string>(c, "name", where);
            const auto dist = get<std::string>(c, "distribution", where + " " + cov.name);
            if (dist == "NORMAL" || dist == "LOGNORMAL") {
                cov.distribution = dist == "NORMAL" ? Distribution::normal : Distribution::lognormal;
                cov.mu = get<double>(c, "mu", where + " " + cov.name);
                cov.sigma = get<double>(c, "sigma", where + " " + cov.name);
            } else if (dist == "BERNOULLI") {
                cov.distribution = Distribution::bernoulli;
                cov.p = get<double>(c, "p", where + " " + cov.name);
            } else {
                invalid("covariate " + cov.name + ": unknown distribution " + dist);
            }
            spec.covariates.push_back(std::move(cov));
        }
    }

    if (root.contains("treatment_model")) {
        const auto& t = root["treatment_model"];
        const std::string where = "treatment_model";
        const auto type = get<std::string>(t, "type", where);
        if (type == "RANDOMIZED") {
            only_keys(t, {"type", "p_chemo", "p_targeted"}, where);
            spec.treatment.randomized = true;
            spec.treatment.p_chemo = get<double>(t, "p_chemo", where);
            spec.treatment.p_targeted = get<double>(t, "p_targeted", where);
        } else if (type == "SEQUENTIAL_LOGIT") {
            only_keys(t, {"type", "chemo_vs_rest", "targeted_vs_radiation"}, where);
            spec.treatment.randomized = false;
            if (!t.contains("chemo_vs_rest") || !t.contains("targeted_vs_radiation"))
                invalid("SEQUENTIAL_LOGIT needs chemo_vs_rest and targeted_vs_radiation");
            spec.treatment.chemo_vs_rest = parse_predictor(t["chemo_vs_rest"], "chemo_vs_rest");
            spec.treatment.targeted_vs_radiation =
                parse_predictor(t["targeted_vs_radiation"], "targeted_vs_radiation");
        } else {
            invalid("treatment_model: unknown type " + type);
        }
    }

    if (root.contains("outcome_models")) {
        const auto& m = root["outcome_models"];
        if (!m.is_object()) invalid("outcome_models must be an object");
        for (const auto& [name, lp] : m.items()) {
            const auto o = parse_enum<Outcome>(name);
            if (!o) invalid("outcome_models: unknown outcome " + name);
            spec.outcome_models[*o] = parse_predictor(lp, "outcome model " + name);
        }
    }

    if (root.contains("event_layout")) {
        const auto& l = root["event_layout"];
        const std::string where = "event_layout";
        only_keys(l, {"index_start", "index_end", "end_of_data", "observation_offset_days",
                      "precondition_offset_days", "medication_offset_days", "outcome_window_days",
                      "background", "id_prefix"},
                  where);
        auto& out = spec.layout;
        if (l.contains("index_start")) out.index_start = parse_date(l, "index_start", where);
        if (l.contains("index_end")) out.index_end = parse_date(l, "index_end", where);
        if (l.contains("end_of_data")) out.end_of_data = parse_date(l, "end_of_data", where);
        for (auto [key, field] : {std::pair{"observation_offset_days", &out.observation_offset_days},
                                  std::pair{"precondition_offset_days", &out.precondition_offset_days},
                                  std::pair{"medication_offset_days", &out.medication_offset_days},
                                  std::pair{"outcome_window_days", &out.outcome_window_days}})
            if (l.contains(key)) *field = get<int>(l, key, where);
        if (l.contains("background")) out.background = get<bool>(l, "background", where);
        if (l.contains("id_prefix")) out.id_prefix = get<std::string>(l, "id_prefix", where);
    }

    validate(spec);
    return spec;
}

SyntheticSpec load_spec(const std::filesystem::path& path) {
    try {
        return parse_spec(csv::read_text(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::io_error) throw;
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

SyntheticCohort generate(const SyntheticSpec& spec) {
    validate(spec);
    const auto treatment = compile_treatment(spec);
    std::map<Outcome, Compiled> outcomes;
    for (const auto& [o, lp] : spec.outcome_models) outcomes[o] = compile_outcome(spec, o);

    const auto& l = spec.layout;
    const auto index_span = static_cast<std::uint64_t>(days_between(l.index_start, l.index_end)) + 1;

    SyntheticCohort out;
    Rng rng(spec.seed);
    std::vector<double> value(layout().size());
    for (int i = 1; i <= spec.n; ++i) {
        SyntheticUnit unit;
        unit.patient_id = patient_id(l.id_prefix, i, spec.n);
        unit.covariates.resize(spec.covariates.size());
        for (std::size_t c = 0; c < spec.covariates.size(); ++c)
            unit.covariates[c] = draw_covariate(rng, spec.covariates[c]);

        // Declared values first, then background fills in layout order.
        for (std::size_t e = 0; e < layout().size(); ++e) {
            const auto& entry = layout()[e];
            const int c = covariate_index(spec, entry.name);
            if (c >= 0)
                value[e] = unit.covariates[static_cast<std::size_t>(c)];
            else if (l.background || entry.slot == Slot::age)
                value[e] = draw_background(rng, entry);
            else
                value[e] = std::numeric_limits<double>::quiet_NaN();
        }

        const Date index = l.index_start.plus_days(static_cast<long>(rng.below(index_span)));
        unit.arm = treatment.draw_arm(rng, unit.covariates);
        std::array<long, 4> outcome_day{};
        for (const auto& [o, model] : outcomes) {
            const double eta = model.covariate_part(unit.covariates) + model.dummy(unit.arm);
            const auto k = static_cast<std::size_t>(o);
            unit.outcomes[k] = rng.bernoulli(stats::logistic(eta));
            if (unit.outcomes[k])
                outcome_day[k] = 1 + static_cast<long>(rng.below(
                                         static_cast<std::uint64_t>(l.outcome_window_days)));
        }

        PatientRecord p;
        p.patient_id = unit.patient_id;
        p.sex = Sex::f;
        const Date observed = index.plus_days(-l.observation_offset_days);
        const Date precondition = index.plus_days(-l.precondition_offset_days);
        const Date prescribed = index.plus_days(l.medication_offset_days);
        for (std::size_t e = 0; e < layout().size(); ++e) {
            const auto& entry = layout()[e];
            const double v = value[e];
            if (std::isnan(v)) continue;
            switch (entry.slot) {
            case Slot::age:
                p.birth_date = minus_years(index, static_cast<int>(v));
                break;
            case Slot::lab:
                p.observations.push_back({observed, static_cast<ObservationKind>(entry.index), v});
                break;
            case Slot::troponin:
                if (v == 1.0) p.observations.push_back({observed, ObservationKind::troponin, kTroponinValue});
                break;
            case Slot::condition:
                if (v == 1.0)
                    p.diagnoses.push_back({precondition, CodeSystem::icd10,
                                           kConditionCodes[static_cast<std::size_t>(entry.index)]});
                break;
            case Slot::medication:
                if (v == 1.0) p.medications.push_back({prescribed, static_cast<DrugClass>(entry.index)});
                break;
            }
        }
        p.treatments.push_back({index, unit.arm});
        for (auto o : kOutcomes) {
            const auto k = static_cast<std::size_t>(o);
            if (unit.outcomes[k])
                p.diagnoses.push_back({index.plus_days(outcome_day[k]), CodeSystem::icd10, kOutcomeCodes[k]});
        }
        p.canonicalize();
        out.cohort.patients.push_back(std::move(p));
        out.units.push_back(std::move(unit));
    }
    return out;
}

TruthValue true_ate(const SyntheticSpec& spec, Therapy treatment, Outcome outcome, int n_mc,
                    std::uint64_t mc_seed) {
    const auto k = treated_slot(treatment);
    return truth_pass(spec, outcome, n_mc, mc_seed).ate[k];
}

TruthValue true_att(const SyntheticSpec& spec, Therapy treatment, Outcome outcome, int n_mc,
                    std::uint64_t mc_seed) {
    const auto k = treated_slot(treatment);
    return truth_pass(spec, outcome, n_mc, mc_seed).att[k];
}

TruthValue true_auc(const SyntheticSpec& spec, Outcome outcome, int n_mc, std::uint64_t mc_seed) {
    return truth_pass(spec, outcome, n_mc, mc_seed).auc;
}

double sample_ate(const SyntheticSpec& spec, const SyntheticCohort& sample, Therapy treatment,
                  Outcome outcome) {
    return sample_effect(spec, sample, treatment, outcome, false);
}

double sample_att(const SyntheticSpec& spec, const SyntheticCohort& sample, Therapy treatment,
                  Outcome outcome) {
    return sample_effect(spec, sample, treatment, outcome, true);
}

std::uint64_t truth_seed(const SyntheticSpec& spec) {
    std::uint64_t state = spec.seed ^ 0x7472757468ULL;  // "truth"
    return splitmix64(state);
}

std::string truth_csv(const SyntheticSpec& spec) {
    csv::Writer out({"estimand", "treatment", "outcome", "value", "mc_se"});
    for (const auto& [o, lp] : spec.outcome_models) {
        const auto pass = truth_pass(spec, o, spec.truth_draws, truth_seed(spec));
        const std::string outcome(to_string(o));
        for (std::size_t k = 0; k < 2; ++k) {
            const std::string t(to_string(kTreated[k]));
            out.row({"ATE", t, outcome, csv::format_real(pass.ate[k].value),
                     csv::format_real(pass.ate[k].mc_se)});
            out.row({"ATT", t, outcome, csv::format_real(pass.att[k].value),
                     csv::format_real(pass.att[k].mc_se)});
        }
        out.row({"AUC", "ALL", outcome, csv::format_real(pass.auc.value),
                 csv::format_real(pass.auc.mc_se)});
    }
    return out.str();
}

void write_outputs(const SyntheticSpec& spec, const SyntheticCohort& sample,
                   const std::filesystem::path& dir) {
    write_cohort(sample.cohort, dir);
    csv::write_text(dir / "truth.csv", truth_csv(spec));
}

}  // namespace cardiotox::synth
