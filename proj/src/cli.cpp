#include "cardiotox/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "json.hpp"

#include "cardiotox/causal.hpp"
#include "cardiotox/csv.hpp"
#include "cardiotox/error.hpp"
#include "cardiotox/eval.hpp"
#include "cardiotox/glm.hpp"
#include "cardiotox/synth.hpp"

namespace cardiotox::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::config_error, what); }

template <class T>
T value_of(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        config_error(std::string("config field '") + key + "' has the wrong type");
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return (path.is_absolute() ? path : base / path).lexically_normal();
}

std::vector<DrugClass> drug_list(const json& j, const char* key) {
    std::vector<DrugClass> out;
    for (const auto& name : value_of<std::vector<std::string>>(j, key)) {
        const auto c = parse_enum<DrugClass>(name);
        if (!c) config_error(std::string(key) + ": unknown drug class " + name);
        out.push_back(*c);
    }
    return out;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<Outcome> parse_outcomes(const std::string& flag) {
    if (flag.empty()) return {kOutcomes.begin(), kOutcomes.end()};
    const auto o = parse_enum<Outcome>(flag);
    if (!o) config_error("--outcome must be one of CHF, CAD, CM, MI");
    return {*o};
}

struct Contrast {
    const char* name;
    Therapy treated;
};
constexpr std::array<Contrast, 2> kContrasts{Contrast{"CHEMO_VS_RADIATION", Therapy::chemotherapy},
                                             Contrast{"TARGETED_VS_RADIATION", Therapy::targeted}};

/// Parsed flags plus everything a command needs to run and record itself.
struct Invocation {
    std::string command;
    std::string config_path;
    std::string spec_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string outcome;
    std::string contrast;
    std::string feature_set;
    std::optional<double> alpha_stay;
    std::optional<int> k;
    std::optional<int> bootstrap;
    std::optional<unsigned> threads;
};

class Runner {
public:
    Runner(const Invocation& inv, std::ostream& out) : inv_(inv), log_(out) {}

    int execute() {
        if (inv_.command == "synth") return synth();
        load();
        if (inv_.command == "validate") return validate();
        if (inv_.command == "features") return features();
        if (inv_.command == "fit") return fit();
        if (inv_.command == "cv") return cv();
        if (inv_.command == "effects") return effects();
        if (inv_.command == "compare") return compare();
        config_error("unknown command " + inv_.command);
    }

private:
    void load() {
        if (inv_.config_path.empty()) config_error("--config is required for " + inv_.command);
        config_text_ = csv::read_text(inv_.config_path);
        cfg_ = parse_config(config_text_, fs::path(inv_.config_path).parent_path());
        if (inv_.seed) cfg_.seed = inv_.seed;
        if (inv_.alpha_stay) cfg_.alpha_stay = *inv_.alpha_stay;
        if (inv_.k) cfg_.k = *inv_.k;
        if (inv_.bootstrap) cfg_.bootstrap = *inv_.bootstrap;
        if (inv_.threads) cfg_.threads = *inv_.threads;
        if (!inv_.out.empty()) cfg_.out = fs::path(inv_.out);
        if (!cfg_.out) config_error("no output directory (set \"out\" or pass --out)");
        if (!(cfg_.alpha_stay > 0.0 && cfg_.alpha_stay <= 1.0))
            config_error("alpha_stay must be in (0, 1]");
        if (cfg_.k < 2) throw Error(ErrorCode::bad_k, "k must be at least 2");
        if (cfg_.bootstrap < 100) config_error("bootstrap replicates must be at least 100");
        out_dir_ = *cfg_.out;
        seed_ = cfg_.seed;
    }

    void require_seed() {
        if (!seed_) config_error(inv_.command + " needs a seed (config \"seed\" or --seed)");
    }

    const Cohort& cohort() {
        if (!cohort_) cohort_ = load_cohort(cfg_.inputs);
        return *cohort_;
    }

    const CodeMap& codes() {
        if (!codes_) codes_ = cfg_.code_map ? CodeMap::from_csv(*cfg_.code_map) : CodeMap::builtin();
        return *codes_;
    }

    Date end_of_data() const {
        if (!cfg_.end_of_data) config_error("config needs end_of_data");
        return *cfg_.end_of_data;
    }

    const PreprocessResult& prepared() {
        if (!prepared_) {
            auto pc = cfg_.preprocess;
            pc.end_of_data = end_of_data();
            prepared_ = preprocess(cohort(), codes(), pc);
        }
        return *prepared_;
    }

    void write(const std::string& name, const std::string& text) {
        fs::create_directories(out_dir_);
        csv::write_text(out_dir_ / name, text);
        log_ << "wrote " << (out_dir_ / name).string() << "\n";
    }

    /// run_manifest.json keeps one entry per command run into the directory.
    void manifest(std::string_view hashed) {
        const auto path = out_dir_ / "run_manifest.json";
        json m = json::object();
        if (fs::exists(path)) {
            try {
                m = json::parse(csv::read_text(path));
            } catch (const json::exception&) {
                m = json::object();
            }
        }
        std::string overrides;
        for (const auto& [flag, v] :
             {std::pair{"alpha_stay", inv_.alpha_stay ? csv::format_real(*inv_.alpha_stay) : ""},
              std::pair{"k", inv_.k ? std::to_string(*inv_.k) : ""},
              std::pair{"bootstrap", inv_.bootstrap ? std::to_string(*inv_.bootstrap) : ""},
              std::pair{"outcome", inv_.outcome}, std::pair{"contrast", inv_.contrast},
              std::pair{"feature_set", inv_.feature_set}})
            if (!v.empty()) overrides += std::string("\n") + flag + "=" + v;
        json entry;
        entry["config_hash"] = "fnv1a64:" + hex(fnv1a(std::string(hashed) + overrides));
        entry["seed"] = seed_ ? json(*seed_) : json(nullptr);
        m["version"] = kVersion;
        m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                     "." + std::to_string(EIGEN_MINOR_VERSION);
        m["commands"][inv_.command] = entry;
        write("run_manifest.json", m.dump(2) + "\n");
    }

    int validate() {
        const auto report = apply_eligibility(cohort(), codes(), end_of_data());
        write("exclusions.csv", exclusions_csv(report));
        log_ << cohort().patients.size() << " patients, " << report.included.size()
             << " included, " << report.excluded.size() << " excluded\n";
        manifest(config_text_);
        return 0;
    }

    int features() {
        const auto& r = prepared();
        write("features.csv", features_csv(r.features));
        write("exclusions.csv", exclusions_csv(r.eligibility));
        manifest(config_text_);
        return 0;
    }

    FeatureMatrix outcome_matrix(Outcome o) {
        return build_matrix(prepared().features, cfg_.feature_set(FeatureSetId::outcome_model), o);
    }

    int fit() {
        for (auto o : parse_outcomes(inv_.outcome)) {
            const std::string name(to_string(o));
            const auto x = outcome_matrix(o);
            const auto full = fit_logistic(x);
            const auto trace = backward_eliminate(x, cfg_.alpha_stay);
            write("coefficients_full_" + name + ".csv", coefficient_report_csv(full, x));
            write("coefficients_eliminated_" + name + ".csv",
                  coefficient_report_csv(trace.final_model, x));
            write("elimination_trace_" + name + ".csv", elimination_trace_csv(trace));
        }
        manifest(config_text_);
        return 0;
    }

    int cv() {
        require_seed();
        std::vector<std::vector<std::string>> cv_rows;
        for (auto o : parse_outcomes(inv_.outcome)) {
            const std::string name(to_string(o));
            const auto x = outcome_matrix(o);
            CvOptions opts;
            opts.k = cfg_.k;
            opts.seed = *seed_;
            opts.stratified = cfg_.stratified;
            opts.alpha_stay = cfg_.eliminate_in_cv ? std::optional<double>(cfg_.alpha_stay) : std::nullopt;
            const auto report = cross_validated_auc(x, opts);
            append_cv_rows(cv_rows, name, report);

            std::vector<std::vector<std::string>> roc_rows;
            append_roc_rows(roc_rows, name,
                            roc_curve(report.held_out_scores,
                                      std::span<const double>(x.outcome.data(),
                                                              static_cast<std::size_t>(x.n()))));
            csv::Writer roc_out({"outcome", "fpr", "tpr", "threshold"});
            for (const auto& r : roc_rows) roc_out.row(r);
            write("roc_points_" + name + ".csv", roc_out.str());
            log_ << name << ": mean AUC " << csv::format_real(report.mean_auc) << ", pooled AUC "
                 << csv::format_real(report.pooled_auc) << "\n";
        }
        csv::Writer cv_out({"outcome", "fold", "auc"});
        for (const auto& r : cv_rows) cv_out.row(r);
        cv_out.comment(cfg_.eliminate_in_cv
                           ? "backward elimination repeated inside every training fold"
                           : "no backward elimination; full feature set in every fold");
        cv_out.comment("imputation means come from the full included cohort, before fold split");
        write("cv_report.csv", cv_out.str());
        manifest(config_text_);
        return 0;
    }

    int effects() {
        require_seed();
        std::vector<EffectEstimate> all;
        for (auto o : parse_outcomes(inv_.outcome)) {
            auto covariates = cfg_.feature_set(FeatureSetId::outcome_model);
            if (cfg_.eliminate_in_causal) {
                const auto trace = backward_eliminate(outcome_matrix(o), cfg_.alpha_stay);
                covariates.clear();
                for (const auto& c : trace.final_model.column_names)
                    if (c != kInterceptName) covariates.push_back(c);
            }
            BootstrapOptions opts;
            opts.replicates = cfg_.bootstrap;
            opts.seed = *seed_;
            opts.threads = cfg_.threads;
            opts.causal.arms_only_ate = cfg_.arms_only_ate;
            const auto result = bootstrap_effects(prepared().features, o, covariates, opts);
            all.insert(all.end(), result.estimates.begin(), result.estimates.end());
        }
        write("effects.csv", effects_csv(all));
        manifest(config_text_);
        return 0;
    }

    int compare() {
        std::vector<Contrast> contrasts;
        for (const auto& c : kContrasts)
            if (inv_.contrast.empty() || inv_.contrast == c.name) contrasts.push_back(c);
        if (contrasts.empty())
            config_error("--contrast must be CHEMO_VS_RADIATION or TARGETED_VS_RADIATION");
        std::vector<FeatureSetId> sets;
        for (auto id : {FeatureSetId::baseline_health, FeatureSetId::medication_model})
            if (inv_.feature_set.empty() || inv_.feature_set == to_string(id)) sets.push_back(id);
        if (sets.empty()) config_error("--feature-set must be BASELINE_HEALTH or MEDICATION_MODEL");

        const auto& features = prepared().features;
        for (const auto& c : contrasts) {
            for (auto t : {c.treated, Therapy::radiation})
                if (std::none_of(features.begin(), features.end(),
                                 [&](const BaselineFeatures& f) { return f.treatment == t; }))
                    throw Error(ErrorCode::missing_arm,
                                std::string(to_string(t)) + " arm is empty for " + c.name);
            for (auto id : sets) {
                const auto x = build_matrix(features, cfg_.feature_set(id),
                                            TreatmentContrast{c.treated, Therapy::radiation});
                const auto full = fit_logistic(x);
                const auto trace = backward_eliminate(x, cfg_.alpha_stay);
                const auto stem = std::string("compare_") + c.name + "_" + std::string(to_string(id));
                write(stem + "_full.csv", coefficient_report_csv(full, x));
                write(stem + "_eliminated.csv", coefficient_report_csv(trace.final_model, x));
                write(stem + "_trace.csv", elimination_trace_csv(trace));
            }
        }
        manifest(config_text_);
        return 0;
    }

    int synth() {
        if (inv_.spec_path.empty()) config_error("synth needs --spec");
        const auto text = csv::read_text(inv_.spec_path);
        auto spec = synth::load_spec(inv_.spec_path);
        if (inv_.seed) spec.seed = *inv_.seed;
        if (inv_.out.empty()) config_error("synth needs --out");
        out_dir_ = inv_.out;
        seed_ = spec.seed;
        const auto sample = synth::generate(spec);
        synth::write_outputs(spec, sample, out_dir_);
        log_ << "wrote " << spec.n << " synthetic patients to " << out_dir_.string() << "\n";
        manifest(text);
        return 0;
    }

    const Invocation& inv_;
    std::ostream& log_;
    std::string config_text_;
    RunConfig cfg_;
    fs::path out_dir_;
    std::optional<std::uint64_t> seed_;
    std::optional<Cohort> cohort_;
    std::optional<CodeMap> codes_;
    std::optional<PreprocessResult> prepared_;
};

}  // namespace

const std::vector<std::string>& RunConfig::feature_set(FeatureSetId id) const {
    const auto it = feature_sets.find(id);
    return it == feature_sets.end() ? builtin_feature_set(id) : it->second;
}

RunConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) config_error("config must be a JSON object");
    static const std::vector<std::string> keys{
        "input_dir", "inputs", "code_map", "end_of_data", "feature_sets", "alpha_stay", "k",
        "bootstrap", "seed", "out", "eliminate_in_causal", "arms_only_ate", "eliminate_in_cv",
        "stratified", "threads", "outcome_horizon_days", "troponin_threshold",
        "antihypertensive_classes", "antihyperlipidemia_classes"};
    for (const auto& [k, v] : j.items())
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
            config_error("unknown config field '" + k + "'");

    RunConfig c;
    if (j.contains("input_dir") == j.contains("inputs"))
        config_error("config needs exactly one of input_dir and inputs");
    if (j.contains("input_dir")) {
        c.inputs = CohortPaths::in_directory(resolve(base_dir, value_of<std::string>(j, "input_dir")));
    } else {
        const auto& in = j["inputs"];
        if (!in.is_object()) config_error("inputs must be an object");
        for (auto [key, field] : {std::pair{"patients", &c.inputs.patients},
                                  std::pair{"observations", &c.inputs.observations},
                                  std::pair{"diagnoses", &c.inputs.diagnoses},
                                  std::pair{"medications", &c.inputs.medications},
                                  std::pair{"treatments", &c.inputs.treatments}}) {
            if (!in.contains(key)) config_error(std::string("inputs.") + key + " is missing");
            *field = resolve(base_dir, value_of<std::string>(in, key));
        }
    }
    if (j.contains("code_map")) c.code_map = resolve(base_dir, value_of<std::string>(j, "code_map"));
    if (j.contains("end_of_data")) {
        const auto text = value_of<std::string>(j, "end_of_data");
        c.end_of_data = Date::parse(text);
        if (!c.end_of_data) config_error("end_of_data is not a YYYY-MM-DD date: " + text);
    }
    if (j.contains("feature_sets")) {
        const auto& fsets = j["feature_sets"];
        if (!fsets.is_object()) config_error("feature_sets must be an object");
        for (const auto& [name, list] : fsets.items()) {
            const auto id = parse_feature_set(name);
            if (!id) config_error("unknown feature set " + name);
            auto names = value_of<std::vector<std::string>>(fsets, name.c_str());
            for (const auto& n : names)
                if (!feature_value(BaselineFeatures{}, n))
                    throw Error(ErrorCode::unknown_feature, name + ": " + n);
            c.feature_sets[*id] = std::move(names);
        }
    }
    if (j.contains("alpha_stay")) c.alpha_stay = value_of<double>(j, "alpha_stay");
    if (j.contains("k")) c.k = value_of<int>(j, "k");
    if (j.contains("bootstrap")) c.bootstrap = value_of<int>(j, "bootstrap");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) config_error("seed must be a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("out")) c.out = resolve(base_dir, value_of<std::string>(j, "out"));
    for (auto [key, field] : {std::pair{"eliminate_in_causal", &c.eliminate_in_causal},
                              std::pair{"arms_only_ate", &c.arms_only_ate},
                              std::pair{"eliminate_in_cv", &c.eliminate_in_cv},
                              std::pair{"stratified", &c.stratified}})
        if (j.contains(key)) *field = value_of<bool>(j, key);
    if (j.contains("threads")) c.threads = value_of<unsigned>(j, "threads");
    if (j.contains("outcome_horizon_days") && !j["outcome_horizon_days"].is_null()) {
        c.preprocess.outcome_horizon_days = value_of<int>(j, "outcome_horizon_days");
        if (*c.preprocess.outcome_horizon_days < 1) config_error("outcome_horizon_days must be positive");
    }
    if (j.contains("troponin_threshold") && !j["troponin_threshold"].is_null())
        c.preprocess.troponin_threshold = value_of<double>(j, "troponin_threshold");
    if (j.contains("antihypertensive_classes"))
        c.preprocess.antihypertensive_classes = drug_list(j, "antihypertensive_classes");
    if (j.contains("antihyperlipidemia_classes"))
        c.preprocess.antihyperlipidemia_classes = drug_list(j, "antihyperlipidemia_classes");
    return c;
}

RunConfig load_config(const fs::path& path) {
    return parse_config(csv::read_text(path), path.parent_path());
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cardiotoxicity risk models and treatment-effect estimates from EHR-style tables",
                 "cardiotox"};
    app.set_version_flag("--version", kVersion);
    app.fallthrough();
    app.require_subcommand(1);

    Invocation inv;
    app.add_option("--config", inv.config_path, "run configuration (JSON)");
    app.add_option("--seed", inv.seed, "random seed (required by cv, effects)");
    app.add_option("--out", inv.out, "output directory");
    app.add_option("--outcome", inv.outcome, "CHF, CAD, CM or MI (default: all four)");
    app.add_option("--contrast", inv.contrast, "CHEMO_VS_RADIATION or TARGETED_VS_RADIATION");
    app.add_option("--feature-set", inv.feature_set, "BASELINE_HEALTH or MEDICATION_MODEL");
    app.add_option("--alpha-stay", inv.alpha_stay, "backward-elimination stay threshold");
    app.add_option("--k", inv.k, "cross-validation folds");
    app.add_option("--bootstrap", inv.bootstrap, "bootstrap replicates");
    app.add_option("--threads", inv.threads, "bootstrap worker threads (0 = all cores)");
    app.add_option("--spec", inv.spec_path, "synthetic cohort spec (JSON)");

    for (const auto& [name, help] :
         {std::pair{"validate", "load the tables and report exclusions"},
          std::pair{"features", "write the baseline feature table"},
          std::pair{"fit", "full and backward-eliminated outcome models"},
          std::pair{"cv", "cross-validated AUC and ROC points"},
          std::pair{"effects", "ATE/ATT with bootstrap intervals"},
          std::pair{"compare", "arm-restricted treatment comparison models"},
          std::pair{"synth", "generate a synthetic cohort with known truth"}})
        app.add_subcommand(name, help)->callback([&inv, n = std::string(name)] { inv.command = n; });

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_code_for(ErrorCode::config_error);
    }

    try {
        Runner runner(inv, out);
        return runner.execute();
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cardiotox::cli
