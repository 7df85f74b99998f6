#include "cardiotox/causal.hpp"

#include <algorithm>
#include <thread>

#include "cardiotox/csv.hpp"
#include "cardiotox/rng.hpp"
#include "cardiotox/stats.hpp"

namespace cardiotox {

namespace {

constexpr Eigen::Index kChemoColumn = 1;
constexpr Eigen::Index kTargetedColumn = 2;

void require_arms(std::span<const Therapy> arm) {
    std::array<bool, 3> seen{};
    for (auto t : arm) seen[static_cast<std::size_t>(t)] = true;
    for (auto t : kTherapies)
        if (!seen[static_cast<std::size_t>(t)])
            throw Error(ErrorCode::missing_arm, std::string(to_string(t)) + " arm is empty");
}

}  // namespace

std::string_view to_string(Estimand e) { return e == Estimand::ate ? "ATE" : "ATT"; }

GComputationDesign make_design(std::span<const BaselineFeatures> features, Outcome outcome,
                               const std::vector<std::string>& covariates) {
    std::vector<std::string> predictors{"chemotherapy", "targeted"};
    for (const auto& c : covariates)
        if (c != "chemotherapy" && c != "targeted") predictors.push_back(c);
    auto m = build_matrix(features, predictors, outcome);

    GComputationDesign d;
    d.column_names = std::move(m.column_names);
    d.x = std::move(m.rows);
    d.y = std::move(m.outcome);
    d.outcome = outcome;
    d.arm.reserve(static_cast<std::size_t>(d.x.rows()));
    for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
        if (d.x(i, kChemoColumn) == 1.0)
            d.arm.push_back(Therapy::chemotherapy);
        else if (d.x(i, kTargetedColumn) == 1.0)
            d.arm.push_back(Therapy::targeted);
        else
            d.arm.push_back(Therapy::radiation);
    }
    return d;
}

std::array<double, 4> counterfactual_effects(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                                             std::span<const Therapy> arm,
                                             const CausalOptions& options) {
    const Eigen::VectorXd eta = x * beta;
    const double b_chemo = beta(kChemoColumn);
    const double b_targeted = beta(kTargetedColumn);

    // sums of p(t) - p(ref) over: everyone, chemo arm, targeted arm, radiation arm
    std::array<double, 4> chemo_sum{}, targeted_sum{};
    std::array<std::size_t, 4> count{};
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double base = eta(i) - b_chemo * x(i, kChemoColumn) - b_targeted * x(i, kTargetedColumn);
        const double p_ref = stats::logistic(base);
        const double d_chemo = stats::logistic(base + b_chemo) - p_ref;
        const double d_targeted = stats::logistic(base + b_targeted) - p_ref;
        const std::size_t group = 1 + static_cast<std::size_t>(arm[static_cast<std::size_t>(i)]);
        for (auto g : {std::size_t{0}, group}) {
            chemo_sum[g] += d_chemo;
            targeted_sum[g] += d_targeted;
            ++count[g];
        }
    }
    const auto chemo = 1 + static_cast<std::size_t>(Therapy::chemotherapy);
    const auto targeted = 1 + static_cast<std::size_t>(Therapy::targeted);
    const auto radiation = 1 + static_cast<std::size_t>(Therapy::radiation);
    for (auto g : {chemo, targeted})
        if (count[g] == 0) throw Error(ErrorCode::missing_arm, "no treated patients for ATT");

    auto ate = [&](const std::array<double, 4>& sum, std::size_t treated) {
        if (!options.arms_only_ate) return sum[0] / static_cast<double>(count[0]);
        return (sum[treated] + sum[radiation]) /
               static_cast<double>(count[treated] + count[radiation]);
    };
    return {ate(chemo_sum, chemo), chemo_sum[chemo] / static_cast<double>(count[chemo]),
            ate(targeted_sum, targeted),
            targeted_sum[targeted] / static_cast<double>(count[targeted])};
}

std::array<double, 4> point_effects(const GComputationDesign& design, const CausalOptions& options) {
    require_arms(design.arm);
    const auto model = fit_logistic(design.x, design.y, design.column_names, options.fit);
    return counterfactual_effects(model.beta, design.x, design.arm, options);
}

namespace {

std::vector<EffectEstimate> label(const std::array<double, 4>& values, Outcome outcome) {
    std::vector<EffectEstimate> out;
    std::size_t k = 0;
    for (auto t : {Therapy::chemotherapy, Therapy::targeted})
        for (auto e : {Estimand::ate, Estimand::att}) {
            EffectEstimate est;
            est.treatment = t;
            est.outcome = outcome;
            est.estimand = e;
            est.point = values[k++];
            out.push_back(est);
        }
    return out;
}

}  // namespace

std::vector<EffectEstimate> estimate_effects(std::span<const BaselineFeatures> features,
                                             Outcome outcome,
                                             const std::vector<std::string>& covariates,
                                             const CausalOptions& options) {
    return label(point_effects(make_design(features, outcome, covariates), options), outcome);
}

BootstrapResult bootstrap_effects(std::span<const BaselineFeatures> features, Outcome outcome,
                                  const std::vector<std::string>& covariates,
                                  const BootstrapOptions& options) {
    return bootstrap_effects(make_design(features, outcome, covariates), options);
}

BootstrapResult bootstrap_effects(const GComputationDesign& design, const BootstrapOptions& options) {
    if (options.replicates < 100)
        throw Error(ErrorCode::config_error, "bootstrap needs at least 100 replicates");

    BootstrapResult result;
    result.estimates = label(point_effects(design, options.causal), design.outcome);

    const auto n = static_cast<std::size_t>(design.x.rows());
    const auto b_total = static_cast<std::size_t>(options.replicates);

    // Resample indices for every replicate come from one sequential stream.
    std::vector<Eigen::Index> indices(b_total * n);
    Rng rng(options.seed);
    for (auto& i : indices) i = static_cast<Eigen::Index>(rng.below(n));

    struct Outcome4 {
        bool ok = false;
        ErrorCode code = ErrorCode::not_converged;
        std::array<double, 4> values{};
    };
    std::vector<Outcome4> replicate(b_total);

    auto run = [&](std::size_t b) {
        std::vector<Eigen::Index> idx(indices.begin() + static_cast<std::ptrdiff_t>(b * n),
                                      indices.begin() + static_cast<std::ptrdiff_t>((b + 1) * n));
        GComputationDesign d;
        d.column_names = design.column_names;
        d.x = design.x(idx, Eigen::all);
        d.y = design.y(idx);
        d.arm.reserve(n);
        for (auto i : idx) d.arm.push_back(design.arm[static_cast<std::size_t>(i)]);
        try {
            replicate[b].values = point_effects(d, options.causal);
            replicate[b].ok = true;
        } catch (const Error& e) {
            replicate[b].code = e.code();
        }
    };

    unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(b_total)));
    if (threads == 1) {
        for (std::size_t b = 0; b < b_total; ++b) run(b);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t b = t; b < b_total; b += threads) run(b);
            });
        for (auto& th : pool) th.join();
    }

    std::array<std::vector<double>, 4> draws;
    int succeeded = 0;
    for (const auto& r : replicate) {
        if (!r.ok) {
            ++result.failures[r.code];
            continue;
        }
        ++succeeded;
        for (std::size_t k = 0; k < 4; ++k) draws[k].push_back(r.values[k]);
    }

    if (static_cast<double>(succeeded) < options.min_success_fraction * static_cast<double>(b_total)) {
        std::string taxonomy;
        for (const auto& [code, count] : result.failures)
            taxonomy += (taxonomy.empty() ? "" : ", ") + std::string(to_string(code)) + "=" +
                        std::to_string(count);
        throw Error(ErrorCode::too_many_boot_failures,
                    std::to_string(succeeded) + "/" + std::to_string(b_total) +
                        " replicates succeeded (" + taxonomy + ")");
    }

    for (std::size_t k = 0; k < 4; ++k) {
        auto& est = result.estimates[k];
        auto& v = draws[k];
        est.boot_se = stats::sample_sd(v);
        std::sort(v.begin(), v.end());
        est.ci_low = stats::quantile_sorted(v, 0.025);
        est.ci_high = stats::quantile_sorted(v, 0.975);
        est.n_boot_requested = options.replicates;
        est.n_boot_succeeded = succeeded;
        est.seed = options.seed;
    }
    return result;
}

std::string effects_csv(std::span<const EffectEstimate> estimates) {
    csv::Writer out({"treatment", "outcome", "estimand", "point", "boot_se", "ci_low", "ci_high",
                     "n_boot_succeeded", "seed"});
    for (const auto& e : estimates)
        out.row({std::string(to_string(e.treatment)), std::string(to_string(e.outcome)),
                 std::string(to_string(e.estimand)), csv::format_real(e.point),
                 csv::format_real(e.boot_se), csv::format_real(e.ci_low),
                 csv::format_real(e.ci_high), std::to_string(e.n_boot_succeeded),
                 std::to_string(e.seed)});
    return out.str();
}

}  // namespace cardiotox
