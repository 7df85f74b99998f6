#include <cmath>
#include <random>

#include "doctest.h"

#include "cardiotox/causal.hpp"
#include "cardiotox/error.hpp"
#include "oracles.hpp"

using namespace cardiotox;

namespace {

std::vector<BaselineFeatures> cohort(int n, double b0, double b_chemo, double b_tgt, double b_age,
                                     std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u;
    std::vector<BaselineFeatures> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& f = out[static_cast<std::size_t>(i)];
        f.patient_id = "p" + std::to_string(100000 + i);
        f.age = 55 + 10 * z(g);
        // older patients lean towards chemotherapy
        const double r = u(g) + 0.01 * (f.age - 55);
        f.treatment = r > 0.66 ? Therapy::chemotherapy : (r > 0.33 ? Therapy::targeted : Therapy::radiation);
        const double eta = b0 + b_chemo * (f.treatment == Therapy::chemotherapy) +
                           b_tgt * (f.treatment == Therapy::targeted) + b_age * (f.age - 55);
        f.outcomes[0] = u(g) < oracle::logistic(eta);
    }
    return out;
}

double value(const std::vector<EffectEstimate>& e, Therapy t, Estimand m) {
    for (const auto& x : e)
        if (x.treatment == t && x.estimand == m) return x.point;
    FAIL("missing estimate");
    return 0.0;
}

}  // namespace

TEST_CASE("counterfactual contrasts in closed form") {
    Eigen::MatrixXd x(4, 3);
    x << 1, 1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 0;
    const std::vector<Therapy> arm{Therapy::chemotherapy, Therapy::targeted, Therapy::radiation,
                                   Therapy::radiation};
    const auto e = counterfactual_effects(Eigen::Vector3d(-2, 1, 0), x, arm);
    const double truth = oracle::logistic(-1) - oracle::logistic(-2);
    CHECK(std::fabs(truth - 0.149738499347878) < 1e-14);
    CHECK(std::fabs(e[0] - truth) < 1e-15);
    CHECK(std::fabs(e[1] - truth) < 1e-15);
    CHECK(e[2] == 0.0);
    CHECK(e[3] == 0.0);
}

TEST_CASE("zero treatment coefficients give exactly zero") {
    Eigen::MatrixXd x(3, 4);
    x << 1, 1, 0, 0.3, 1, 0, 1, -2.0, 1, 0, 0, 5.0;
    const std::vector<Therapy> arm{Therapy::chemotherapy, Therapy::targeted, Therapy::radiation};
    Eigen::VectorXd beta(4);
    beta << -1.3, 0.0, 0.0, 0.7;
    for (double v : counterfactual_effects(beta, x, arm)) CHECK(v == 0.0);
}

TEST_CASE("no-covariate model: ATE equals ATT and the closed form") {
    const auto f = cohort(3000, -1.5, 0.8, -0.4, 0.0, 1);
    const auto design = make_design(f, Outcome::chf, {});
    CHECK(design.column_names == std::vector<std::string>{"intercept", "chemotherapy", "targeted"});
    const auto m = fit_logistic(design.x, design.y, design.column_names);
    const auto e = point_effects(design);
    const double chemo = oracle::logistic(m.beta(0) + m.beta(1)) - oracle::logistic(m.beta(0));
    const double tgt = oracle::logistic(m.beta(0) + m.beta(2)) - oracle::logistic(m.beta(0));
    CHECK(std::fabs(e[0] - chemo) < 1e-12);
    CHECK(std::fabs(e[0] - e[1]) < 1e-12);
    CHECK(std::fabs(e[2] - tgt) < 1e-12);
    CHECK(std::fabs(e[2] - e[3]) < 1e-12);
}

TEST_CASE("signs follow the treatment coefficients and ATT is the treated mean") {
    const auto f = cohort(2000, -1.0, 0.9, -0.7, 0.05, 2);
    const auto est = estimate_effects(f, Outcome::chf, {"age"});
    REQUIRE(est.size() == 4);
    const auto design = make_design(f, Outcome::chf, {"age"});
    const auto m = fit_logistic(design.x, design.y, design.column_names);
    CHECK(value(est, Therapy::chemotherapy, Estimand::ate) * m.beta(1) > 0);
    CHECK(value(est, Therapy::chemotherapy, Estimand::att) * m.beta(1) > 0);
    CHECK(value(est, Therapy::targeted, Estimand::ate) * m.beta(2) > 0);

    // direct recomputation of the per-patient differences
    double all = 0, treated = 0;
    int nt = 0;
    for (Eigen::Index i = 0; i < design.x.rows(); ++i) {
        const double base = m.beta(0) + m.beta(3) * design.x(i, 3);
        const double d = oracle::logistic(base + m.beta(1)) - oracle::logistic(base);
        all += d;
        if (design.arm[static_cast<std::size_t>(i)] == Therapy::chemotherapy) {
            treated += d;
            ++nt;
        }
    }
    CHECK(std::fabs(value(est, Therapy::chemotherapy, Estimand::ate) - all / design.x.rows()) < 1e-12);
    CHECK(std::fabs(value(est, Therapy::chemotherapy, Estimand::att) - treated / nt) < 1e-12);

    CausalOptions arms;
    arms.arms_only_ate = true;
    const auto restricted = estimate_effects(f, Outcome::chf, {"age"}, arms);
    CHECK(value(restricted, Therapy::chemotherapy, Estimand::att) ==
          value(est, Therapy::chemotherapy, Estimand::att));
    CHECK(value(restricted, Therapy::chemotherapy, Estimand::ate) !=
          value(est, Therapy::chemotherapy, Estimand::ate));
}

TEST_CASE("estimates are invariant to patient order") {
    auto f = cohort(1500, -1.0, 0.5, 0.2, 0.03, 3);
    const auto a = estimate_effects(f, Outcome::chf, {"age"});
    std::mt19937_64 g(8);
    std::shuffle(f.begin(), f.end(), g);
    const auto b = estimate_effects(f, Outcome::chf, {"age"});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::fabs(a[i].point - b[i].point) < 1e-12);
}

TEST_CASE("missing arm and unknown covariate") {
    auto f = cohort(300, -0.5, 0.5, 0.5, 0.0, 4);
    for (auto& x : f)
        if (x.treatment == Therapy::targeted) x.treatment = Therapy::radiation;
    try {
        estimate_effects(f, Outcome::chf, {});
        FAIL("expected MISSING_ARM");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::missing_arm);
        CHECK(exit_code_for(e.code()) == 3);
    }
    CHECK_THROWS_AS(make_design(f, Outcome::chf, {"height"}), Error);
}

TEST_CASE("bootstrap is seeded, ordered and bounded") {
    const auto f = cohort(800, -1.0, 0.6, -0.3, 0.02, 5);
    BootstrapOptions o;
    o.replicates = 200;
    o.seed = 77;
    o.threads = 3;
    const auto a = bootstrap_effects(f, Outcome::chf, {"age"}, o);
    o.threads = 1;
    const auto b = bootstrap_effects(f, Outcome::chf, {"age"}, o);
    CHECK(effects_csv(a.estimates) == effects_csv(b.estimates));
    const auto point = estimate_effects(f, Outcome::chf, {"age"});
    for (std::size_t i = 0; i < a.estimates.size(); ++i) {
        const auto& e = a.estimates[i];
        CHECK(e.point == point[i].point);
        CHECK(e.ci_low <= e.ci_high);
        CHECK(e.boot_se > 0.0);
        CHECK(e.n_boot_requested == 200);
        CHECK(e.n_boot_succeeded == 200);
        CHECK(e.seed == 77);
    }
    o.seed = 78;
    CHECK(effects_csv(bootstrap_effects(f, Outcome::chf, {"age"}, o).estimates) !=
          effects_csv(a.estimates));
}

TEST_CASE("bootstrap failure floor") {
    // one radiation patient: about a third of resamples lose the reference arm
    auto f = cohort(200, -1.0, 0.4, 0.4, 0.0, 6);
    bool kept = false;
    for (auto& x : f)
        if (x.treatment == Therapy::radiation) {
            if (kept) x.treatment = Therapy::targeted;
            kept = true;
        }
    BootstrapOptions o;
    o.replicates = 100;
    o.seed = 1;
    try {
        bootstrap_effects(f, Outcome::chf, {}, o);
        FAIL("expected TOO_MANY_BOOT_FAILURES");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::too_many_boot_failures);
        CHECK(std::string(e.what()).find("MISSING_ARM") != std::string::npos);
    }
}

TEST_CASE("effects csv layout") {
    EffectEstimate e;
    e.point = 0.0545;
    e.boot_se = 0.0007;
    e.ci_low = 0.04;
    e.ci_high = 0.07;
    e.n_boot_succeeded = 1000;
    e.seed = 42;
    const std::vector<EffectEstimate> v{e};
    CHECK(effects_csv(v) ==
          "treatment,outcome,estimand,point,boot_se,ci_low,ci_high,n_boot_succeeded,seed\n"
          "CHEMOTHERAPY,CHF,ATE,0.0545,0.0007,0.04,0.07,1000,42\n");
}
