#include "cardiotox/glm.hpp"

#include <cmath>
#include <limits>

#include "cardiotox/csv.hpp"
#include "cardiotox/error.hpp"
#include "cardiotox/stats.hpp"

namespace cardiotox {

namespace {

constexpr double kBetaTolerance = 1e-8;
constexpr double kDevianceTolerance = 1e-10;
constexpr double kScoreTolerance = 1e-6;
constexpr double kSingularTolerance = 1e-12;
constexpr double kSeparationProb = 1e-10;
constexpr double kSeparationBeta = 20.0;
constexpr int kMaxHalvings = 20;

/// Bernoulli deviance (-2 log-likelihood) with stable softplus; fills eta/prob.
double deviance(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                Eigen::VectorXd& eta, Eigen::VectorXd& prob) {
    eta.noalias() = x * beta;
    prob.resize(eta.size());
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double e = eta(i);
        const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
        ll += y(i) * e - softplus;
        prob(i) = stats::logistic(e);
    }
    return -2.0 * ll;
}

bool separated(const Eigen::VectorXd& beta, const Eigen::VectorXd& prob) {
    if (beta.size() == 0 || beta.cwiseAbs().maxCoeff() <= kSeparationBeta) return false;
    for (Eigen::Index i = 0; i < prob.size(); ++i)
        if (prob(i) < kSeparationProb || prob(i) > 1.0 - kSeparationProb) return true;
    return false;
}

/// Information matrix scaled to unit diagonal, with its factorization.
struct ScaledInformation {
    Eigen::VectorXd inv_sqrt_diag;
    Eigen::MatrixXd scaled;
    Eigen::LDLT<Eigen::MatrixXd> ldlt;

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        return inv_sqrt_diag.asDiagonal() * ldlt.solve(inv_sqrt_diag.asDiagonal() * rhs);
    }

    Eigen::MatrixXd inverse() const {
        const auto p = scaled.rows();
        Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
        return inv_sqrt_diag.asDiagonal() * inv * inv_sqrt_diag.asDiagonal();
    }
};

[[noreturn]] void report_singular(const Eigen::MatrixXd& scaled, const Eigen::VectorXd& diag,
                                  const std::vector<std::string>& names) {
    std::vector<bool> offending(static_cast<std::size_t>(diag.size()), false);
    for (Eigen::Index j = 0; j < diag.size(); ++j)
        if (!(diag(j) > 0.0)) offending[static_cast<std::size_t>(j)] = true;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
    const auto& values = eig.eigenvalues();
    const double top = values.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        if (values(k) > kSingularTolerance * top) continue;
        const auto v = eig.eigenvectors().col(k);
        for (Eigen::Index j = 0; j < v.size(); ++j)
            if (std::fabs(v(j)) > 1e-6) offending[static_cast<std::size_t>(j)] = true;
    }
    std::string cols;
    for (std::size_t j = 0; j < offending.size(); ++j)
        if (offending[j]) cols += (cols.empty() ? "" : ", ") + names[j];
    throw Error(ErrorCode::singular_information, "information matrix not invertible; columns: " + cols);
}

ScaledInformation information(const Eigen::MatrixXd& x, const Eigen::VectorXd& prob,
                              double ridge, const std::vector<std::string>& names) {
    const Eigen::VectorXd w = prob.array() * (1.0 - prob.array());
    Eigen::MatrixXd xw = x.array().colwise() * w.array();
    Eigen::MatrixXd info = x.transpose() * xw;
    info.diagonal().array() += ridge;

    ScaledInformation s;
    const Eigen::VectorXd diag = info.diagonal();
    Eigen::MatrixXd scaled = info;
    bool degenerate = false;
    s.inv_sqrt_diag.resize(diag.size());
    for (Eigen::Index j = 0; j < diag.size(); ++j) {
        if (!(diag(j) > 0.0)) {
            degenerate = true;
            s.inv_sqrt_diag(j) = 1.0;
        } else {
            s.inv_sqrt_diag(j) = 1.0 / std::sqrt(diag(j));
        }
    }
    scaled = s.inv_sqrt_diag.asDiagonal() * info * s.inv_sqrt_diag.asDiagonal();
    if (degenerate) report_singular(scaled, diag, names);

    s.ldlt.compute(scaled);
    const auto d = s.ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (s.ldlt.info() != Eigen::Success || !(d.minCoeff() > kSingularTolerance * dmax))
        report_singular(scaled, diag, names);
    s.scaled = std::move(scaled);
    return s;
}

}  // namespace

LogisticModel fit_logistic(const FeatureMatrix& x, const FitOptions& options) {
    return fit_logistic(x.rows, x.outcome, x.column_names, options);
}

LogisticModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           std::vector<std::string> column_names, const FitOptions& options) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    if (static_cast<Eigen::Index>(column_names.size()) != p || y.size() != n)
        throw Error(ErrorCode::dimension_mismatch, "design, response and column names disagree");

    Eigen::Index positives = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y(i) != 0.0 && y(i) != 1.0)
            throw Error(ErrorCode::degenerate_outcome, "response must be 0/1");
        positives += y(i) == 1.0;
    }
    if (positives == 0 || positives == n)
        throw Error(ErrorCode::degenerate_outcome, "outcome has a single class");
    if (n <= p)
        throw Error(ErrorCode::too_few_rows,
                    "n = " + std::to_string(n) + " must exceed p = " + std::to_string(p));

    LogisticModel m;
    m.column_names = std::move(column_names);
    m.n = n;
    m.beta = Eigen::VectorXd::Zero(p);

    Eigen::VectorXd eta, prob, cand_eta, cand_prob;
    double dev = deviance(x, y, m.beta, eta, prob);

    for (int it = 1; it <= options.max_iterations; ++it) {
        const auto info = information(x, prob, options.ridge, m.column_names);
        const Eigen::VectorXd score = x.transpose() * (y - prob);
        Eigen::VectorXd step = info.solve(score);

        Eigen::VectorXd cand = m.beta + step;
        double cand_dev = deviance(x, y, cand, cand_eta, cand_prob);
        for (int h = 0; h < kMaxHalvings &&
                        (!std::isfinite(cand_dev) || cand_dev > dev + 1e-12 * (1.0 + std::fabs(dev)));
             ++h) {
            step *= 0.5;
            cand = m.beta + step;
            cand_dev = deviance(x, y, cand, cand_eta, cand_prob);
        }

        const double delta = step.cwiseAbs().maxCoeff();
        const double rel = std::fabs(dev - cand_dev) / (std::fabs(cand_dev) + 1.0);
        m.beta = std::move(cand);
        dev = cand_dev;
        std::swap(eta, cand_eta);
        std::swap(prob, cand_prob);
        m.iterations = it;

        if (separated(m.beta, prob))
            throw Error(ErrorCode::separation_detected,
                        "fitted probabilities at 0/1 with |beta| > 20 after " +
                            std::to_string(it) + " iterations");

        if (delta < kBetaTolerance || rel < kDevianceTolerance) {
            const Eigen::VectorXd s = x.transpose() * (y - prob);
            if (s.cwiseAbs().maxCoeff() < kScoreTolerance) {
                m.converged = true;
                break;
            }
        }
    }
    if (!m.converged)
        throw Error(ErrorCode::not_converged,
                    "no convergence in " + std::to_string(options.max_iterations) + " iterations");

    const auto info = information(x, prob, options.ridge, m.column_names);
    m.covariance = info.inverse();
    m.covariance = 0.5 * (m.covariance + m.covariance.transpose()).eval();
    m.se = m.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    m.log_likelihood = -0.5 * dev;
    m.max_abs_score = (x.transpose() * (y - prob)).cwiseAbs().maxCoeff();
    return m;
}

double predict_prob(const LogisticModel& m, std::span<const double> row) {
    if (static_cast<Eigen::Index>(row.size()) != m.beta.size())
        throw Error(ErrorCode::dimension_mismatch,
                    "row has " + std::to_string(row.size()) + " entries, model has " +
                        std::to_string(m.beta.size()));
    double eta = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) eta += row[j] * m.beta(static_cast<Eigen::Index>(j));
    return stats::logistic(eta);
}

Eigen::VectorXd predict_probs(const LogisticModel& m, const Eigen::MatrixXd& x) {
    if (x.cols() != m.beta.size())
        throw Error(ErrorCode::dimension_mismatch, "design width does not match the model");
    Eigen::VectorXd eta = x * m.beta;
    return eta.unaryExpr([](double e) { return stats::logistic(e); });
}

WaldTest wald(const LogisticModel& m, Eigen::Index j) {
    if (!(m.se(j) > 0.0))
        throw Error(ErrorCode::zero_se, "column " + m.column_names[static_cast<std::size_t>(j)]);
    WaldTest t;
    t.z = m.beta(j) / m.se(j);
    t.p_value = stats::two_sided_p(t.z);
    return t;
}

EliminationTrace backward_eliminate(const FeatureMatrix& x, double alpha_stay,
                                    const FitOptions& options) {
    std::vector<Eigen::Index> active(static_cast<std::size_t>(x.p()));
    for (Eigen::Index j = 0; j < x.p(); ++j) active[static_cast<std::size_t>(j)] = j;

    EliminationTrace trace;
    FeatureMatrix current = x;
    for (;;) {
        auto model = fit_logistic(current, options);
        Eigen::Index worst = -1;
        double worst_p = -1.0;
        for (Eigen::Index j = 0; j < current.p(); ++j) {
            if (current.column_names[static_cast<std::size_t>(j)] == kInterceptName) continue;
            const double pv = wald(model, j).p_value;
            if (pv >= worst_p) {
                worst_p = pv;
                worst = j;
            }
        }
        if (worst < 0 || worst_p <= alpha_stay) {
            trace.final_model = std::move(model);
            return trace;
        }
        trace.steps.push_back({current.column_names[static_cast<std::size_t>(worst)], worst_p});
        active.erase(active.begin() + worst);
        current = x.select_columns(active);
    }
}

Eigen::VectorXd normalized_coefficients(const LogisticModel& m, const FeatureMatrix& x) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m.beta.size());
    for (Eigen::Index j = 0; j < m.beta.size(); ++j) {
        const auto& name = m.column_names[static_cast<std::size_t>(j)];
        if (name == kInterceptName) continue;
        const auto col = x.column(name);
        if (col < 0) throw Error(ErrorCode::unknown_feature, name);
        std::vector<double> v(x.rows.col(col).data(), x.rows.col(col).data() + x.n());
        const double sd = stats::sample_sd(v);
        out(j) = sd == 0.0 ? 0.0 : m.beta(j) * sd;
    }
    return out;
}

std::string coefficient_report_csv(const LogisticModel& m, const FeatureMatrix& x) {
    csv::Writer out({"variable", "coefficient", "std_error", "std_dev", "normalized_coefficient",
                     "z", "p_value"});
    const auto normalized = normalized_coefficients(m, x);
    for (Eigen::Index j = 0; j < m.beta.size(); ++j) {
        const auto& name = m.column_names[static_cast<std::size_t>(j)];
        const auto col = x.column(name);
        std::vector<double> v(x.rows.col(col).data(), x.rows.col(col).data() + x.n());
        const auto test = wald(m, j);
        out.row({name, csv::format_real(m.beta(j)), csv::format_real(m.se(j)),
                 csv::format_real(stats::sample_sd(v)), csv::format_real(normalized(j)),
                 csv::format_real(test.z), csv::format_real(test.p_value)});
    }
    return out.str();
}

std::string elimination_trace_csv(const EliminationTrace& trace) {
    csv::Writer out({"step", "removed_column", "p_value"});
    for (std::size_t i = 0; i < trace.steps.size(); ++i)
        out.row({std::to_string(i + 1), trace.steps[i].removed_column,
                 csv::format_real(trace.steps[i].p_value)});
    return out.str();
}

}  // namespace cardiotox
