#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cardiotox {

inline constexpr std::string_view kInterceptName = "intercept";

/// Design matrix with named columns and a 0/1 response.
///
/// Booleans are encoded as 0/1; treatment enters as the two dummies
/// `chemotherapy` and `targeted` with radiation as the reference level.
struct FeatureMatrix {
    std::vector<std::string> column_names;
    Eigen::MatrixXd rows;
    Eigen::VectorXd outcome;
    std::vector<std::string> row_ids;

    Eigen::Index n() const { return rows.rows(); }
    Eigen::Index p() const { return rows.cols(); }

    /// Column index by name, or -1.
    Eigen::Index column(std::string_view name) const;

    /// Row subset in the given order.
    FeatureMatrix select_rows(const std::vector<Eigen::Index>& idx) const;

    /// Column subset in the given order.
    FeatureMatrix select_columns(const std::vector<Eigen::Index>& idx) const;
};

}  // namespace cardiotox
