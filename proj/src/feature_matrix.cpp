#include "cardiotox/feature_matrix.hpp"

namespace cardiotox {

Eigen::Index FeatureMatrix::column(std::string_view name) const {
    for (std::size_t j = 0; j < column_names.size(); ++j)
        if (column_names[j] == name) return static_cast<Eigen::Index>(j);
    return -1;
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<Eigen::Index>& idx) const {
    FeatureMatrix out;
    out.column_names = column_names;
    out.rows = rows(idx, Eigen::all);
    out.outcome = outcome(idx);
    if (!row_ids.empty()) {
        out.row_ids.reserve(idx.size());
        for (auto i : idx) out.row_ids.push_back(row_ids[static_cast<std::size_t>(i)]);
    }
    return out;
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<Eigen::Index>& idx) const {
    FeatureMatrix out;
    for (auto j : idx) out.column_names.push_back(column_names[static_cast<std::size_t>(j)]);
    out.rows = rows(Eigen::all, idx);
    out.outcome = outcome;
    out.row_ids = row_ids;
    return out;
}

}  // namespace cardiotox
