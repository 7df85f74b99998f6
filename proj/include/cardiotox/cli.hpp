#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cardiotox/cohort.hpp"
#include "cardiotox/preprocess.hpp"

namespace cardiotox::cli {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
    CohortPaths inputs;
    std::optional<std::filesystem::path> code_map;  // built-in table when unset
    std::optional<Date> end_of_data;
    std::map<FeatureSetId, std::vector<std::string>> feature_sets;  // overrides
    double alpha_stay = 0.15;
    int k = 5;
    int bootstrap = 1000;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    bool eliminate_in_causal = false;
    bool arms_only_ate = false;
    bool eliminate_in_cv = true;
    bool stratified = true;
    unsigned threads = 0;
    PreprocessConfig preprocess;  // end_of_data copied in once known

    const std::vector<std::string>& feature_set(FeatureSetId id) const;
};

/// JSON run configuration. Relative paths resolve against the file's
/// directory. Throws Error(config_error) on unknown keys or bad values.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);

/// Full command line (args[0] is the program name). Returns the exit code;
/// diagnostics go to `err`, progress to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cardiotox::cli
