#pragma once

#include "stackcast/feature_matrix.hpp"
#include "stackcast/feature_select.hpp"
#include "stackcast/learner.hpp"
#include "stackcast/market_data.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace stackcast {

/// One parsed value from the config file. Arrays hold scalars only.
struct TomlValue {
    enum class Type { String, Integer, Float, Boolean, Array };
    Type type = Type::String;
    std::string str;
    long long integer = 0;
    double real = 0.0;
    bool boolean = false;
    std::vector<TomlValue> items;

    double as_double() const; // Integer widens to Float
};

/// Sections of key = value pairs. Keys written before any [section] header
/// land in the unnamed section "".
class TomlDoc {
public:
    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    long long get_int(const std::string& section, const std::string& key,
                      long long fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<std::string> get_string_array(const std::string& section, const std::string& key,
                                              std::vector<std::string> fallback) const;
    std::vector<double> get_double_array(const std::string& section, const std::string& key,
                                         std::vector<double> fallback) const;
    std::vector<long long> get_int_array(const std::string& section, const std::string& key,
                                         std::vector<long long> fallback) const;

    std::string require_string(const std::string& section, const std::string& key) const;

    std::vector<std::string> section_names() const;
    std::vector<std::string> keys(const std::string& section) const;

    void set(const std::string& section, const std::string& key, TomlValue value, long line);

private:
    const TomlValue* find(const std::string& section, const std::string& key) const;

    std::map<std::string, std::map<std::string, TomlValue>> tables_;
};

/// Single-line key = value pairs under [section] headers; strings in double
/// quotes with \" \\ \n \t \r escapes; integers, floats, booleans; single-line
/// scalar arrays; # comments. Duplicate keys and anything outside that subset
/// fail with ConfigError carrying the line number.
TomlDoc parse_toml(std::string_view text);

/// ConfigError when the file cannot be read (a bad config path is a
/// configuration mistake, not a data problem).
TomlDoc load_toml_file(const std::string& path);

/// Everything one experiment needs, resolved against defaults. Command-line
/// flags overwrite individual fields after loading.
struct PipelineConfig {
    // [data]
    std::string data_path;
    CsvSchema schema;
    Date boundary_date; // last training day, inclusive

    // [features]
    std::vector<IndicatorSpec> indicators;
    int horizon = 1;
    bool normalize = true;
    bool scale_target = true;
    std::vector<std::string> exclude_columns;

    // [select]
    BorutaConfig boruta;
    bool drop_tentative = false;

    // [grid.*]: cartesian products, already expanded
    std::vector<LearnerSpec> glmnet_grid;
    std::vector<LearnerSpec> rf_grid;
    std::vector<LearnerSpec> svr_grid;

    // [stack]
    int stack_folds = 10;
    int stack_repeats = 5;
    double stack_meta_cost = 1.0;
    double stack_meta_epsilon = 0.1;

    // [output] / [run]
    std::string out_dir = "out";
    std::uint64_t rng_seed = 1;
    int jobs = 1;
    bool time_series_cv = false;
};

/// Maps a parsed document onto PipelineConfig. Unknown sections or keys,
/// missing required fields ([data] path and boundary_date), and out-of-range
/// values all throw ConfigError.
PipelineConfig pipeline_config_from(const TomlDoc& doc);

/// load_toml_file + pipeline_config_from + a check that the data file
/// actually exists, so a bad path fails before any stage starts. A relative
/// [data] path resolves against the config file's directory.
PipelineConfig load_pipeline_config(const std::string& path);

} // namespace stackcast
