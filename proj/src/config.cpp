#include "stackcast/config.hpp"

#include "stackcast/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace stackcast {

namespace {

[[noreturn]] void fail(long line, const std::string& message) {
    throw Error(ErrorKind::ConfigError, message, line);
}

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// cut a trailing comment, honoring # inside quoted strings
std::string_view strip_comment(std::string_view s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (in_string) {
            if (s[i] == '\\') ++i;
            else if (s[i] == '"') in_string = false;
        } else if (s[i] == '"') {
            in_string = true;
        } else if (s[i] == '#') {
            return s.substr(0, i);
        }
    }
    return s;
}

class ValueParser {
public:
    ValueParser(std::string_view text, long line) : text_(text), line_(line) {}

    TomlValue parse() {
        const TomlValue value = parse_value();
        skip_space();
        if (pos_ != text_.size()) fail(line_, "trailing characters after value");
        return value;
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    TomlValue parse_value() {
        skip_space();
        if (pos_ >= text_.size()) fail(line_, "missing value");
        const char c = text_[pos_];
        if (c == '"') return parse_string();
        if (c == '[') return parse_array();
        return parse_scalar_word();
    }

    TomlValue parse_string() {
        ++pos_; // opening quote
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            char c = text_[pos_++];
            if (c == '\\') {
                if (pos_ >= text_.size()) fail(line_, "dangling escape in string");
                const char esc = text_[pos_++];
                switch (esc) {
                case '"': c = '"'; break;
                case '\\': c = '\\'; break;
                case 'n': c = '\n'; break;
                case 't': c = '\t'; break;
                case 'r': c = '\r'; break;
                default: fail(line_, std::string("unsupported escape \\") + esc);
                }
            }
            out.push_back(c);
        }
        if (pos_ >= text_.size()) fail(line_, "unterminated string");
        ++pos_; // closing quote
        TomlValue v;
        v.type = TomlValue::Type::String;
        v.str = std::move(out);
        return v;
    }

    TomlValue parse_array() {
        ++pos_; // opening bracket
        TomlValue v;
        v.type = TomlValue::Type::Array;
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return v;
        }
        while (true) {
            const TomlValue item = parse_value();
            if (item.type == TomlValue::Type::Array) fail(line_, "nested arrays are not supported");
            v.items.push_back(item);
            skip_space();
            if (pos_ >= text_.size()) fail(line_, "unterminated array");
            if (text_[pos_] == ',') {
                ++pos_;
                skip_space();
                if (pos_ < text_.size() && text_[pos_] == ']') { // trailing comma
                    ++pos_;
                    return v;
                }
                continue;
            }
            if (text_[pos_] == ']') {
                ++pos_;
                return v;
            }
            fail(line_, "expected ',' or ']' in array");
        }
    }

    TomlValue parse_scalar_word() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' &&
               !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        const std::string word(text_.substr(start, pos_ - start));
        TomlValue v;
        if (word == "true" || word == "false") {
            v.type = TomlValue::Type::Boolean;
            v.boolean = word == "true";
            return v;
        }
        const bool looks_float = word.find_first_of(".eE") != std::string::npos;
        char* end = nullptr;
        if (!looks_float) {
            const long long n = std::strtoll(word.c_str(), &end, 10);
            if (end == word.c_str() + word.size() && !word.empty()) {
                v.type = TomlValue::Type::Integer;
                v.integer = n;
                return v;
            }
        }
        const double d = std::strtod(word.c_str(), &end);
        if (end == word.c_str() + word.size() && !word.empty()) {
            v.type = TomlValue::Type::Float;
            v.real = d;
            return v;
        }
        fail(line_, "cannot parse value '" + word + "' (quote strings, including dates)");
    }

    std::string_view text_;
    long line_;
    std::size_t pos_ = 0;
};

const char* type_name(TomlValue::Type type) {
    switch (type) {
    case TomlValue::Type::String: return "string";
    case TomlValue::Type::Integer: return "integer";
    case TomlValue::Type::Float: return "float";
    case TomlValue::Type::Boolean: return "boolean";
    default: return "array";
    }
}

[[noreturn]] void wrong_type(const std::string& section, const std::string& key,
                             const char* wanted, TomlValue::Type got) {
    throw Error(ErrorKind::ConfigError, "[" + section + "] " + key + " must be a " + wanted +
                                            ", not a " + type_name(got));
}

} // namespace

double TomlValue::as_double() const {
    return type == Type::Integer ? static_cast<double>(integer) : real;
}

bool TomlDoc::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

const TomlValue* TomlDoc::find(const std::string& section, const std::string& key) const {
    const auto table = tables_.find(section);
    if (table == tables_.end()) return nullptr;
    const auto it = table->second.find(key);
    return it == table->second.end() ? nullptr : &it->second;
}

std::string TomlDoc::get_string(const std::string& section, const std::string& key,
                                const std::string& fallback) const {
    const TomlValue* v = find(section, key);
    if (!v) return fallback;
    if (v->type != TomlValue::Type::String) wrong_type(section, key, "string", v->type);
    return v->str;
}

long long TomlDoc::get_int(const std::string& section, const std::string& key,
                           long long fallback) const {
    const TomlValue* v = find(section, key);
    if (!v) return fallback;
    if (v->type != TomlValue::Type::Integer) wrong_type(section, key, "integer", v->type);
    return v->integer;
}

double TomlDoc::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
    const TomlValue* v = find(section, key);
    if (!v) return fallback;
    if (v->type != TomlValue::Type::Integer && v->type != TomlValue::Type::Float) {
        wrong_type(section, key, "number", v->type);
    }
    return v->as_double();
}

bool TomlDoc::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const TomlValue* v = find(section, key);
    if (!v) return fallback;
    if (v->type != TomlValue::Type::Boolean) wrong_type(section, key, "boolean", v->type);
    return v->boolean;
}

std::vector<std::string> TomlDoc::get_string_array(const std::string& section,
                                                   const std::string& key,
                                                   std::vector<std::string> fallback) const {
    const TomlValue* v = find(section, key);
    if (!v) return fallback;
    if (v->type != TomlValue::Type::Array) wrong_type(section, key, "array", v->type);
    std::vector<std::string> out;
    for (const auto& item : v->items) {
        if (item.type != TomlValue::Type::String) {
            wrong_type(section, key, "array of strings", item.type);
        }
        out.push_back(item.str);
    }
    return out;
}

std::vector<double> TomlDoc::get_double_array(const std::string& section, const std::string& key,
                                              std::vector<double> fallback) const {
    const TomlValue* v = find(section, key);
    if (!v) return fallback;
    if (v->type != TomlValue::Type::Array) wrong_type(section, key, "array", v->type);
    std::vector<double> out;
    for (const auto& item : v->items) {
        if (item.type != TomlValue::Type::Integer && item.type != TomlValue::Type::Float) {
            wrong_type(section, key, "array of numbers", item.type);
        }
        out.push_back(item.as_double());
    }
    return out;
}

std::vector<long long> TomlDoc::get_int_array(const std::string& section, const std::string& key,
                                              std::vector<long long> fallback) const {
    const TomlValue* v = find(section, key);
    if (!v) return fallback;
    if (v->type != TomlValue::Type::Array) wrong_type(section, key, "array", v->type);
    std::vector<long long> out;
    for (const auto& item : v->items) {
        if (item.type != TomlValue::Type::Integer) {
            wrong_type(section, key, "array of integers", item.type);
        }
        out.push_back(item.integer);
    }
    return out;
}

std::string TomlDoc::require_string(const std::string& section, const std::string& key) const {
    const TomlValue* v = find(section, key);
    if (!v) {
        throw Error(ErrorKind::ConfigError, "missing required key [" + section + "] " + key);
    }
    if (v->type != TomlValue::Type::String) wrong_type(section, key, "string", v->type);
    return v->str;
}

std::vector<std::string> TomlDoc::section_names() const {
    std::vector<std::string> out;
    for (const auto& [name, table] : tables_) out.push_back(name);
    return out;
}

std::vector<std::string> TomlDoc::keys(const std::string& section) const {
    std::vector<std::string> out;
    const auto table = tables_.find(section);
    if (table == tables_.end()) return out;
    for (const auto& [key, value] : table->second) out.push_back(key);
    return out;
}

void TomlDoc::set(const std::string& section, const std::string& key, TomlValue value,
                  long line) {
    auto& table = tables_[section];
    if (table.count(key)) fail(line, "duplicate key '" + key + "' in [" + section + "]");
    table.emplace(key, std::move(value));
}

TomlDoc parse_toml(std::string_view text) {
    TomlDoc doc;
    std::string section;
    long line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        const std::string_view line = trim(strip_comment(raw));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "section header missing closing bracket");
            const std::string_view name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) fail(line_no, "empty section name");
            for (char c : name) {
                if (!is_bare_key_char(c)) fail(line_no, "invalid character in section name");
            }
            section = std::string(name);
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) fail(line_no, "expected key = value");
        const std::string_view key = trim(line.substr(0, eq));
        if (key.empty()) fail(line_no, "empty key");
        for (char c : key) {
            if (!is_bare_key_char(c)) fail(line_no, "invalid character in key");
        }
        ValueParser parser(trim(line.substr(eq + 1)), line_no);
        doc.set(section, std::string(key), parser.parse(), line_no);
    }
    return doc;
}

TomlDoc load_toml_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_toml(buffer.str());
}

namespace {

const std::set<std::string>& known_keys(const std::string& section) {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"data",
         {"path", "date_column", "open_column", "high_column", "low_column", "close_column",
          "volume_from_column", "volume_to_column", "boundary_date"}},
        {"features", {"indicators", "horizon", "normalize", "scale_target", "exclude"}},
        {"select", {"max_runs", "p_value", "ntree", "min_node_size", "permutation_importance"}},
        {"grid.glmnet", {"alpha", "lambda", "max_iter", "tol"}},
        {"grid.rf", {"ntree", "mtry", "min_node_size", "bag_fraction"}},
        {"grid.svr", {"cost", "epsilon", "tol", "max_passes"}},
        {"stack", {"folds", "repeats", "meta_cost", "meta_epsilon"}},
        {"output", {"dir"}},
        {"run", {"seed", "jobs", "drop_tentative", "time_series_cv"}},
    };
    static const std::set<std::string> empty;
    const auto it = keys.find(section);
    return it == keys.end() ? empty : it->second;
}

void reject_unknown(const TomlDoc& doc) {
    static const std::set<std::string> sections = {"data",     "features", "select",
                                                   "grid.glmnet", "grid.rf", "grid.svr",
                                                   "stack",    "output",   "run"};
    for (const auto& section : doc.section_names()) {
        if (!sections.count(section)) {
            throw Error(ErrorKind::ConfigError, "unknown config section [" + section + "]");
        }
        const auto& allowed = known_keys(section);
        for (const auto& key : doc.keys(section)) {
            if (!allowed.count(key)) {
                throw Error(ErrorKind::ConfigError,
                            "unknown key '" + key + "' in [" + section + "]");
            }
        }
    }
}

std::vector<std::string> default_indicators() {
    return {"sma14",     "ema14",       "wma14",      "atr14",    "ad",
            "cci20",     "roc14",       "mom10",      "macd_line", "macd_signal",
            "macd_hist", "bb20_mid",    "bb20_up",    "bb20_down", "stoch14",
            "mean_mw20", "median_mw20", "volatility20"};
}

int checked_int(long long v, long long lo, long long hi, const std::string& what) {
    if (v < lo || v > hi) {
        throw Error(ErrorKind::ConfigError, what + " out of range");
    }
    return static_cast<int>(v);
}

} // namespace

PipelineConfig pipeline_config_from(const TomlDoc& doc) {
    reject_unknown(doc);
    PipelineConfig cfg;

    cfg.data_path = doc.require_string("data", "path");
    cfg.schema.date = doc.get_string("data", "date_column", cfg.schema.date);
    cfg.schema.open = doc.get_string("data", "open_column", cfg.schema.open);
    cfg.schema.high = doc.get_string("data", "high_column", cfg.schema.high);
    cfg.schema.low = doc.get_string("data", "low_column", cfg.schema.low);
    cfg.schema.close = doc.get_string("data", "close_column", cfg.schema.close);
    cfg.schema.volume_from = doc.get_string("data", "volume_from_column", cfg.schema.volume_from);
    cfg.schema.volume_to = doc.get_string("data", "volume_to_column", cfg.schema.volume_to);
    const std::string boundary = doc.require_string("data", "boundary_date");
    if (!try_parse_iso_date(boundary, cfg.boundary_date)) {
        throw Error(ErrorKind::ConfigError,
                    "boundary_date must be YYYY-MM-DD, got '" + boundary + "'");
    }

    for (const auto& token :
         doc.get_string_array("features", "indicators", default_indicators())) {
        cfg.indicators.push_back(parse_indicator_token(token));
    }
    cfg.horizon = checked_int(doc.get_int("features", "horizon", 1), 0, 365, "horizon");
    cfg.normalize = doc.get_bool("features", "normalize", true);
    cfg.scale_target = doc.get_bool("features", "scale_target", true);
    cfg.exclude_columns = doc.get_string_array("features", "exclude", {});

    cfg.boruta.max_runs = checked_int(doc.get_int("select", "max_runs", 99), 1, 100000,
                                      "[select] max_runs");
    cfg.boruta.p_value = doc.get_double("select", "p_value", 0.01);
    cfg.boruta.forest_params.ntree =
        checked_int(doc.get_int("select", "ntree", 100), 1, 1000000, "[select] ntree");
    cfg.boruta.forest_params.min_node_size =
        checked_int(doc.get_int("select", "min_node_size", 5), 1, 1000000,
                    "[select] min_node_size");
    cfg.boruta.permutation_importance =
        doc.get_bool("select", "permutation_importance", false);

    const auto alphas = doc.get_double_array("grid.glmnet", "alpha", {0.1, 0.55, 1.0});
    const auto lambdas = doc.get_double_array("grid.glmnet", "lambda", {0.001, 0.01, 0.1});
    const int net_max_iter = checked_int(doc.get_int("grid.glmnet", "max_iter", 1000), 1,
                                         100000000, "[grid.glmnet] max_iter");
    const double net_tol = doc.get_double("grid.glmnet", "tol", 1e-7);
    for (const double alpha : alphas) {
        for (const double lambda : lambdas) {
            LearnerSpec spec;
            spec.kind = LearnerKind::Glmnet;
            spec.glmnet.alpha = alpha;
            spec.glmnet.lambda = lambda;
            spec.glmnet.max_iter = net_max_iter;
            spec.glmnet.tol = net_tol;
            cfg.glmnet_grid.push_back(spec);
        }
    }

    const auto ntrees = doc.get_int_array("grid.rf", "ntree", {200});
    const auto mtrys = doc.get_int_array("grid.rf", "mtry", {0});
    const auto node_sizes = doc.get_int_array("grid.rf", "min_node_size", {5});
    const auto bag_fractions = doc.get_double_array("grid.rf", "bag_fraction", {0.5});
    for (const long long ntree : ntrees) {
        for (const long long mtry : mtrys) {
            for (const long long node : node_sizes) {
                for (const double bag : bag_fractions) {
                    LearnerSpec spec;
                    spec.kind = LearnerKind::Forest;
                    spec.forest.ntree = checked_int(ntree, 1, 1000000, "[grid.rf] ntree");
                    spec.forest.mtry = checked_int(mtry, 0, 1000000, "[grid.rf] mtry");
                    spec.forest.min_node_size =
                        checked_int(node, 1, 1000000, "[grid.rf] min_node_size");
                    spec.forest.bag_fraction = bag;
                    cfg.rf_grid.push_back(spec);
                }
            }
        }
    }

    const auto costs = doc.get_double_array("grid.svr", "cost", {0.25, 1.0, 4.0});
    const auto epsilons = doc.get_double_array("grid.svr", "epsilon", {0.05, 0.1});
    const double svr_tol = doc.get_double("grid.svr", "tol", 1e-3);
    const int svr_passes = checked_int(doc.get_int("grid.svr", "max_passes", 10000), 1,
                                       100000000, "[grid.svr] max_passes");
    for (const double cost : costs) {
        for (const double epsilon : epsilons) {
            LearnerSpec spec;
            spec.kind = LearnerKind::Svr;
            spec.svr.cost = cost;
            spec.svr.epsilon = epsilon;
            spec.svr.tol = svr_tol;
            spec.svr.max_passes = svr_passes;
            cfg.svr_grid.push_back(spec);
        }
    }

    cfg.stack_folds = checked_int(doc.get_int("stack", "folds", 10), 2, 1000, "[stack] folds");
    cfg.stack_repeats =
        checked_int(doc.get_int("stack", "repeats", 5), 1, 1000, "[stack] repeats");
    cfg.stack_meta_cost = doc.get_double("stack", "meta_cost", 1.0);
    cfg.stack_meta_epsilon = doc.get_double("stack", "meta_epsilon", 0.1);

    cfg.out_dir = doc.get_string("output", "dir", "out");
    const long long seed = doc.get_int("run", "seed", 1);
    if (seed < 0) throw Error(ErrorKind::ConfigError, "[run] seed must be non-negative");
    cfg.rng_seed = static_cast<std::uint64_t>(seed);
    cfg.jobs = checked_int(doc.get_int("run", "jobs", 1), 0, 4096, "[run] jobs");
    cfg.drop_tentative = doc.get_bool("run", "drop_tentative", false);
    cfg.time_series_cv = doc.get_bool("run", "time_series_cv", false);
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    PipelineConfig cfg = pipeline_config_from(load_toml_file(path));
    // a relative data path counts from the config file, so an experiment
    // directory works no matter where the tool runs
    const std::filesystem::path data_path(cfg.data_path);
    if (data_path.is_relative()) {
        const std::filesystem::path base = std::filesystem::path(path).parent_path();
        if (!base.empty()) cfg.data_path = (base / data_path).lexically_normal().string();
    }
    std::ifstream data(cfg.data_path);
    if (!data) {
        throw Error(ErrorKind::ConfigError, "data file does not exist: " + cfg.data_path);
    }
    return cfg;
}

} // namespace stackcast
