#pragma once

// Configuration-driven experiment runner: validation, dispatch and CSV/JSON output.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sbayes {

inline constexpr const char* kVersion = "0.1.0";

// Invalid or missing configuration; `field` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field))
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// A numerical failure inside an experiment.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

const std::vector<std::string>& experiment_kinds();

struct ExperimentConfig {
    std::string kind;
    std::map<std::string, std::string> params;
    std::uint64_t seed = 1;
    long replicates = 100;
    std::string out = "result";
    unsigned workers = 1;

    bool has(const std::string& key) const { return params.count(key) > 0; }
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    long long integer(const std::string& key) const;
    long long integer_or(const std::string& key, long long fallback) const;
    std::vector<double> numbers(const std::string& key) const;
    std::string text_or(const std::string& key, const std::string& fallback) const;
};

// Reads `key = value` lines; `#` starts a comment. Keys seed, reps, out and
// workers set the corresponding run fields.
void load_config_file(ExperimentConfig& config, const std::filesystem::path& path);
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);
// Parses "key=value".
void apply_override(ExperimentConfig& config, const std::string& assignment);

struct FieldError {
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<FieldError> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

ValidationReport validate(const ExperimentConfig& config);

struct ResultTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

struct ExperimentResult {
    ResultTable table;
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    std::vector<std::string> warnings;
};

// Validates, then dispatches. Throws ConfigError or NumericalError.
ExperimentResult run(const ExperimentConfig& config);

// Shortest representation that round-trips.
std::string format_number(double v);
std::string to_csv(const ResultTable& table);
nlohmann::ordered_json summary_json(const ExperimentConfig& config, const ExperimentResult& result,
                                    double wall_seconds);

// Writes <out>.csv and <out>.json.
void write_outputs(const ExperimentConfig& config, const ExperimentResult& result, double wall_seconds);

}  // namespace sbayes
