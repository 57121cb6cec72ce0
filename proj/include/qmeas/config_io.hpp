#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qmeas/experiments.hpp"

namespace qmeas {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

using ojson = nlohmann::ordered_json;

// Parses and validates an experiment configuration; error messages carry the
// JSON path of the offending key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Resolved configuration with every default filled in; re-parses to the same
// config.
ojson config_to_json(const ExperimentConfig& config);

ojson result_to_json(const ExperimentResult& result);

// Operator dump, row-major [re, im] pairs.
ojson operator_to_json(const Operator& op);

std::string format_double(double v); // 17 significant digits

// temp file + rename
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string field_to_csv(const WaveField& f);
ojson field_metadata(const WaveField& f);
std::string trajectories_to_csv(const std::vector<Trajectory>& paths);
std::string decoherence_to_csv(const Operator& matrix);

// result JSON plus scenario CSV side files, all written atomically
void write_result_files(const ExperimentResult& result,
                        const std::filesystem::path& out_dir);

} // namespace qmeas
