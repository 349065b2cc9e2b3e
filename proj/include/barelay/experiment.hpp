#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "barelay/channel.hpp"
#include "barelay/simulator.hpp"

namespace barelay {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "BARELAY_OUTPUT_DIR";

enum class ExperimentKind { RateVsSnr, MuConvergence, DelayConvergence, RateVsM, AnalyticalOnly };
enum class OutputFormat { Csv, Records };

std::string to_string(ExperimentKind kind);
std::string to_string(OutputFormat format);
ExperimentKind parse_experiment_kind(const std::string& name);
ProtocolKind parse_protocol_kind(const std::string& name);
OutputFormat parse_output_format(const std::string& name);

// Error raised for invalid configuration; `field` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentSpec {
  ExperimentKind experiment = ExperimentKind::RateVsSnr;
  std::vector<double> snr_db{10.0};
  std::vector<int> relays{1};
  std::vector<double> delay_targets{5.0};
  std::vector<ProtocolKind> protocols{ProtocolKind::Conventional,
                                      ProtocolKind::BufferAidedGenie};
  // Empty means i.i.d. links with unit mean gain.
  std::vector<double> omega_sr;
  std::vector<double> omega_rd;
  std::uint64_t num_slots = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t metric_stride = 1000;
  std::uint64_t burn_in = 0;
  unsigned workers = 0;
  std::string out;  // empty: stdout, or $BARELAY_OUTPUT_DIR/<experiment>.<ext>
  OutputFormat format = OutputFormat::Csv;

  bool iid() const { return omega_sr.empty(); }
  // Fading model for one sweep point; the SNR is given in dB.
  FadingModel model(int num_relays, double snr_db) const;
  // Throws ConfigError naming the first violated invariant.
  void validate() const;

  bool operator==(const ExperimentSpec&) const = default;
};

// Command-line values that take precedence over the config file.
struct SpecOverrides {
  std::optional<std::string> experiment;
  std::optional<std::string> snr_db;
  std::optional<std::string> relays;
  std::optional<std::string> delay_targets;
  std::optional<std::string> protocols;
  std::optional<std::string> omega_sr;
  std::optional<std::string> omega_rd;
  std::optional<std::uint64_t> num_slots;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> metric_stride;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const nlohmann::json& doc);

// Reads the optional JSON config, applies overrides and validates.
ExperimentSpec parse_config(const std::optional<std::filesystem::path>& config_path,
                            const SpecOverrides& overrides,
                            std::optional<ExperimentKind> default_experiment = {});

// Comma-separated number lists as given on the command line.
std::vector<double> parse_number_list(const std::string& text, const std::string& field);

using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct Row {
  std::vector<std::pair<std::string, Cell>> cells;

  void set(const std::string& column, Cell value);
  const Cell* find(const std::string& column) const;
  bool has_error() const;
};

struct ExperimentResult {
  std::vector<Row> rows;
  int error_rows = 0;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

// CSV with a header built from the union of columns in first-seen order.
void write_csv(std::ostream& os, const std::vector<Row>& rows);
// One JSON object per line.
void write_records(std::ostream& os, const std::vector<Row>& rows);

// FNV-1a hash of the canonical JSON form of the spec, as hex.
std::string config_hash(const ExperimentSpec& spec);
nlohmann::json run_manifest(const ExperimentSpec& spec, const ExperimentResult& result);

// Writes rows to the configured destination plus a `.manifest.json` beside
// file outputs. Returns the data path, or empty when writing to `fallback`.
std::filesystem::path write_outputs(const ExperimentSpec& spec, const ExperimentResult& result,
                                    std::ostream& fallback);

}  // namespace barelay
