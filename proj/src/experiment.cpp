#include "barelay/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include "barelay/analysis.hpp"

namespace barelay {

using nlohmann::json;

namespace {

struct NamedExperiment {
  ExperimentKind kind;
  const char* name;
};

constexpr NamedExperiment kExperiments[] = {
    {ExperimentKind::RateVsSnr, "rate-vs-snr"},
    {ExperimentKind::MuConvergence, "mu-convergence"},
    {ExperimentKind::DelayConvergence, "delay-convergence"},
    {ExperimentKind::RateVsM, "rate-vs-m"},
    {ExperimentKind::AnalyticalOnly, "analytical"},
};

constexpr ProtocolKind kProtocols[] = {
    ProtocolKind::Conventional, ProtocolKind::BufferAidedGenie,
    ProtocolKind::BufferAidedAdaptive, ProtocolKind::MaxLink, ProtocolKind::DelayLimited};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  return items;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += format_double(values[i]);
  }
  return out;
}

// Runs `tasks` on a bounded pool; the result vector keeps task order.
template <typename T>
std::vector<T> ordered_parallel(const std::vector<std::function<T()>>& tasks, unsigned workers) {
  std::vector<T> results(tasks.size());
  if (tasks.empty()) return results;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(tasks.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) results[i] = tasks[i]();
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  return results;
}

// --- JSON field access with located errors --------------------------------

double number_at(const json& value, const std::string& where) {
  if (!value.is_number()) throw ConfigError(where, "expected a number");
  return value.get<double>();
}

std::vector<double> number_list(const json& value, const std::string& key) {
  if (value.is_number()) return {value.get<double>()};
  if (!value.is_array()) throw ConfigError(key, "expected a number or a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < value.size(); ++i)
    out.push_back(number_at(value[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

std::uint64_t unsigned_at(const json& value, const std::string& where) {
  if (!value.is_number_integer() || value.get<std::int64_t>() < 0)
    throw ConfigError(where, "expected a nonnegative integer");
  return value.get<std::uint64_t>();
}

std::vector<int> relay_list(const json& value, const std::string& key) {
  std::vector<int> out;
  auto one = [&](const json& v, const std::string& where) {
    const std::uint64_t m = unsigned_at(v, where);
    if (m > 1000) throw ConfigError(where, "relay count is unreasonably large");
    out.push_back(static_cast<int>(m));
  };
  if (value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i)
      one(value[i], key + "[" + std::to_string(i) + "]");
  } else {
    one(value, key);
  }
  return out;
}

std::string string_at(const json& value, const std::string& where) {
  if (!value.is_string()) throw ConfigError(where, "expected a string");
  return value.get<std::string>();
}

template <typename Parse>
auto located(const std::string& where, Parse parse) {
  try {
    return parse();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where, e.what());
  }
}

std::vector<ProtocolKind> protocol_list(const json& value, const std::string& key) {
  std::vector<ProtocolKind> out;
  if (value.is_string()) {
    const auto names = split_list(value.get<std::string>());
    for (std::size_t i = 0; i < names.size(); ++i)
      out.push_back(located(key + "[" + std::to_string(i) + "]",
                            [&] { return parse_protocol_kind(names[i]); }));
    return out;
  }
  if (!value.is_array()) throw ConfigError(key, "expected a list of protocol names");
  for (std::size_t i = 0; i < value.size(); ++i) {
    const std::string where = key + "[" + std::to_string(i) + "]";
    const std::string name = string_at(value[i], where);
    out.push_back(located(where, [&] { return parse_protocol_kind(name); }));
  }
  return out;
}

void apply_json(ExperimentSpec& spec, const json& doc, bool& relays_given) {
  if (!doc.is_object()) throw ConfigError("config", "top level must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "experiment") {
      const std::string name = string_at(value, key);
      spec.experiment = located(key, [&] { return parse_experiment_kind(name); });
    } else if (key == "snr_db") {
      spec.snr_db = number_list(value, key);
    } else if (key == "relays") {
      spec.relays = relay_list(value, key);
      relays_given = true;
    } else if (key == "delay_targets") {
      spec.delay_targets = number_list(value, key);
    } else if (key == "protocols") {
      spec.protocols = protocol_list(value, key);
    } else if (key == "omega_sr") {
      spec.omega_sr = number_list(value, key);
    } else if (key == "omega_rd") {
      spec.omega_rd = number_list(value, key);
    } else if (key == "num_slots") {
      spec.num_slots = unsigned_at(value, key);
    } else if (key == "seed") {
      spec.seed = unsigned_at(value, key);
    } else if (key == "metric_stride") {
      spec.metric_stride = unsigned_at(value, key);
    } else if (key == "burn_in") {
      spec.burn_in = unsigned_at(value, key);
    } else if (key == "workers") {
      spec.workers = static_cast<unsigned>(unsigned_at(value, key));
    } else if (key == "out") {
      spec.out = string_at(value, key);
    } else if (key == "format") {
      const std::string name = string_at(value, key);
      spec.format = located(key, [&] { return parse_output_format(name); });
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
}

}  // namespace

// --- names ------------------------------------------------------------------

std::string to_string(ExperimentKind kind) {
  for (const auto& e : kExperiments)
    if (e.kind == kind) return e.name;
  return "unknown";
}

std::string to_string(OutputFormat format) {
  return format == OutputFormat::Csv ? "csv" : "records";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (const auto& e : kExperiments)
    if (name == e.name) return e.kind;
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

ProtocolKind parse_protocol_kind(const std::string& name) {
  for (ProtocolKind kind : kProtocols)
    if (name == to_string(kind)) return kind;
  throw std::invalid_argument("unknown protocol '" + name + "'");
}

OutputFormat parse_output_format(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "records") return OutputFormat::Records;
  throw std::invalid_argument("unknown output format '" + name + "'");
}

std::vector<double> parse_number_list(const std::string& text, const std::string& field) {
  std::vector<double> values;
  const auto items = split_list(text);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string& item = items[i];
    double value = 0.0;
    const char* begin = item.data();
    const char* end = begin + item.size();
    if (!item.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (item.empty() || ec != std::errc() || ptr != end)
      throw ConfigError(field + "[" + std::to_string(i) + "]",
                        "malformed number '" + item + "'");
    values.push_back(value);
  }
  if (values.empty()) throw ConfigError(field, "empty list");
  return values;
}

// --- spec -----------------------------------------------------------------

FadingModel ExperimentSpec::model(int num_relays, double snr_db_value) const {
  const double snr = db_to_linear(snr_db_value);
  if (iid()) return FadingModel::iid(static_cast<std::size_t>(num_relays), snr);
  return FadingModel(snr, omega_sr, omega_rd);
}

void ExperimentSpec::validate() const {
  if (snr_db.empty()) throw ConfigError("snr_db", "sweep list is empty");
  for (std::size_t i = 0; i < snr_db.size(); ++i)
    if (!std::isfinite(snr_db[i]))
      throw ConfigError("snr_db[" + std::to_string(i) + "]", "must be finite");
  if (relays.empty()) throw ConfigError("relays", "sweep list is empty");
  for (std::size_t i = 0; i < relays.size(); ++i)
    if (relays[i] < 1)
      throw ConfigError("relays[" + std::to_string(i) + "]", "relay count must be at least 1");
  if (delay_targets.empty()) throw ConfigError("delay_targets", "sweep list is empty");
  for (std::size_t i = 0; i < delay_targets.size(); ++i)
    if (!(delay_targets[i] > 0.0) || !std::isfinite(delay_targets[i]))
      throw ConfigError("delay_targets[" + std::to_string(i) + "]", "must be positive");
  if (protocols.empty()) throw ConfigError("protocols", "sweep list is empty");
  if (omega_sr.empty() != omega_rd.empty())
    throw ConfigError(omega_sr.empty() ? "omega_sr" : "omega_rd",
                      "omega_sr and omega_rd must be given together");
  if (omega_sr.size() != omega_rd.size())
    throw ConfigError("omega_rd", "length " + std::to_string(omega_rd.size()) +
                                      " differs from omega_sr length " +
                                      std::to_string(omega_sr.size()));
  for (std::size_t i = 0; i < omega_sr.size(); ++i) {
    if (!(omega_sr[i] > 0.0) || !std::isfinite(omega_sr[i]))
      throw ConfigError("omega_sr[" + std::to_string(i) + "]", "mean gain must be positive");
    if (!(omega_rd[i] > 0.0) || !std::isfinite(omega_rd[i]))
      throw ConfigError("omega_rd[" + std::to_string(i) + "]", "mean gain must be positive");
  }
  if (!iid()) {
    for (int m : relays)
      if (static_cast<std::size_t>(m) != omega_sr.size())
        throw ConfigError("omega_sr", "vector length " + std::to_string(omega_sr.size()) +
                                          " does not match relay count " + std::to_string(m));
  }
  if (num_slots < 1) throw ConfigError("num_slots", "must be at least 1");
  if (metric_stride < 1) throw ConfigError("metric_stride", "must be at least 1");
  if (burn_in >= num_slots) throw ConfigError("burn_in", "must be below num_slots");
}

json to_json(const ExperimentSpec& spec) {
  json protocols = json::array();
  for (ProtocolKind p : spec.protocols) protocols.push_back(to_string(p));
  return json{
      {"experiment", to_string(spec.experiment)},
      {"snr_db", spec.snr_db},
      {"relays", spec.relays},
      {"delay_targets", spec.delay_targets},
      {"protocols", protocols},
      {"omega_sr", spec.omega_sr},
      {"omega_rd", spec.omega_rd},
      {"num_slots", spec.num_slots},
      {"seed", spec.seed},
      {"metric_stride", spec.metric_stride},
      {"burn_in", spec.burn_in},
      {"workers", spec.workers},
      {"out", spec.out},
      {"format", to_string(spec.format)},
  };
}

ExperimentSpec spec_from_json(const json& doc) {
  ExperimentSpec spec;
  bool relays_given = false;
  apply_json(spec, doc, relays_given);
  if (!relays_given && !spec.omega_sr.empty())
    spec.relays = {static_cast<int>(spec.omega_sr.size())};
  spec.validate();
  return spec;
}

ExperimentSpec parse_config(const std::optional<std::filesystem::path>& config_path,
                            const SpecOverrides& o,
                            std::optional<ExperimentKind> default_experiment) {
  ExperimentSpec spec;
  if (default_experiment) spec.experiment = *default_experiment;
  bool relays_given = false;

  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw ConfigError("config", "cannot read " + config_path->string());
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config", config_path->string() + ": " + e.what());
    }
    apply_json(spec, doc, relays_given);
  }

  if (o.experiment)
    spec.experiment = located("experiment", [&] { return parse_experiment_kind(*o.experiment); });
  if (o.snr_db) spec.snr_db = parse_number_list(*o.snr_db, "snr_db");
  if (o.relays) {
    spec.relays.clear();
    const auto values = parse_number_list(*o.relays, "relays");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] != std::floor(values[i]) || values[i] < 1 || values[i] > 1000)
        throw ConfigError("relays[" + std::to_string(i) + "]", "expected a positive integer");
      spec.relays.push_back(static_cast<int>(values[i]));
    }
    relays_given = true;
  }
  if (o.delay_targets) spec.delay_targets = parse_number_list(*o.delay_targets, "delay_targets");
  if (o.protocols) spec.protocols = protocol_list(json(*o.protocols), "protocols");
  if (o.omega_sr) spec.omega_sr = parse_number_list(*o.omega_sr, "omega_sr");
  if (o.omega_rd) spec.omega_rd = parse_number_list(*o.omega_rd, "omega_rd");
  if (o.num_slots) spec.num_slots = *o.num_slots;
  if (o.seed) spec.seed = *o.seed;
  if (o.metric_stride) spec.metric_stride = *o.metric_stride;
  if (o.workers) spec.workers = *o.workers;
  if (o.out) spec.out = *o.out;
  if (o.format) spec.format = located("format", [&] { return parse_output_format(*o.format); });

  if (!relays_given && !spec.omega_sr.empty())
    spec.relays = {static_cast<int>(spec.omega_sr.size())};
  spec.validate();
  return spec;
}

// --- rows -----------------------------------------------------------------

void Row::set(const std::string& column, Cell value) {
  for (auto& [name, cell] : cells) {
    if (name == column) {
      cell = std::move(value);
      return;
    }
  }
  cells.emplace_back(column, std::move(value));
}

const Cell* Row::find(const std::string& column) const {
  for (const auto& [name, cell] : cells)
    if (name == column) return &cell;
  return nullptr;
}

bool Row::has_error() const {
  const Cell* cell = find("error");
  return cell && std::holds_alternative<std::string>(*cell) &&
         !std::get<std::string>(*cell).empty();
}

namespace {

std::string cell_text(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, std::monostate>) return "";
        else if constexpr (std::is_same_v<V, std::int64_t>) return std::to_string(v);
        else if constexpr (std::is_same_v<V, double>) return format_double(v);
        else return v;
      },
      cell);
}

std::string csv_escape(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json cell_json(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, std::monostate>) return nullptr;
        else if constexpr (std::is_same_v<V, double>) {
          if (!std::isfinite(v)) return nullptr;
          return v;
        } else return v;
      },
      cell);
}

Row point_row(ExperimentKind kind, int m, double snr_db) {
  Row row;
  row.set("experiment", to_string(kind));
  row.set("m", static_cast<std::int64_t>(m));
  row.set("snr_db", snr_db);
  return row;
}

std::optional<double> analytical_rate(const FadingModel& model, ProtocolKind protocol,
                                      const std::vector<double>& mu_star) {
  const int m = static_cast<int>(model.num_relays());
  const bool closed_form = model.is_iid() && m <= kMaxClosedFormRelays;
  switch (protocol) {
    case ProtocolKind::Conventional:
      return closed_form ? closed_form_rate_conv_iid_rayleigh(m, model.avg_snr_sr(0))
                         : conventional_rate_analytical(model);
    case ProtocolKind::BufferAidedGenie:
    case ProtocolKind::BufferAidedAdaptive:
      return closed_form ? closed_form_rate_ba_iid_rayleigh(m, model.avg_snr_sr(0))
                         : max_rate_analytical(model, SelectionWeights(mu_star));
    case ProtocolKind::MaxLink:
      if (!model.is_iid()) break;
      return closed_form ? closed_form_rate_ba_iid_rayleigh(m, model.avg_snr_sr(0))
                         : iid_rate_quadrature(m, model.avg_snr_sr(0));
    case ProtocolKind::DelayLimited:
      break;
  }
  return std::nullopt;
}

SimulationConfig base_config(const ExperimentSpec& spec, const FadingModel& model,
                             ProtocolSpec protocol) {
  return SimulationConfig{.model = model,
                          .protocol = std::move(protocol),
                          .num_slots = spec.num_slots,
                          .seed = spec.seed,
                          .mu_step = std::nullopt,
                          .lambda_step = std::nullopt,
                          .metric_stride = spec.metric_stride,
                          .burn_in = spec.burn_in,
                          .record_decisions = false};
}

bool needs_mu_star(const std::vector<ProtocolKind>& protocols) {
  return std::any_of(protocols.begin(), protocols.end(), [](ProtocolKind p) {
    return p == ProtocolKind::BufferAidedGenie || p == ProtocolKind::BufferAidedAdaptive;
  });
}

std::vector<Row> rate_point(const ExperimentSpec& spec, int m, double snr_db) {
  std::vector<Row> rows;
  const FadingModel model = spec.model(m, snr_db);

  std::vector<double> mu_star;
  std::string solver_error;
  if (needs_mu_star(spec.protocols)) {
    try {
      mu_star = solve_mu_star(model).mu_star;
    } catch (const std::exception& e) {
      solver_error = e.what();
    }
  }

  for (ProtocolKind protocol : spec.protocols) {
    std::vector<double> targets{0.0};
    if (protocol == ProtocolKind::DelayLimited) targets = spec.delay_targets;
    for (double target : targets) {
      Row row = point_row(spec.experiment, m, snr_db);
      row.set("protocol", to_string(protocol));
      row.set("delay_target", protocol == ProtocolKind::DelayLimited ? Cell{target} : Cell{});
      row.set("rate_sim", Cell{});
      row.set("rate_analytical", Cell{});
      row.set("delay", Cell{});
      row.set("flow_residual_max", Cell{});
      row.set("mu_star", mu_star.empty() ? Cell{} : Cell{join(mu_star)});
      row.set("error", std::string{});
      try {
        const bool uses_mu = protocol == ProtocolKind::BufferAidedGenie ||
                             protocol == ProtocolKind::BufferAidedAdaptive;
        if (uses_mu && !solver_error.empty()) throw std::runtime_error(solver_error);

        ProtocolSpec ps;
        switch (protocol) {
          case ProtocolKind::Conventional: ps = ProtocolSpec::conventional(); break;
          case ProtocolKind::BufferAidedGenie:
            ps = ProtocolSpec::genie(SelectionWeights(mu_star));
            break;
          case ProtocolKind::BufferAidedAdaptive: ps = ProtocolSpec::adaptive(); break;
          case ProtocolKind::MaxLink: ps = ProtocolSpec::max_link(); break;
          case ProtocolKind::DelayLimited: ps = ProtocolSpec::delay_limited(target); break;
        }
        const RateReport report = run_simulation(base_config(spec, model, ps));
        row.set("rate_sim", report.avg_rate_sd);
        row.set("delay", report.avg_delay);
        row.set("flow_residual_max", report.max_abs_flow_residual());

        if (const auto analytical = analytical_rate(model, protocol, mu_star))
          row.set("rate_analytical", *analytical);
      } catch (const std::exception& e) {
        row.set("error", std::string(e.what()));
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<Row> mu_convergence_point(const ExperimentSpec& spec, int m, double snr_db) {
  std::vector<Row> rows;
  try {
    const FadingModel model = spec.model(m, snr_db);
    const auto mu_star = solve_mu_star(model).mu_star;
    const RateReport report =
        run_simulation(base_config(spec, model, ProtocolSpec::adaptive()));
    for (const auto& point : report.trajectory) {
      for (std::size_t k = 0; k < point.mu_est.size(); ++k) {
        Row row = point_row(spec.experiment, m, snr_db);
        row.set("slot", static_cast<std::int64_t>(point.slot));
        row.set("relay", static_cast<std::int64_t>(k + 1));
        row.set("mu_est", point.mu_est[k]);
        row.set("mu_star", mu_star[k]);
        row.set("error", std::string{});
        rows.push_back(std::move(row));
      }
    }
  } catch (const std::exception& e) {
    Row row = point_row(spec.experiment, m, snr_db);
    row.set("error", std::string(e.what()));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Row> delay_convergence_point(const ExperimentSpec& spec, int m, double snr_db,
                                         double target) {
  std::vector<Row> rows;
  try {
    const FadingModel model = spec.model(m, snr_db);
    const RateReport report =
        run_simulation(base_config(spec, model, ProtocolSpec::delay_limited(target)));
    for (const auto& point : report.trajectory) {
      Row row = point_row(spec.experiment, m, snr_db);
      row.set("delay_target", target);
      row.set("slot", static_cast<std::int64_t>(point.slot));
      row.set("running_delay", point.running_delay);
      row.set("running_rate", point.running_rate);
      row.set("error", std::string{});
      rows.push_back(std::move(row));
    }
  } catch (const std::exception& e) {
    Row row = point_row(spec.experiment, m, snr_db);
    row.set("delay_target", target);
    row.set("error", std::string(e.what()));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Row> analytical_point(const ExperimentSpec& spec, int m, double snr_db) {
  Row row = point_row(spec.experiment, m, snr_db);
  row.set("error", std::string{});
  try {
    const FadingModel model = spec.model(m, snr_db);
    if (model.is_iid()) {
      const double snr = model.avg_snr_sr(0);
      row.set("rate_ba", closed_form_rate_ba_iid_rayleigh(m, snr));
      row.set("rate_ba_quadrature", iid_rate_quadrature(m, snr));
      row.set("rate_conv", closed_form_rate_conv_iid_rayleigh(m, snr));
      row.set("rate_ba_low_snr", asymptotic_rate(m, snr, SnrRegime::Low, ProtocolFamily::BufferAided));
      row.set("rate_ba_high_snr", asymptotic_rate(m, snr, SnrRegime::High, ProtocolFamily::BufferAided));
      row.set("rate_conv_low_snr", asymptotic_rate(m, snr, SnrRegime::Low, ProtocolFamily::Conventional));
      row.set("rate_conv_high_snr", asymptotic_rate(m, snr, SnrRegime::High, ProtocolFamily::Conventional));
      row.set("low_snr_ratio", low_snr_ratio(m));
      row.set("high_snr_gap", high_snr_gap(m));
      row.set("mu_star", join(std::vector<double>(static_cast<std::size_t>(m), 0.5)));
    } else {
      const MuSolverResult solved = solve_mu_star(model);
      row.set("rate_ba", max_rate_analytical(model, SelectionWeights(solved.mu_star)));
      row.set("rate_conv", conventional_rate_analytical(model));
      row.set("mu_star", join(solved.mu_star));
      row.set("mu_residual", solved.residual_norm);
    }
    const auto central = signaling_overhead(m, Implementation::Centralized, ProtocolFamily::BufferAided);
    const auto distributed = signaling_overhead(m, Implementation::Distributed, ProtocolFamily::BufferAided);
    row.set("overhead_centralized_min", static_cast<std::int64_t>(central.lower));
    row.set("overhead_centralized_max", static_cast<std::int64_t>(central.upper));
    row.set("overhead_distributed", static_cast<std::int64_t>(distributed.lower));
  } catch (const std::exception& e) {
    row.set("error", std::string(e.what()));
  }
  return {row};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<std::function<std::vector<Row>()>> tasks;
  for (int m : spec.relays) {
    for (double snr_db : spec.snr_db) {
      switch (spec.experiment) {
        case ExperimentKind::RateVsSnr:
        case ExperimentKind::RateVsM:
          tasks.emplace_back([&spec, m, snr_db] { return rate_point(spec, m, snr_db); });
          break;
        case ExperimentKind::MuConvergence:
          tasks.emplace_back([&spec, m, snr_db] { return mu_convergence_point(spec, m, snr_db); });
          break;
        case ExperimentKind::DelayConvergence:
          for (double target : spec.delay_targets) {
            tasks.emplace_back([&spec, m, snr_db, target] {
              return delay_convergence_point(spec, m, snr_db, target);
            });
          }
          break;
        case ExperimentKind::AnalyticalOnly:
          tasks.emplace_back([&spec, m, snr_db] { return analytical_point(spec, m, snr_db); });
          break;
      }
    }
  }

  ExperimentResult result;
  for (auto& rows : ordered_parallel(tasks, spec.workers)) {
    for (auto& row : rows) {
      if (row.has_error()) ++result.error_rows;
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

void write_csv(std::ostream& os, const std::vector<Row>& rows) {
  std::vector<std::string> columns;
  std::set<std::string> seen;
  for (const auto& row : rows)
    for (const auto& [name, cell] : row.cells)
      if (seen.insert(name).second) columns.push_back(name);

  for (std::size_t c = 0; c < columns.size(); ++c)
    os << (c ? "," : "") << csv_escape(columns[c]);
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) os << ',';
      if (const Cell* cell = row.find(columns[c])) os << csv_escape(cell_text(*cell));
    }
    os << '\n';
  }
}

void write_records(std::ostream& os, const std::vector<Row>& rows) {
  for (const auto& row : rows) {
    json record = json::object();
    for (const auto& [name, cell] : row.cells) record[name] = cell_json(cell);
    os << record.dump() << '\n';
  }
}

std::string config_hash(const ExperimentSpec& spec) {
  const std::string canonical = to_json(spec).dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

json run_manifest(const ExperimentSpec& spec, const ExperimentResult& result) {
  return json{
      {"tool", "barelay"},
      {"version", kVersion},
      {"experiment", to_string(spec.experiment)},
      {"seed", spec.seed},
      {"config_hash", config_hash(spec)},
      {"rows", result.rows.size()},
      {"error_rows", result.error_rows},
      {"config", to_json(spec)},
  };
}

std::filesystem::path write_outputs(const ExperimentSpec& spec, const ExperimentResult& result,
                                    std::ostream& fallback) {
  std::filesystem::path path = spec.out;
  if (path.empty()) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) {
      path = std::filesystem::path(dir) /
             (to_string(spec.experiment) + (spec.format == OutputFormat::Csv ? ".csv" : ".jsonl"));
    }
  }
  auto emit = [&](std::ostream& os) {
    if (spec.format == OutputFormat::Csv) write_csv(os, result.rows);
    else write_records(os, result.rows);
  };
  if (path.empty()) {
    emit(fallback);
    return {};
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    emit(out);
  }
  std::ofstream manifest(path.string() + ".manifest.json", std::ios::binary);
  manifest << run_manifest(spec, result).dump(2) << '\n';
  return path;
}

}  // namespace barelay
