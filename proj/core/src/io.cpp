#include "qsdw/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "qsdw/common.hpp"

namespace qsdw {

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

std::string table_to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write file '" + path + "'");
  out << content;
  if (!out) throw ConfigError("failed writing file '" + path + "'");
}

std::string summary_to_json(const RunResult& result) {
  using json = nlohmann::ordered_json;
  json j;
  j["experiment"] = result.experiment;
  j["config_hash"] = result.config_hash;
  j["seed"] = result.seed;
  j["scheme"] = result.scheme;
  j["family"] = result.family;
  j["grid"] = {{"n", result.N}, {"dim", result.dim}};
  j["time"] = {{"dt", result.dt}, {"t_final", result.T}};

  json checks = json::array();
  for (const auto& c : result.checks) {
    json jc;
    jc["name"] = c.name;
    jc["kind"] = c.kind == CheckKind::physics ? "physics" : "numerical";
    jc["pass"] = c.pass;
    jc["measured"] = c.measured;
    jc["threshold"] = c.threshold;
    if (!c.note.empty()) jc["note"] = c.note;
    checks.push_back(std::move(jc));
  }
  j["checks"] = std::move(checks);

  json fits = json::array();
  for (const auto& f : result.fits) {
    json jf;
    jf["name"] = f.name;
    jf["rate"] = f.fit.rate;
    jf["intercept"] = f.fit.intercept;
    jf["r_squared"] = f.fit.r_squared;
    fits.push_back(std::move(jf));
  }
  j["fits"] = std::move(fits);

  json tables = json::array();
  for (const auto& [name, table] : result.tables) {
    tables.push_back({{"name", name},
                      {"columns", table.columns},
                      {"rows", table.rows.size()}});
  }
  j["tables"] = std::move(tables);

  j["all_passed"] = result.all_passed();
  j["numerical_failure"] = result.numerical_failure();
  j["wall_ms"] = result.wall_ms;
  return j.dump(2) + "\n";
}

void write_run_outputs(const RunResult& result, const ExperimentConfig& cfg,
                       const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());

  const fs::path base(dir);
  for (const auto& [name, table] : result.tables)
    write_text_file((base / (name + ".csv")).string(), table_to_csv(table));
  if (!result.primary_table.empty()) {
    auto it = result.tables.find(result.primary_table);
    if (it != result.tables.end())
      write_text_file((base / "timeseries.csv").string(), table_to_csv(it->second));
  }
  write_text_file((base / "summary.json").string(), summary_to_json(result));
  write_text_file((base / "resolved_config.cfg").string(), cfg.resolved_text);
}

}  // namespace qsdw
