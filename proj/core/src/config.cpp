#include "rlct/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>

#include <fmt/format.h>

#include "rlct/errors.hpp"

namespace rlct {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Reads typed values out of one section, failing with file:line context.
class SectionReader {
 public:
  SectionReader(const IniDocument& doc, const IniDocument::Section& section) : doc_(doc), section_(section) {}

  [[noreturn]] void fail(std::size_t line, const std::string& message) const {
    throw ConfigError(fmt::format("{}:{}: [{}] {}", doc_.source(), line, section_.name, message));
  }
  [[noreturn]] void fail(const std::string& message) const { fail(section_.line, message); }

  void read_size(const std::string& key, std::size_t& out) const {
    if (const auto* e = find(key)) {
      std::size_t value = 0;
      const auto [ptr, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), value);
      if (ec != std::errc() || ptr != e->value.data() + e->value.size()) {
        fail(e->line, fmt::format("{} must be a non-negative integer, got '{}'", key, e->value));
      }
      out = value;
    }
  }

  void read_u64(const std::string& key, std::uint64_t& out) const {
    if (const auto* e = find(key)) {
      std::uint64_t value = 0;
      const auto [ptr, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), value);
      if (ec != std::errc() || ptr != e->value.data() + e->value.size()) {
        fail(e->line, fmt::format("{} must be an unsigned 64-bit integer, got '{}'", key, e->value));
      }
      out = value;
    }
  }

  void read_double(const std::string& key, double& out) const {
    if (const auto* e = find(key)) {
      try {
        std::size_t used = 0;
        out = std::stod(e->value, &used);
        if (used != e->value.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        fail(e->line, fmt::format("{} must be a real number, got '{}'", key, e->value));
      }
    }
  }

  void read_bool(const std::string& key, bool& out) const {
    if (const auto* e = find(key)) {
      const std::string v = lower(e->value);
      if (v == "true" || v == "1" || v == "yes" || v == "on") {
        out = true;
      } else if (v == "false" || v == "0" || v == "no" || v == "off") {
        out = false;
      } else {
        fail(e->line, fmt::format("{} must be a boolean, got '{}'", key, e->value));
      }
    }
  }

  [[nodiscard]] const IniDocument::Entry* find(const std::string& key) const {
    const auto it = section_.entries.find(key);
    return it == section_.entries.end() ? nullptr : &it->second;
  }

  void reject_unknown(std::initializer_list<std::string_view> known) const {
    for (const auto& [key, entry] : section_.entries) {
      if (std::find(known.begin(), known.end(), key) == known.end()) fail(entry.line, "unknown key '" + key + "'");
    }
  }

 private:
  const IniDocument& doc_;
  const IniDocument::Section& section_;
};

void apply_experiment(const SectionReader& r, ExperimentConfig& config) {
  r.reject_unknown({"seed", "workers", "datasets_per_cell", "truth_redraws", "n_test", "output", "format",
                    "bounds_only", "dump_chains"});
  r.read_u64("seed", config.master_seed);
  r.read_size("workers", config.workers);
  r.read_size("datasets_per_cell", config.gen.datasets_per_cell);
  r.read_size("truth_redraws", config.gen.truth_redraws);
  r.read_size("n_test", config.gen.n_test);
  r.read_bool("bounds_only", config.bounds_only);
  if (const auto* e = r.find("output")) config.output_path = e->value;
  if (const auto* e = r.find("dump_chains")) config.dump_chains = e->value;
  if (const auto* e = r.find("format")) {
    try {
      config.format = parse_output_format(e->value);
    } catch (const ConfigError& err) {
      r.fail(e->line, err.what());
    }
  }
}

void apply_prior(const SectionReader& r, ExperimentConfig& config) {
  r.reject_unknown({"kind", "sigma", "half_width"});
  std::string kind = std::holds_alternative<GaussianPrior>(config.prior) ? "gaussian" : "uniform_box";
  if (const auto* e = r.find("kind")) kind = lower(e->value);
  if (kind == "gaussian") {
    GaussianPrior p = std::holds_alternative<GaussianPrior>(config.prior) ? std::get<GaussianPrior>(config.prior)
                                                                          : GaussianPrior{};
    r.read_double("sigma", p.sigma);
    if (!(p.sigma > 0.0)) r.fail("sigma must be > 0");
    config.prior = p;
  } else if (kind == "uniform_box") {
    UniformBoxPrior p = std::holds_alternative<UniformBoxPrior>(config.prior)
                            ? std::get<UniformBoxPrior>(config.prior)
                            : UniformBoxPrior{};
    r.read_double("half_width", p.half_width);
    if (!(p.half_width > 0.0)) r.fail("half_width must be > 0");
    config.prior = p;
  } else {
    r.fail(r.find("kind")->line, "kind must be gaussian or uniform_box, got '" + kind + "'");
  }
}

void apply_mcmc(const SectionReader& r, McmcConfig& mcmc) {
  r.reject_unknown({"total_iters", "burn_in", "thin", "target_samples", "initial_step", "adapt_window",
                    "target_accept", "chains", "init"});
  r.read_size("total_iters", mcmc.total_iters);
  r.read_size("burn_in", mcmc.burn_in);
  r.read_size("thin", mcmc.thin);
  r.read_size("target_samples", mcmc.target_samples);
  r.read_double("initial_step", mcmc.initial_step);
  r.read_size("adapt_window", mcmc.adapt_window);
  r.read_double("target_accept", mcmc.target_accept);
  r.read_size("chains", mcmc.chains);
  if (const auto* e = r.find("init")) {
    const std::string v = lower(e->value);
    if (v == "near_truth") {
      mcmc.init = InitMode::kNearTruth;
    } else if (v == "overdispersed") {
      mcmc.init = InitMode::kOverdispersed;
    } else {
      r.fail(e->line, "init must be near_truth or overdispersed, got '" + e->value + "'");
    }
  }
  try {
    mcmc.validate();
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
}

ModelSpec read_cell(const SectionReader& r, std::size_t index) {
  r.reject_unknown({"I", "J", "K", "H", "H0", "n"});
  ModelSpec spec{{0, 0, 0}, 0, 0, 100};
  for (const char* key : {"I", "J", "K", "H", "H0"}) {
    if (!r.find(key)) r.fail(fmt::format("cell {}: missing key {}", index, key));
  }
  r.read_size("I", spec.dims.i);
  r.read_size("J", spec.dims.j);
  r.read_size("K", spec.dims.k);
  r.read_size("H", spec.rank);
  r.read_size("H0", spec.true_rank);
  r.read_size("n", spec.n);
  try {
    if (spec.true_rank < 1) throw DomainError("H0 must be >= 1");
    spec.validate();
  } catch (const DomainError& e) {
    r.fail(fmt::format("cell {}: {}", index, e.what()));
  }
  return spec;
}

}  // namespace

IniDocument IniDocument::parse(std::istream& in, const std::string& source) {
  IniDocument doc;
  doc.source_ = source;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(fmt::format("{}:{}: unterminated section header", source, line_no));
      const std::string name = lower(trim(std::string_view(line).substr(1, line.size() - 2)));
      if (name.empty()) throw ConfigError(fmt::format("{}:{}: empty section name", source, line_no));
      doc.sections_.push_back({name, line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("{}:{}: expected key = value", source, line_no));
    if (doc.sections_.empty()) throw ConfigError(fmt::format("{}:{}: key outside of any section", source, line_no));
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (const auto hash = value.find(" #"); hash != std::string::npos) value = trim(value.substr(0, hash));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", source, line_no));
    auto& entries = doc.sections_.back().entries;
    if (entries.contains(key)) throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", source, line_no, key));
    entries.emplace(std::move(key), Entry{std::move(value), line_no});
  }
  return doc;
}

IniDocument IniDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in, path.string());
}

OutputFormat parse_output_format(const std::string& text) {
  const std::string v = lower(text);
  if (v == "csv") return OutputFormat::kCsv;
  if (v == "json") return OutputFormat::kJson;
  throw ConfigError("format must be csv or json, got '" + text + "'");
}

void apply_config(const IniDocument& doc, ExperimentConfig& config) {
  std::vector<ModelSpec> cells;
  for (const auto& section : doc.sections()) {
    const SectionReader reader(doc, section);
    if (section.name == "experiment") {
      apply_experiment(reader, config);
    } else if (section.name == "prior") {
      apply_prior(reader, config);
    } else if (section.name == "mcmc") {
      apply_mcmc(reader, config.mcmc);
    } else if (section.name == "cell") {
      cells.push_back(read_cell(reader, cells.size()));
    } else {
      reader.fail("unknown section");
    }
  }
  if (!cells.empty()) config.cells = std::move(cells);
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(doc.source() + ": " + e.what());
  }
}

}  // namespace rlct
