#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "rlct/experiment.hpp"

namespace rlct {

/// Minimal INI document: `[section]` headers, `key = value` lines, `#` or `;`
/// comments. Sections may repeat and keep their order and line numbers.
class IniDocument {
 public:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  struct Section {
    std::string name;
    std::size_t line = 0;
    std::map<std::string, Entry> entries;
  };

  /// Throws ConfigError("<source>:<line>: ...") on malformed input.
  [[nodiscard]] static IniDocument parse(std::istream& in, const std::string& source = "<config>");
  [[nodiscard]] static IniDocument load(const std::filesystem::path& path);

  [[nodiscard]] const std::vector<Section>& sections() const noexcept { return sections_; }
  [[nodiscard]] const std::string& source() const noexcept { return source_; }

 private:
  std::string source_;
  std::vector<Section> sections_;
};

/// Overlays an INI document onto `config`. Recognised sections: [experiment],
/// [prior], [mcmc] and any number of [cell]. When the document has [cell]
/// sections they replace config.cells. The result is validated; errors carry
/// file and line context and name the offending cell index.
void apply_config(const IniDocument& doc, ExperimentConfig& config);

[[nodiscard]] OutputFormat parse_output_format(const std::string& text);

}  // namespace rlct
