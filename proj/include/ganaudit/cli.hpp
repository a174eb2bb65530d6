#pragma once

#include <string>
#include <vector>

namespace ganaudit {

// Thin CSV layer: header row, UTF-8, LF endings, no quoting (emitted fields
// never contain commas).
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

std::string format_double(double v);

// FNV-1a over the canonical config dump; reports carry it so a run can be
// reproduced bit-for-bit.
std::string config_hash(const std::string& canonical);

// CLI entry point. On failure prints a machine-readable JSON error record
// to stderr and returns nonzero.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace ganaudit
