#pragma once

// Output files: CSV with `#` metadata lines and one header row, and JSON reports. Both carry
// the command, a status line, the resolved config and the SHA-256 of the data body.

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lrcone/config.hpp"

namespace lrcone {

/// %.17g; non-finite values print as inf, -inf, nan.
std::string format_double(double v);

std::string sha256_hex(std::string_view data);

class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

    /// Appends a row; the cell count must match the header.
    void add_row(std::vector<std::string> cells);

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }
    /// Header row plus data rows, comma separated, '\n' terminated.
    std::string body() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct OutputMeta {
    std::string command;
    const Config* config = nullptr;
    bool ok = true;
    std::string status_detail;

    std::string status() const { return ok ? "ok" : "failed: " + status_detail; }
};

std::string render_csv(const Table& table, const OutputMeta& meta);
nlohmann::json config_to_json(const Config& config);
std::string render_json(const nlohmann::json& result, const OutputMeta& meta);

/// Writes through a temporary file and renames, so a file either exists complete or not at all.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace lrcone
