#include "lrcone/output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace lrcone {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

void Table::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw std::logic_error("row has " + std::to_string(cells.size()) + " cells, header has " +
                               std::to_string(header_.size()));
    rows_.push_back(std::move(cells));
}

std::string Table::body() const {
    std::string out;
    const auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

std::string render_csv(const Table& table, const OutputMeta& meta) {
    const std::string body = table.body();
    std::string out = "# lrcone " + meta.command + "\n";
    out += "# status: " + meta.status() + "\n";
    out += "# sha256: " + sha256_hex(body) + "\n";
    if (meta.config) {
        for (const auto& [key, value] : meta.config->entries)
            out += "# config: " + key + " = " + format_value(value) + "\n";
    }
    return out + body;
}

nlohmann::json config_to_json(const Config& config) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, value] : config.entries)
        std::visit([&](const auto& v) { j[key] = v; }, value);
    return j;
}

std::string render_json(const nlohmann::json& result, const OutputMeta& meta) {
    const std::string body = result.dump(2);
    nlohmann::json doc;
    doc["command"] = meta.command;
    doc["status"] = meta.status();
    doc["sha256"] = sha256_hex(body);
    doc["config"] = meta.config ? config_to_json(*meta.config) : nlohmann::json::object();
    doc["result"] = result;
    return doc.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, std::string_view content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path temp = target.string() + ".partial";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + temp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write to '" + temp.string() + "' failed");
    }
    fs::rename(temp, target);
}

}  // namespace lrcone
