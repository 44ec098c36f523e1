#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace rct::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Shortest round-trip decimal (at most 17 significant digits); nan/inf spelled out.
std::string format_double(double v);

std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

/// Hash of the canonical (key-sorted, compact) document plus the tool version.
std::string config_hash(const nlohmann::json& canonical);

class CsvWriter {
public:
    /// First line is "# manifest <hash>", then the header.
    CsvWriter(std::ostream& out, const std::string& hash, const std::vector<std::string>& header);

    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(const std::string& v);
    void end_row();

private:
    std::ostream& out_;
    bool first_ = true;
};

/// Writes with a trailing newline; throws on I/O failure.
void write_text_file(const std::string& path, const std::string& text);

/// Finite numbers as-is; nan/inf become null.
nlohmann::json num(double v);

std::string join_path(const std::string& dir, const std::string& file);

}  // namespace rct::cli
