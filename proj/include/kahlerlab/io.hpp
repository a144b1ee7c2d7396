#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace kahlerlab {

/// FNV-1a 64-bit hash of a byte string, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Writes via a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// CSV artifact: '#'-prefixed metadata lines, a header row, then data rows.
/// Dialect: comma separator, '.' decimal point, LF line endings.
struct CsvTable {
    std::vector<std::string> metadata;  // emitted as "# key: value" lines
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::initializer_list<double> values);
    std::string str() const;
};

/// Shortest round-trippable decimal representation of a double.
std::string format_double(double v);

}  // namespace kahlerlab
