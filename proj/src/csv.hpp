#pragma once

#include <string>
#include <vector>

namespace mage {

// Minimal CSV support for the artifact's own file formats: comma-separated,
// no quoting or escaping, first line is the header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index by exact name, -1 if absent.
    int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& origin);

std::vector<std::string> split_csv_line(const std::string& line);

// Shortest exact representation of a double (round-trips bit-exactly).
std::string format_double(double v);

// Locale-independent strict parse; the whole field must be consumed.
double parse_double(const std::string& field, const std::string& context);
long parse_long(const std::string& field, const std::string& context);

// Write-temp-then-rename so readers never observe partial files.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

}  // namespace mage
