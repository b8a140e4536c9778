// File formats: headered CSV tables with '#' comment lines, flat key=value
// files for configs and metadata, canonical number formatting, and the
// config hash stamped into every artifact.
#ifndef PROFMIX_IO_HPP
#define PROFMIX_IO_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "profmix/types.hpp"

namespace profmix {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line_numbers;      // 1-based source line per row
    std::vector<std::string> comments;  // '#' lines in order, marker stripped

    // Column index of a header name, -1 when absent.
    int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

// Comments precede the header, each prefixed with "# ".
void write_csv(const std::string& path, const CsvTable& table,
               const std::vector<std::string>& comments = {});

// Decimal form with enough digits to round-trip a double exactly.
std::string format_double(double value);

// Strict full-token numeric parses.
double parse_double(const std::string& text);
long parse_long(const std::string& text);

using KeyValueList = std::vector<std::pair<std::string, std::string>>;

KeyValueList read_key_values(const std::string& path);
void write_key_values(const std::string& path, const KeyValueList& items);

std::uint64_t fnv1a64(std::string_view text);
std::string hash_hex(std::uint64_t value);

// Loads covariates plus one integer count column; every other column is a
// covariate in file order. Parse failures carry line and column coordinates.
Dataset load_dataset_csv(const std::string& path, const std::string& count_column);

void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::string& count_column,
                       const std::vector<std::string>& comments = {});

// Centers and scales every covariate column in place and records the
// transform. Constant columns are rejected.
void apply_standardization(Dataset& data);

}  // namespace profmix

#endif
