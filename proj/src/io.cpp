#include "profmix/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace profmix {

namespace {

std::string trim(const std::string& text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) {
        ++begin;
    }
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) {
        --end;
    }
    return text.substr(begin, end - begin);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else {
            field.push_back(ch);
        }
    }
    fields.push_back(field);
    return fields;
}

// Strips a trailing carriage return so CRLF input parses cleanly.
void chomp(std::string& line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

[[noreturn]] void cell_error(const std::string& path, int line, const std::string& column,
                             const std::string& what) {
    throw DataError(path + ": line " + std::to_string(line) + ", column '" + column + "': " +
                    what);
}

}  // namespace

int CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    CsvTable table;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        chomp(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '#') {
            std::size_t begin = 1;
            if (begin < line.size() && line[begin] == ' ') {
                ++begin;
            }
            table.comments.push_back(line.substr(begin));
            continue;
        }
        std::vector<std::string> fields = split_fields(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw DataError(path + ": line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " fields, found " +
                            std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
    }
    if (!have_header) {
        throw DataError(path + ": missing header row");
    }
    return table;
}

void write_csv(const std::string& path, const CsvTable& table,
               const std::vector<std::string>& comments) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    for (const std::string& comment : comments) {
        out << "# " << comment << '\n';
    }
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        out << (j ? "," : "") << table.header[j];
    }
    out << '\n';
    for (const std::vector<std::string>& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            out << (j ? "," : "") << row[j];
        }
        out << '\n';
    }
    if (!out) {
        throw DataError("write failed for '" + path + "'");
    }
}

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

double parse_double(const std::string& text) {
    const std::string token = trim(text);
    if (token.empty()) {
        throw DataError("missing value");
    }
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw DataError("not a number: '" + token + "'");
    }
    return value;
}

long parse_long(const std::string& text) {
    const std::string token = trim(text);
    if (token.empty()) {
        throw DataError("missing value");
    }
    long value = 0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw DataError("not an integer: '" + token + "'");
    }
    return value;
}

KeyValueList read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    KeyValueList items;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        chomp(line);
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') {
            continue;
        }
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw DataError(path + ": line " + std::to_string(line_no) +
                            ": expected key=value");
        }
        items.emplace_back(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    return items;
}

void write_key_values(const std::string& path, const KeyValueList& items) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    for (const auto& [key, value] : items) {
        out << key << '=' << value << '\n';
    }
    if (!out) {
        throw DataError("write failed for '" + path + "'");
    }
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::string hash_hex(std::uint64_t value) {
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
    return buffer;
}

Dataset load_dataset_csv(const std::string& path, const std::string& count_column) {
    const CsvTable table = read_csv(path);
    const int count_col = table.column(count_column);
    if (count_col < 0) {
        throw DataError(path + ": count column '" + count_column + "' not found");
    }
    const int p = static_cast<int>(table.header.size()) - 1;
    if (p < 1) {
        throw DataError(path + ": no covariate columns besides '" + count_column + "'");
    }
    const int n = static_cast<int>(table.rows.size());
    if (n < 1) {
        throw DataError(path + ": no data rows");
    }

    Dataset data;
    data.covariates.resize(n, p);
    data.counts.resize(n);
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (static_cast<int>(j) != count_col) {
            data.variable_names.push_back(table.header[j]);
        }
    }
    for (int i = 0; i < n; ++i) {
        const int line = table.line_numbers[i];
        int out_col = 0;
        for (std::size_t j = 0; j < table.header.size(); ++j) {
            const std::string& cell = table.rows[i][j];
            if (static_cast<int>(j) == count_col) {
                long value = 0;
                try {
                    value = parse_long(cell);
                } catch (const DataError& err) {
                    cell_error(path, line, table.header[j], err.what());
                }
                if (value < 0 || value > std::numeric_limits<int>::max()) {
                    cell_error(path, line, table.header[j], "count out of range");
                }
                data.counts[i] = static_cast<int>(value);
            } else {
                try {
                    data.covariates(i, out_col) = parse_double(cell);
                } catch (const DataError& err) {
                    cell_error(path, line, table.header[j], err.what());
                }
                if (!std::isfinite(data.covariates(i, out_col))) {
                    cell_error(path, line, table.header[j], "non-finite value");
                }
                ++out_col;
            }
        }
    }
    data.validate();
    return data;
}

void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::string& count_column,
                       const std::vector<std::string>& comments) {
    CsvTable table;
    table.header = data.variable_names;
    table.header.push_back(count_column);
    for (Eigen::Index i = 0; i < data.n_subjects(); ++i) {
        std::vector<std::string> row;
        for (Eigen::Index j = 0; j < data.n_variables(); ++j) {
            row.push_back(format_double(data.covariates(i, j)));
        }
        row.push_back(std::to_string(data.counts[i]));
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table, comments);
}

void apply_standardization(Dataset& data) {
    const Eigen::Index n = data.n_subjects();
    const Eigen::Index p = data.n_variables();
    if (n < 2) {
        throw DataError("standardization needs at least two rows");
    }
    data.standardization.mean.resize(p);
    data.standardization.sd.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double mean = data.covariates.col(j).mean();
        const double ss = (data.covariates.col(j).array() - mean).square().sum();
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!(sd > 0.0)) {
            throw DataError("covariate '" + data.variable_names[j] +
                            "' is constant; cannot standardize");
        }
        data.covariates.col(j) = (data.covariates.col(j).array() - mean) / sd;
        data.standardization.mean[j] = mean;
        data.standardization.sd[j] = sd;
    }
    data.standardization.enabled = true;
}

}  // namespace profmix
