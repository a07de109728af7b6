#include "csv_output.hpp"

#include <cinttypes>
#include <cstdio>
#include <stdexcept>

namespace holopos::cli {

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void CsvWriter::add_metadata(const std::string& key, const std::string& value) {
    if (header_written_) throw std::logic_error("metadata must precede the header");
    metadata_.emplace_back(key, value);
}

void CsvWriter::add_metadata(const std::string& key, double value) {
    add_metadata(key, format_number(value));
}

void CsvWriter::add_metadata(const std::string& key, long long value) {
    add_metadata(key, std::to_string(value));
}

void CsvWriter::write_header(const std::vector<std::string>& columns) {
    if (header_written_) throw std::logic_error("header already written");
    for (const auto& [key, value] : metadata_) out_ << "# " << key << " = " << value << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out_ << ',';
        out_ << columns[i];
    }
    out_ << "\n";
    header_written_ = true;
    columns_ = columns.size();
}

void CsvWriter::begin_row() {
    if (!header_written_) throw std::logic_error("header must precede rows");
    row_.clear();
}

void CsvWriter::add(double value) { row_.push_back(format_number(value)); }

void CsvWriter::add(long long value) { row_.push_back(std::to_string(value)); }

void CsvWriter::add(const std::string& value) { row_.push_back(value); }

void CsvWriter::end_row() {
    if (row_.size() != columns_)
        throw std::logic_error("row width does not match the header");
    for (std::size_t i = 0; i < row_.size(); ++i) {
        if (i) out_ << ',';
        out_ << row_[i];
    }
    out_ << "\n";
}

}  // namespace holopos::cli
