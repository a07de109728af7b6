#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace holopos::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kFormatVersion = "1";

// Formats a double with 17 significant digits ('.' decimal point, no locale
// dependence), enough for exact binary round-trips.
std::string format_number(double value);

// CSV emitter with a reproducible leading metadata block.  Nothing
// time-dependent is ever written, so identical inputs give identical bytes.
class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    // Metadata lines are buffered and written as '# key = value' comments, in
    // insertion order, before the header.
    void add_metadata(const std::string& key, const std::string& value);
    void add_metadata(const std::string& key, double value);
    void add_metadata(const std::string& key, long long value);

    void write_header(const std::vector<std::string>& columns);

    void begin_row();
    void add(double value);
    void add(long long value);
    void add(const std::string& value);
    void end_row();

  private:
    std::ostream& out_;
    std::vector<std::pair<std::string, std::string>> metadata_;
    bool header_written_ = false;
    std::size_t columns_ = 0;
    std::vector<std::string> row_;
};

}  // namespace holopos::cli
