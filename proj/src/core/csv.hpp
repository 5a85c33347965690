#pragma once

// Minimal reader for the comma-separated files used throughout the
// pipeline: no quoting, no embedded commas, a header row.

#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "genco/error.hpp"

namespace genco::csv {

std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Parses a finite double; throws ParseError mentioning `what` and `line`.
double to_double(std::string_view text, std::string_view what, long line);
long to_long(std::string_view text, std::string_view what, long line);

class Reader {
public:
    /// Reads the header and checks it matches `expected` exactly.
    Reader(std::istream& in, std::vector<std::string> expected);
    /// Reads the header, whatever it is.
    explicit Reader(std::istream& in);

    const std::vector<std::string>& header() const noexcept { return header_; }
    /// Next data row split into fields; false at end of input. Blank lines
    /// are skipped. Rows with the wrong field count throw ParseError.
    bool next(std::vector<std::string_view>& fields);
    long line() const noexcept { return line_; }

private:
    std::istream& in_;
    std::vector<std::string> header_;
    std::string buf_;
    long line_ = 0;
};

/// Shortest text that reads back to the same double.
std::string num(double v);

}  // namespace genco::csv
