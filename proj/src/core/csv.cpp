#include "core/csv.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace genco::csv {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

double to_double(std::string_view text, std::string_view what, long line) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || p != text.data() + text.size() || !std::isfinite(v))
        throw ParseError(fmt::format("invalid {} '{}'", what, text), line);
    return v;
}

long to_long(std::string_view text, std::string_view what, long line) {
    long v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || p != text.data() + text.size())
        throw ParseError(fmt::format("invalid {} '{}'", what, text), line);
    return v;
}

Reader::Reader(std::istream& in) : in_(in) {
    while (std::getline(in_, buf_)) {
        ++line_;
        if (!buf_.empty() && buf_.back() == '\r') buf_.pop_back();
        if (buf_.empty()) continue;
        for (auto f : split(buf_)) header_.emplace_back(f);
        return;
    }
    throw ParseError("empty file: missing header row");
}

Reader::Reader(std::istream& in, std::vector<std::string> expected) : Reader(in) {
    if (header_ != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw ParseError("unexpected header, expected '" + want + "'", line_);
    }
}

bool Reader::next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, buf_)) {
        ++line_;
        if (!buf_.empty() && buf_.back() == '\r') buf_.pop_back();
        if (buf_.empty()) continue;
        fields = split(buf_);
        if (fields.size() != header_.size())
            throw ParseError(fmt::format("expected {} fields, found {}", header_.size(), fields.size()), line_);
        return true;
    }
    return false;
}

std::string num(double v) {
    if (v == 0.0) return "0";
    return fmt::format("{}", v);
}

}  // namespace genco::csv
