#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "genco/milp.hpp"

namespace genco::milp {
namespace {

void write_terms(std::string& out, const ModelSpec& model, const std::vector<Term>& terms) {
    if (terms.empty()) {
        out += " 0 " + model.variables().front().name;
        return;
    }
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const auto& t = terms[k];
        const char* sign = t.coef < 0.0 ? "-" : "+";
        if (k == 0 && t.coef >= 0.0) sign = "";
        out += fmt::format(" {}{}{:.17g} {}", sign, *sign ? " " : "", std::abs(t.coef),
                           model.variables()[static_cast<std::size_t>(t.var)].name);
    }
}

struct Token {
    std::string text;
    long line = 0;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    long line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (c == '\\') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '<' || c == '>' || c == '=') {
            std::string op(1, c);
            ++i;
            if (i < text.size() && text[i] == '=') {
                op += '=';
                ++i;
            }
            out.push_back({op, line});
        } else if (c == '+' || c == '-' || c == ':') {
            out.push_back({std::string(1, c), line});
            ++i;
        } else {
            const std::size_t start = i;
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
                   std::string_view("<>=:+-\\").find(text[i]) == std::string_view::npos) {
                // keep exponent signs inside numbers, e.g. 1e-05
                ++i;
                if (i < text.size() && (text[i] == '-' || text[i] == '+') &&
                    (text[i - 1] == 'e' || text[i - 1] == 'E') &&
                    std::isdigit(static_cast<unsigned char>(text[start])))
                    ++i;
            }
            out.push_back({std::string(text.substr(start, i - start)), line});
        }
    }
    return out;
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool parse_number(const std::string& s, double& v) {
    const std::string l = lower(s);
    if (l == "inf" || l == "infinity") {
        v = INFINITY;
        return true;
    }
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    return ec == std::errc{} && p == end;
}

bool valid_name(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && std::string_view("_.[]()").find(c) == std::string_view::npos)
            return false;
    return true;
}

enum class Section { none, objective, constraints, bounds, binaries, end };

Section keyword(const std::vector<Token>& toks, std::size_t& i) {
    const std::string w = lower(toks[i].text);
    auto next_is = [&](const char* s) { return i + 1 < toks.size() && lower(toks[i + 1].text) == s; };
    if (w == "maximize" || w == "minimize" || w == "max" || w == "min") return Section::objective;
    if (w == "subject" && next_is("to")) {
        ++i;
        return Section::constraints;
    }
    if (w == "st" || w == "s.t.") return Section::constraints;
    if (w == "bounds") return Section::bounds;
    if (w == "binaries" || w == "binary") return Section::binaries;
    if (w == "end") return Section::end;
    return Section::none;
}

struct RawRow {
    std::string name;
    std::vector<std::pair<std::string, double>> terms;
    Cmp cmp = Cmp::le;
    double rhs = 0.0;
};

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

    ModelSpec parse();

private:
    [[noreturn]] void fail(const std::string& what) const {
        const long line = pos_ < toks_.size() ? toks_[pos_].line : (toks_.empty() ? 0 : toks_.back().line);
        throw ParseError("LP format: " + what, line);
    }
    bool at_keyword() {
        std::size_t probe = pos_;
        return pos_ < toks_.size() && keyword(toks_, probe) != Section::none;
    }
    void note(const std::string& name) {
        if (!index_.count(name)) {
            index_[name] = order_.size();
            order_.push_back(name);
        }
    }
    RawRow linear_expr(bool allow_label);

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::map<std::string, std::size_t> index_;
    std::vector<std::string> order_;
    std::vector<std::string> bound_order_;
};

RawRow Parser::linear_expr(bool allow_label) {
    RawRow row;
    if (allow_label && pos_ + 1 < toks_.size() && toks_[pos_ + 1].text == ":") {
        row.name = toks_[pos_].text;
        pos_ += 2;
    }
    double sign = 1.0;
    double coef = NAN;
    bool any = false;
    while (pos_ < toks_.size()) {
        const std::string& t = toks_[pos_].text;
        if (t == "<" || t == "<=" || t == ">" || t == ">=" || t == "=" || t == "=<" || t == "=>") break;
        if (at_keyword()) break;
        if (allow_label && any && pos_ + 1 < toks_.size() && toks_[pos_ + 1].text == ":") break;
        if (t == "+") {
            ++pos_;
            continue;
        }
        if (t == "-") {
            sign = -sign;
            ++pos_;
            continue;
        }
        double v = 0.0;
        if (parse_number(t, v)) {
            if (!std::isnan(coef)) fail("two consecutive numbers");
            coef = v;
            ++pos_;
            continue;
        }
        if (!valid_name(t)) fail("invalid token '" + t + "'");
        row.terms.emplace_back(t, sign * (std::isnan(coef) ? 1.0 : coef));
        note(t);
        sign = 1.0;
        coef = NAN;
        any = true;
        ++pos_;
    }
    if (!std::isnan(coef)) {
        // trailing constant on the left-hand side
        row.rhs -= sign * coef;
    }
    return row;
}

ModelSpec Parser::parse() {
    Section sec = Section::none;
    Sense sense = Sense::minimize;
    RawRow objective;
    std::vector<RawRow> rows;
    std::map<std::string, std::pair<double, double>> bounds;
    std::map<std::string, bool> binary;

    while (pos_ < toks_.size()) {
        std::size_t probe = pos_;
        const Section s = keyword(toks_, probe);
        if (s != Section::none) {
            if (s == Section::objective)
                sense = lower(toks_[pos_].text).starts_with("max") ? Sense::maximize : Sense::minimize;
            sec = s;
            pos_ = probe + 1;
            if (sec == Section::end) break;
            if (sec == Section::objective) objective = linear_expr(true);
            continue;
        }
        switch (sec) {
            case Section::constraints: {
                RawRow r = linear_expr(true);
                if (pos_ >= toks_.size()) fail("constraint without comparison");
                const std::string op = toks_[pos_++].text;
                if (op == "<" || op == "<=" || op == "=<") r.cmp = Cmp::le;
                else if (op == ">" || op == ">=" || op == "=>") r.cmp = Cmp::ge;
                else if (op == "=") r.cmp = Cmp::eq;
                else fail("expected comparison operator, got '" + op + "'");
                double sgn = 1.0;
                if (pos_ < toks_.size() && (toks_[pos_].text == "-" || toks_[pos_].text == "+")) {
                    sgn = toks_[pos_].text == "-" ? -1.0 : 1.0;
                    ++pos_;
                }
                double v = 0.0;
                if (pos_ >= toks_.size() || !parse_number(toks_[pos_].text, v)) fail("expected right-hand side");
                ++pos_;
                r.rhs += sgn * v;
                rows.push_back(std::move(r));
                break;
            }
            case Section::bounds: {
                // forms: lo <= x <= hi | x <= hi | x >= lo | x = v | x free
                auto number = [&](double& v) {
                    double sgn = 1.0;
                    if (pos_ < toks_.size() && (toks_[pos_].text == "-" || toks_[pos_].text == "+")) {
                        sgn = toks_[pos_].text == "-" ? -1.0 : 1.0;
                        ++pos_;
                    }
                    if (pos_ >= toks_.size() || !parse_number(toks_[pos_].text, v)) return false;
                    v *= sgn;
                    ++pos_;
                    return true;
                };
                const std::size_t save = pos_;
                double lo = 0.0;
                if (number(lo)) {
                    if (pos_ + 1 >= toks_.size()) fail("truncated bound");
                    const std::string op = toks_[pos_++].text;
                    const std::string name = toks_[pos_++].text;
                    note(name);
                    bound_order_.push_back(name);
                    auto& b = bounds.try_emplace(name, 0.0, INFINITY).first->second;
                    if (op == "<=" || op == "<") b.first = lo;
                    else if (op == ">=" || op == ">") b.second = lo;
                    else fail("bad bound operator");
                    if (pos_ < toks_.size() && (toks_[pos_].text == "<=" || toks_[pos_].text == "<")) {
                        ++pos_;
                        double hi = 0.0;
                        if (!number(hi)) fail("expected upper bound");
                        b.second = hi;
                    }
                    break;
                }
                pos_ = save;
                const std::string name = toks_[pos_++].text;
                note(name);
                bound_order_.push_back(name);
                auto& b = bounds.try_emplace(name, 0.0, INFINITY).first->second;
                if (pos_ >= toks_.size()) fail("truncated bound");
                const std::string op = lower(toks_[pos_++].text);
                if (op == "free") {
                    b = {-INFINITY, INFINITY};
                    break;
                }
                double v = 0.0;
                if (!number(v)) fail("expected bound value");
                if (op == "<=" || op == "<") b.second = v;
                else if (op == ">=" || op == ">") b.first = v;
                else if (op == "=") b = {v, v};
                else fail("bad bound operator");
                break;
            }
            case Section::binaries: {
                const std::string name = toks_[pos_++].text;
                note(name);
                binary[name] = true;
                break;
            }
            default: fail("unexpected token '" + toks_[pos_].text + "'");
        }
    }
    if (sec != Section::end) fail("missing End");

    // Variables listed under Bounds keep that order; the rest follow by first use.
    std::vector<std::string> ordered;
    std::map<std::string, bool> placed;
    for (const auto& name : bound_order_)
        if (!placed[name]) {
            placed[name] = true;
            ordered.push_back(name);
        }
    for (const auto& name : order_)
        if (!placed[name]) {
            placed[name] = true;
            ordered.push_back(name);
        }
    for (std::size_t k = 0; k < ordered.size(); ++k) index_[ordered[k]] = k;

    ModelSpec model;
    for (const auto& name : ordered) {
        const bool is_bin = binary.count(name) > 0;
        double lo = 0.0;
        double hi = is_bin ? 1.0 : INFINITY;
        if (auto it = bounds.find(name); it != bounds.end()) {
            lo = it->second.first;
            hi = is_bin ? std::min(it->second.second, 1.0) : it->second.second;
        }
        if (!std::isfinite(lo) || !std::isfinite(hi))
            throw ParseError("LP format: variable '" + name + "' needs finite bounds");
        try {
            model.add_variable(lo, hi, is_bin ? VarKind::binary : VarKind::continuous, name);
        } catch (const InvalidArgument& e) {
            throw ParseError("LP format: variable '" + name + "': " + e.what());
        }
    }
    auto convert = [&](const RawRow& r) {
        std::vector<Term> terms;
        for (const auto& [name, c] : r.terms) terms.push_back({static_cast<int>(index_.at(name)), c});
        return terms;
    };
    for (const auto& r : rows) model.add_constraint(convert(r), r.cmp, r.rhs, r.name);
    model.set_objective(convert(objective), sense);
    return model;
}

}  // namespace

std::string to_lp_format(const ModelSpec& model) {
    std::string out;
    out += model.sense() == Sense::maximize ? "Maximize\n obj:" : "Minimize\n obj:";
    if (model.num_variables() > 0) write_terms(out, model, model.objective());
    out += "\nSubject To\n";
    for (const auto& row : model.constraints()) {
        out += " " + row.name + ":";
        write_terms(out, model, row.terms);
        const char* op = row.cmp == Cmp::le ? "<=" : row.cmp == Cmp::ge ? ">=" : "=";
        out += fmt::format(" {} {:.17g}\n", op, row.rhs);
    }
    out += "Bounds\n";
    for (const auto& v : model.variables())
        out += fmt::format(" {:.17g} <= {} <= {:.17g}\n", v.lower, v.name, v.upper);
    bool header = false;
    for (const auto& v : model.variables()) {
        if (v.kind != VarKind::binary) continue;
        if (!header) out += "Binaries\n";
        header = true;
        out += " " + v.name + "\n";
    }
    out += "End\n";
    return out;
}

ModelSpec parse_lp_format(std::string_view text) { return Parser(text).parse(); }

}  // namespace genco::milp
