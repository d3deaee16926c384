#include "fairalloc/csv.hpp"

#include <cstdio>

#include "fairalloc/errors.hpp"
#include "fairalloc/history.hpp"

namespace fairalloc {

namespace csv {

std::vector<std::string> split_line(std::string_view line, char delimiter) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
                current.push_back('"');
                ++k;
            } else if (c == '"') {
                quoted = false;
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delimiter) {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string escape_field(std::string_view field, char delimiter) {
    if (field.find_first_of(std::string{delimiter, '"', '\n'}) == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace csv

Date parse_iso_date(std::string_view text) {
    using namespace std::chrono;
    auto bad = [&] { return ParseError("not an ISO-8601 date (YYYY-MM-DD): '" + std::string(text) + "'"); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
    auto number = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        for (std::size_t k = pos; k < pos + len; ++k) {
            if (text[k] < '0' || text[k] > '9') throw bad();
            v = v * 10 + (text[k] - '0');
        }
        return v;
    };
    year_month_day ymd{year{number(0, 4)}, month{static_cast<unsigned>(number(5, 2))},
                       day{static_cast<unsigned>(number(8, 2))}};
    if (!ymd.ok()) throw bad();
    return sys_days{ymd};
}

std::string format_iso_date(Date date) {
    using namespace std::chrono;
    year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::size_t History::num_observations() const {
    std::size_t n = 0;
    for (const auto& [label, s] : series) n += s.size();
    return n;
}

Date History::first_date() const {
    bool found = false;
    Date best{};
    for (const auto& [label, s] : series) {
        if (s.empty()) continue;
        if (!found || s.begin()->first < best) best = s.begin()->first;
        found = true;
    }
    if (!found) throw InvalidInput("history has no observations");
    return best;
}

Date History::last_date() const {
    bool found = false;
    Date best{};
    for (const auto& [label, s] : series) {
        if (s.empty()) continue;
        if (!found || s.rbegin()->first > best) best = s.rbegin()->first;
        found = true;
    }
    if (!found) throw InvalidInput("history has no observations");
    return best;
}

std::pair<History, History> split_history(const History& history, Date boundary) {
    History before;
    History after;
    for (const auto& [label, s] : history.series) {
        auto& b = before.series[label];
        auto& a = after.series[label];
        for (const auto& [date, value] : s) (date < boundary ? b : a)[date] = value;
        if (b.empty() || a.empty()) {
            throw InvalidInput("agent '" + label + "' has an empty series on one side of " +
                               format_iso_date(boundary));
        }
    }
    return {std::move(before), std::move(after)};
}

} // namespace fairalloc
