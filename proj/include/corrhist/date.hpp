#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

#include "corrhist/errors.hpp"

namespace corrhist {

/// Observation date with day granularity, kept in ISO-8601 form (YYYY-MM-DD).
/// The textual form orders the same way as the calendar.
class Date {
public:
    Date() = default;

    static Date parse(std::string_view text) {
        auto bad = [&] { return Error("invalid date '" + std::string(text) + "', expected YYYY-MM-DD"); };
        if (text.size() != 10 || text[4] != '-' || text[7] != '-')
            throw bad();
        for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
            if (text[i] < '0' || text[i] > '9')
                throw bad();
        auto num = [&](std::size_t pos, std::size_t len) {
            int v = 0;
            for (std::size_t i = pos; i < pos + len; ++i)
                v = v * 10 + (text[i] - '0');
            return v;
        };
        std::chrono::year_month_day ymd{std::chrono::year{num(0, 4)},
                                        std::chrono::month{static_cast<unsigned>(num(5, 2))},
                                        std::chrono::day{static_cast<unsigned>(num(8, 2))}};
        if (!ymd.ok())
            throw bad();
        Date d;
        d.text_ = std::string(text);
        return d;
    }

    static Date from_ymd(std::chrono::year_month_day ymd) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        return parse(buf);
    }

    std::chrono::year_month_day ymd() const {
        return std::chrono::year_month_day{std::chrono::year{std::stoi(text_.substr(0, 4))},
                                           std::chrono::month{static_cast<unsigned>(std::stoi(text_.substr(5, 2)))},
                                           std::chrono::day{static_cast<unsigned>(std::stoi(text_.substr(8, 2)))}};
    }

    Date plus_days(int n) const {
        return from_ymd(std::chrono::year_month_day{std::chrono::sys_days{ymd()} + std::chrono::days{n}});
    }

    const std::string& str() const noexcept { return text_; }
    bool empty() const noexcept { return text_.empty(); }

    friend bool operator==(const Date&, const Date&) = default;
    friend auto operator<=>(const Date& a, const Date& b) { return a.text_ <=> b.text_; }

    friend std::ostream& operator<<(std::ostream& os, const Date& d) { return os << d.text_; }

private:
    std::string text_;
};

}  // namespace corrhist

template <>
struct std::hash<corrhist::Date> {
    std::size_t operator()(const corrhist::Date& d) const noexcept { return std::hash<std::string>{}(d.str()); }
};
