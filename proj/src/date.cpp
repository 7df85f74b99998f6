#include "cardiotox/date.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace cardiotox {

using namespace std::chrono;

Date::Date(int y, unsigned m, unsigned d) {
    year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
    days_ = sys_days{ymd};
}

std::optional<Date> Date::parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto read = [&](std::size_t pos, std::size_t len, int& out) {
        for (std::size_t i = pos; i < pos + len; ++i)
            if (text[i] < '0' || text[i] > '9') return false;
        auto res = std::from_chars(text.data() + pos, text.data() + pos + len, out);
        return res.ec == std::errc{};
    };
    int y = 0, m = 0, d = 0;
    if (!read(0, 4, y) || !read(5, 2, m) || !read(8, 2, d)) return std::nullopt;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{sys_days{ymd}};
}

std::string Date::iso() const {
    auto v = ymd();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(v.year()),
                  static_cast<unsigned>(v.month()), static_cast<unsigned>(v.day()));
    return buf;
}

long days_between(Date from, Date to) {
    return static_cast<long>((to.days() - from.days()).count());
}

int whole_years(Date birth, Date at) {
    auto b = birth.ymd();
    auto a = at.ymd();
    int years = static_cast<int>(a.year()) - static_cast<int>(b.year());
    if (a.month() < b.month() || (a.month() == b.month() && a.day() < b.day())) --years;
    return years;
}

}  // namespace cardiotox
