#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace cardiotox {

/// Calendar date with day resolution.
class Date {
public:
    Date() = default;
    explicit Date(std::chrono::sys_days days) : days_(days) {}
    Date(int year, unsigned month, unsigned day);

    /// Strict ISO-8601 YYYY-MM-DD; nullopt on any malformation or invalid day.
    static std::optional<Date> parse(std::string_view text);

    std::string iso() const;
    std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
    std::chrono::sys_days days() const { return days_; }

    Date plus_days(long n) const { return Date{days_ + std::chrono::days{n}}; }

    auto operator<=>(const Date&) const = default;
    bool operator==(const Date&) const = default;

private:
    std::chrono::sys_days days_{};
};

/// Signed number of days from `from` to `to`.
long days_between(Date from, Date to);

/// Completed whole years between birth and at (floor).
int whole_years(Date birth, Date at);

}  // namespace cardiotox
