#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace volnet {

/// Calendar day, stored as a day count relative to 1970-01-01.
class Date {
public:
    constexpr Date() = default;

    static constexpr Date from_days(std::int32_t days) { return Date(days); }
    /// Throws InvalidArgument if the triple is not a real calendar day.
    static Date from_ymd(int year, unsigned month, unsigned day);
    /// Strict `YYYY-MM-DD`; nullopt on anything else (including 2013-02-30).
    static std::optional<Date> parse(std::string_view text);

    constexpr std::int32_t days() const { return days_; }
    int year() const;
    unsigned month() const;
    unsigned day() const;
    /// 0 = Monday ... 6 = Sunday.
    unsigned weekday() const;
    std::string iso() const;

    constexpr Date next() const { return Date(days_ + 1); }

    constexpr auto operator<=>(const Date&) const = default;

private:
    constexpr explicit Date(std::int32_t days) : days_(days) {}
    std::int32_t days_ = 0;
};

/// Inclusive date interval.
struct DateRange {
    Date first;
    Date last;

    bool contains(Date d) const { return first <= d && d <= last; }
    auto operator<=>(const DateRange&) const = default;
};

}  // namespace volnet
