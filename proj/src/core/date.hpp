#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace finvision {

// Calendar date, stored as days since 1970-01-01 (proleptic Gregorian).
// Cheap value type; all market-data keys and report rows use it.
class Date {
public:
    Date() = default;

    static Date from_ymd(int year, int month, int day);
    static Date from_serial(int days) { Date d; d.serial_ = days; return d; }

    // Parses "YYYY-MM-DD". Throws Error::data on anything else.
    static Date parse(std::string_view iso);
    static bool try_parse(std::string_view iso, Date& out);

    int year() const;
    int month() const;
    int day() const;
    int serial() const { return serial_; }

    Date add_days(int n) const { return from_serial(serial_ + n); }
    int weekday() const;  // 0 = Sunday .. 6 = Saturday

    std::string to_string() const;

    auto operator<=>(const Date&) const = default;

private:
    int serial_ = 0;
};

} // namespace finvision
