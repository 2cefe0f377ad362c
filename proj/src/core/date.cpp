#include "core/date.hpp"

#include "core/errors.hpp"

#include <charconv>
#include <cstdio>

namespace finvision {
namespace {

// Civil-calendar conversions (Howard Hinnant's algorithms).
long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

void civil_from_days(long long z, int& y, int& m, int& d) {
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long long yy = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

bool parse_int(std::string_view s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

int days_in_month(int y, int m) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[m - 1];
}

} // namespace

Date Date::from_ymd(int year, int month, int day) {
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) {
        throw Error::data("invalid calendar date: " + std::to_string(year) + "-" +
                          std::to_string(month) + "-" + std::to_string(day));
    }
    return from_serial(static_cast<int>(days_from_civil(year, month, day)));
}

bool Date::try_parse(std::string_view iso, Date& out) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return false;
    int y = 0, m = 0, d = 0;
    if (!parse_int(iso.substr(0, 4), y) || !parse_int(iso.substr(5, 2), m) ||
        !parse_int(iso.substr(8, 2), d)) {
        return false;
    }
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) return false;
    out = from_serial(static_cast<int>(days_from_civil(y, m, d)));
    return true;
}

Date Date::parse(std::string_view iso) {
    Date d;
    if (!try_parse(iso, d)) {
        throw Error::data("expected ISO date YYYY-MM-DD, got '" + std::string(iso) + "'");
    }
    return d;
}

int Date::year() const {
    int y, m, d;
    civil_from_days(serial_, y, m, d);
    return y;
}

int Date::month() const {
    int y, m, d;
    civil_from_days(serial_, y, m, d);
    return m;
}

int Date::day() const {
    int y, m, d;
    civil_from_days(serial_, y, m, d);
    return d;
}

int Date::weekday() const {
    // 1970-01-01 was a Thursday (weekday 4).
    int w = (serial_ + 4) % 7;
    return w < 0 ? w + 7 : w;
}

std::string Date::to_string() const {
    int y, m, d;
    civil_from_days(serial_, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

} // namespace finvision
